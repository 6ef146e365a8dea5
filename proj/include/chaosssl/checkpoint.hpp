#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chaosssl/nn.hpp"

namespace chaosssl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Named tensors plus free-form string metadata (stage, epochs, seed, map).
//
// On disk, little-endian:
//   "CSCK" | u32 version | u32 n_meta | n_meta × (str key, str value)
//   | u32 n_tensors | n_tensors × (str name, u32 ndim, ndim × u32 dim, f64 values...)
//   | u32 crc32 of every preceding byte
// where str is a u32 length followed by the bytes.
struct Checkpoint {
    std::map<std::string, std::string> metadata;
    NamedTensors tensors;

    const Tensor& tensor(const std::string& name) const;
    const std::string& meta(const std::string& key) const;
};

std::vector<char> serialize_checkpoint(const Checkpoint& ckpt);
// 'what' names the source in error messages.
Checkpoint deserialize_checkpoint(const std::vector<char>& bytes, const std::string& what = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws LoadError on a bad magic, version mismatch, truncation or checksum failure.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace chaosssl
