#include "chaosssl/checkpoint.hpp"

#include <zlib.h>

#include "binary_io.hpp"
#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

constexpr std::string_view kCheckpointMagic = "CSCK";

std::uint32_t checksum(const char* data, std::size_t n) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw ContractError("checkpoint has no tensor '" + name + "'");
}

const std::string& Checkpoint::meta(const std::string& key) const {
    const auto it = metadata.find(key);
    if (it == metadata.end()) throw ContractError("checkpoint has no metadata key '" + key + "'");
    return it->second;
}

std::vector<char> serialize_checkpoint(const Checkpoint& ckpt) {
    binary::Writer w;
    w.bytes(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(ckpt.metadata.size()));
    for (const auto& [k, v] : ckpt.metadata) {
        w.str(k);
        w.str(v);
    }
    w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(t.dim()));
        for (auto d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
        for (double v : t.data()) w.f64(v);
    }
    auto bytes = w.buffer();
    binary::Writer tail;
    tail.u32(checksum(bytes.data(), bytes.size()));
    bytes.insert(bytes.end(), tail.buffer().begin(), tail.buffer().end());
    return bytes;
}

Checkpoint deserialize_checkpoint(const std::vector<char>& bytes, const std::string& what) {
    binary::Reader r(bytes, what);
    if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) r.fail("bad magic, not a checkpoint");
    const auto version = r.u32();
    if (version != kCheckpointVersion) {
        r.fail("checkpoint version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
    }
    if (bytes.size() < 4 + 4 + 4) r.fail("truncated");
    {
        binary::Reader crc_reader(bytes, what);
        crc_reader.bytes(bytes.size() - 4);
        const auto stored = crc_reader.u32();
        if (stored != checksum(bytes.data(), bytes.size() - 4)) r.fail("checksum mismatch (corrupt or truncated)");
    }

    Checkpoint ckpt;
    const auto n_meta = r.u32();
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        auto key = r.str();
        ckpt.metadata[std::move(key)] = r.str();
    }
    const auto n_tensors = r.u32();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        auto name = r.str();
        const auto ndim = r.u32();
        if (ndim == 0 || ndim > 8) r.fail("tensor '" + name + "' has implausible rank " + std::to_string(ndim));
        Shape shape(ndim);
        for (auto& d : shape) {
            d = r.u32();
            if (d == 0) r.fail("tensor '" + name + "' has a zero dimension");
        }
        const std::size_t n = shape_numel(shape);
        if (n * sizeof(double) > r.remaining()) r.fail("tensor '" + name + "' is truncated");
        std::vector<double> data(n);
        for (double& v : data) v = r.f64();
        ckpt.tensors.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(data)));
    }
    if (r.remaining() != 4) r.fail("unexpected trailing bytes");
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    binary::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(binary::read_file(path), path.string());
}

}  // namespace chaosssl
