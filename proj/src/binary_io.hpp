#pragma once

// Little-endian encoding helpers shared by the dataset and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chaosssl/errors.hpp"

namespace chaosssl::binary {

class Writer {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }

    const std::vector<char>& buffer() const noexcept { return buf_; }

private:
    template <typename U>
    void put_le(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    std::vector<char> buf_;
};

// Bounds-checked reader; every overrun is reported as a LoadError naming the
// file, so a truncated file never yields partial data silently.
class Reader {
public:
    Reader(const std::vector<char>& buf, std::string what) : buf_(buf), what_(std::move(what)) {}

    std::string bytes(std::size_t n) {
        need(n);
        std::string out(buf_.data() + pos_, n);
        pos_ += n;
        return out;
    }
    std::uint32_t u32() { return get_le<std::uint32_t>(); }
    std::uint64_t u64() { return get_le<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
    std::string str() { return bytes(u32()); }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return buf_.size() - pos_; }

    [[noreturn]] void fail(const std::string& why) const { throw LoadError(what_ + ": " + why); }

private:
    void need(std::size_t n) const {
        if (n > remaining()) fail("truncated (needed " + std::to_string(n) + " more bytes at offset " + std::to_string(pos_) + ")");
    }

    template <typename U>
    U get_le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }

    const std::vector<char>& buf_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<char>& data);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace chaosssl::binary
