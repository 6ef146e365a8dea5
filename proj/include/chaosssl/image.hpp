#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace chaosssl {

using Rng = std::mt19937_64;

// Channel-major C×H×W image with every pixel in [0,1].
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
    // Throws DomainError if any pixel is outside [0,1].
    ImageTensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> pixels);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool same_shape(const ImageTensor& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }

    double& at(std::size_t c, std::size_t y, std::size_t x) { return pixels_[(c * height_ + y) * width_ + x]; }
    double at(std::size_t c, std::size_t y, std::size_t x) const { return pixels_[(c * height_ + y) * width_ + x]; }

    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<double> pixels() noexcept { return pixels_; }

    bool in_unit_range() const noexcept;

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> pixels_;
};

// Deterministic per-item stream: the same (base, a, b) always yields the same
// generator, independent of how many other streams were created.
Rng derive_rng(std::uint64_t base_seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace chaosssl
