#include "chaosssl/image.hpp"

#include <algorithm>
#include <string>

#include "chaosssl/errors.hpp"

namespace chaosssl {

ImageTensor::ImageTensor(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : ImageTensor(channels, height, width, std::vector<double>(channels * height * width, fill)) {}

ImageTensor::ImageTensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> pixels)
    : channels_(channels), height_(height), width_(width), pixels_(std::move(pixels)) {
    if (channels == 0 || height == 0 || width == 0) throw DimensionError("image dimensions must be positive");
    if (pixels_.size() != channels * height * width) {
        throw DimensionError("image pixel count " + std::to_string(pixels_.size()) + " does not match " +
                             std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width));
    }
    if (!in_unit_range()) throw DomainError("image pixels must lie in [0,1]");
}

bool ImageTensor::in_unit_range() const noexcept {
    return std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

Rng derive_rng(std::uint64_t base_seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(a),         static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),         static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

}  // namespace chaosssl
