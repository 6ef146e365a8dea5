#pragma once

#include <utility>
#include <vector>

#include "chaosssl/chaos_maps.hpp"
#include "chaosssl/image.hpp"

namespace chaosssl {

struct Range {
    double lo = 1.0;
    double hi = 1.0;
};

// Magnitudes of the standard augmentation pipeline. Defaults follow common
// contrastive-learning practice.
struct AugmentConfig {
    double hflip_prob = 0.5;
    Range brightness{0.6, 1.4};
    Range contrast{0.6, 1.4};
    Range saturation{0.6, 1.4};
    double grayscale_prob = 0.2;
    Range blur_sigma{0.1, 2.0};
    int blur_kernel_size = 5;

    // All probabilities 0, unit jitter factors, a near-delta blur.
    static AugmentConfig identity();
    void validate() const;
};

struct ViewPair {
    ImageTensor v1;
    ImageTensor v_chaos;
};

ImageTensor hflip(const ImageTensor& img);

// Brightness multiplies, contrast mixes toward each channel's mean, saturation
// mixes toward the luminance image. Clamped to [0,1] after each adjustment.
ImageTensor adjust_color(const ImageTensor& img, double brightness, double contrast, double saturation);
ImageTensor color_jitter(const ImageTensor& img, Rng& rng, const AugmentConfig& cfg);

// 0.299 R + 0.587 G + 0.114 B copied to all three channels.
ImageTensor to_grayscale(const ImageTensor& img);

// Normalized 1-D Gaussian taps, centre at index kernel_size / 2.
std::vector<double> gaussian_kernel(double sigma, int kernel_size);
// Separable blur with mirror reflection at the borders.
ImageTensor gaussian_blur(const ImageTensor& img, double sigma, int kernel_size);

// hflip -> color jitter -> grayscale -> blur.
ImageTensor apply_standard(const ImageTensor& img, Rng& rng, const AugmentConfig& cfg);

// v1 = T_std(img); v_chaos = chaos_k(T_std(img)) with an independent T_std draw
// and k drawn once for the whole image.
ViewPair make_contrastive_views(const ImageTensor& img, Rng& rng, const AugmentConfig& aug,
                                const ChaoticMapSpec& map);

}  // namespace chaosssl
