#include "chaosssl/augment.hpp"

#include <algorithm>
#include <cmath>

#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

double uniform(Rng& rng, Range r) {
    if (r.lo == r.hi) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

bool coin(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return std::bernoulli_distribution(p)(rng);
}

void clamp_unit(ImageTensor& img) {
    for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
}

// Mirror index without repeating the edge sample (…, 2, 1, 0, 1, 2, …).
std::size_t reflect(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return static_cast<std::size_t>(i < n ? i : period - i);
}

bool valid_range(Range r, double min_allowed) { return r.lo >= min_allowed && r.lo <= r.hi; }

}  // namespace

AugmentConfig AugmentConfig::identity() {
    AugmentConfig cfg;
    cfg.hflip_prob = 0.0;
    cfg.brightness = {1.0, 1.0};
    cfg.contrast = {1.0, 1.0};
    cfg.saturation = {1.0, 1.0};
    cfg.grayscale_prob = 0.0;
    cfg.blur_sigma = {0.01, 0.01};
    return cfg;
}

void AugmentConfig::validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(hflip_prob) || !prob_ok(grayscale_prob)) throw ContractError("probabilities must lie in [0,1]");
    if (!valid_range(brightness, 0.0) || !valid_range(contrast, 0.0) || !valid_range(saturation, 0.0)) {
        throw ContractError("jitter ranges must be nonnegative with lo <= hi");
    }
    if (!(blur_sigma.lo > 0.0) || blur_sigma.lo > blur_sigma.hi) throw ContractError("blur sigma range must be positive");
    if (blur_kernel_size < 1 || blur_kernel_size % 2 == 0) throw ContractError("blur kernel size must be odd and positive");
}

ImageTensor hflip(const ImageTensor& img) {
    ImageTensor out = img;
    const std::size_t w = img.width();
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < img.height(); ++y)
            for (std::size_t x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y, w - 1 - x);
    return out;
}

ImageTensor adjust_color(const ImageTensor& img, double brightness, double contrast, double saturation) {
    ImageTensor out = img;
    const std::size_t plane = img.height() * img.width();

    for (double& v : out.pixels()) v *= brightness;
    clamp_unit(out);

    for (std::size_t c = 0; c < out.channels(); ++c) {
        auto px = out.pixels().subspan(c * plane, plane);
        double mean = 0.0;
        for (double v : px) mean += v;
        mean /= static_cast<double>(plane);
        for (double& v : px) v = contrast * v + (1.0 - contrast) * mean;
    }
    clamp_unit(out);

    if (out.channels() == 3) {
        auto px = out.pixels();
        for (std::size_t i = 0; i < plane; ++i) {
            const double gray = kLumaR * px[i] + kLumaG * px[plane + i] + kLumaB * px[2 * plane + i];
            for (std::size_t c = 0; c < 3; ++c) px[c * plane + i] = saturation * px[c * plane + i] + (1.0 - saturation) * gray;
        }
        clamp_unit(out);
    }
    return out;
}

ImageTensor color_jitter(const ImageTensor& img, Rng& rng, const AugmentConfig& cfg) {
    const double b = uniform(rng, cfg.brightness);
    const double c = uniform(rng, cfg.contrast);
    const double s = uniform(rng, cfg.saturation);
    return adjust_color(img, b, c, s);
}

ImageTensor to_grayscale(const ImageTensor& img) {
    if (img.channels() != 3) throw ContractError("grayscale conversion needs a 3-channel image");
    ImageTensor out = img;
    const std::size_t plane = img.height() * img.width();
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < plane; ++i) {
        const double gray = std::clamp(kLumaR * src[i] + kLumaG * src[plane + i] + kLumaB * src[2 * plane + i], 0.0, 1.0);
        dst[i] = dst[plane + i] = dst[2 * plane + i] = gray;
    }
    return out;
}

std::vector<double> gaussian_kernel(double sigma, int kernel_size) {
    if (!(sigma > 0.0)) throw ContractError("blur sigma must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ContractError("blur kernel size must be odd and positive");
    const int half = kernel_size / 2;
    std::vector<double> taps(static_cast<std::size_t>(kernel_size));
    double total = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        taps[static_cast<std::size_t>(i + half)] = v;
        total += v;
    }
    for (double& v : taps) v /= total;
    return taps;
}

ImageTensor gaussian_blur(const ImageTensor& img, double sigma, int kernel_size) {
    const auto taps = gaussian_kernel(sigma, kernel_size);
    const long half = kernel_size / 2;
    const long h = static_cast<long>(img.height());
    const long w = static_cast<long>(img.width());
    // Reflected source index for every padded position.
    std::vector<std::size_t> col_src(static_cast<std::size_t>(w + 2 * half));
    std::vector<std::size_t> row_src(static_cast<std::size_t>(h + 2 * half));
    for (long i = 0; i < w + 2 * half; ++i) col_src[static_cast<std::size_t>(i)] = reflect(i - half, w);
    for (long i = 0; i < h + 2 * half; ++i) row_src[static_cast<std::size_t>(i)] = reflect(i - half, h);

    const auto plane = static_cast<std::size_t>(h * w);
    const auto src = img.pixels();
    std::vector<double> tmp(src.size());
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (long y = 0; y < h; ++y) {
            const double* row = src.data() + c * plane + static_cast<std::size_t>(y * w);
            double* dst = tmp.data() + c * plane + static_cast<std::size_t>(y * w);
            for (long x = 0; x < w; ++x) {
                double acc = 0.0;
                for (long k = 0; k < kernel_size; ++k) acc += taps[k] * row[col_src[x + k]];
                dst[x] = acc;
            }
        }

    ImageTensor out(img.channels(), img.height(), img.width());
    auto dst = out.pixels();
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (long y = 0; y < h; ++y)
            for (long x = 0; x < w; ++x) {
                double acc = 0.0;
                for (long k = 0; k < kernel_size; ++k)
                    acc += taps[k] * tmp[c * plane + row_src[y + k] * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
                dst[c * plane + static_cast<std::size_t>(y * w + x)] = acc;
            }
    clamp_unit(out);
    return out;
}

ImageTensor apply_standard(const ImageTensor& img, Rng& rng, const AugmentConfig& cfg) {
    ImageTensor out = coin(rng, cfg.hflip_prob) ? hflip(img) : img;
    out = color_jitter(out, rng, cfg);
    if (coin(rng, cfg.grayscale_prob) && out.channels() == 3) out = to_grayscale(out);
    const double sigma = uniform(rng, cfg.blur_sigma);
    return gaussian_blur(out, sigma, cfg.blur_kernel_size);
}

ViewPair make_contrastive_views(const ImageTensor& img, Rng& rng, const AugmentConfig& aug,
                                const ChaoticMapSpec& map) {
    ImageTensor v1 = apply_standard(img, rng, aug);
    ImageTensor base = apply_standard(img, rng, aug);
    const int k = sample_k(rng, map);
    return {std::move(v1), chaotic_transform(base, k, map)};
}

}  // namespace chaosssl
