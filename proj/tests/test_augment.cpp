#include <doctest.h>

#include <numeric>

#include "chaosssl/augment.hpp"
#include "chaosssl/errors.hpp"
#include "test_util.hpp"

using namespace chaosssl;
using testutil::random_image;

TEST_CASE("ImageTensor rejects pixels outside [0,1]") {
    CHECK_THROWS_AS(ImageTensor(1, 1, 2, std::vector<double>{0.5, 1.2}), DomainError);
    CHECK_THROWS_AS(ImageTensor(1, 2, 2, std::vector<double>{0.5, 0.2}), DimensionError);
    CHECK_NOTHROW(ImageTensor(1, 1, 2, std::vector<double>{0.0, 1.0}));
}

TEST_CASE("hflip") {
    Rng rng(1);
    SUBCASE("is an involution") {
        const ImageTensor img = random_image(3, 5, 7, rng);
        CHECK(hflip(hflip(img)) == img);
    }
    SUBCASE("moves column 0 to column W-1") {
        ImageTensor img(1, 3, 4, 0.0);
        img.at(0, 1, 0) = 1.0;
        const ImageTensor out = hflip(img);
        CHECK(out.at(0, 1, 3) == 1.0);
        CHECK(out.at(0, 1, 0) == 0.0);
    }
    SUBCASE("leaves a constant image alone") {
        const ImageTensor img(3, 4, 4, 0.42);
        CHECK(hflip(img) == img);
    }
}

TEST_CASE("color adjustments") {
    Rng rng(2);
    SUBCASE("unit factors are the identity") {
        const ImageTensor img = random_image(3, 6, 6, rng);
        CHECK(adjust_color(img, 1.0, 1.0, 1.0) == img);
    }
    SUBCASE("brightness 2 on constant 0.6 saturates at 1") {
        const ImageTensor out = adjust_color(ImageTensor(3, 4, 4, 0.6), 2.0, 1.0, 1.0);
        for (double v : out.pixels()) CHECK(v == 1.0);
    }
    SUBCASE("contrast 0 collapses each channel to its mean") {
        const ImageTensor img = random_image(3, 4, 4, rng);
        const ImageTensor out = adjust_color(img, 1.0, 0.0, 1.0);
        for (std::size_t c = 0; c < 3; ++c) {
            double mean = 0.0;
            for (std::size_t y = 0; y < 4; ++y)
                for (std::size_t x = 0; x < 4; ++x) mean += img.at(c, y, x);
            mean /= 16.0;
            for (std::size_t y = 0; y < 4; ++y)
                for (std::size_t x = 0; x < 4; ++x) CHECK(out.at(c, y, x) == doctest::Approx(mean).epsilon(1e-14));
        }
    }
    SUBCASE("saturation 0 equals grayscale") {
        const ImageTensor img = random_image(3, 4, 4, rng);
        const ImageTensor a = adjust_color(img, 1.0, 1.0, 0.0);
        const ImageTensor b = to_grayscale(img);
        CHECK(testutil::max_abs_diff(a.pixels(), b.pixels()) <= 1e-15);
    }
    SUBCASE("seeded jitter reproduces and stays in range") {
        const ImageTensor img = random_image(3, 8, 8, rng);
        const AugmentConfig cfg;
        Rng a(7), b(7);
        const ImageTensor x = color_jitter(img, a, cfg);
        CHECK(x == color_jitter(img, b, cfg));
        CHECK(x.in_unit_range());
    }
}

TEST_CASE("grayscale") {
    Rng rng(3);
    SUBCASE("gray input is unchanged") {
        ImageTensor img(3, 4, 4);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t y = 0; y < 4; ++y)
            for (std::size_t x = 0; x < 4; ++x) img.at(0, y, x) = img.at(1, y, x) = img.at(2, y, x) = unit(rng);
        const ImageTensor out = to_grayscale(img);
        CHECK(testutil::max_abs_diff(out.pixels(), img.pixels()) <= 1e-15);
    }
    SUBCASE("pure red becomes 0.299 everywhere") {
        ImageTensor img(3, 2, 2, 0.0);
        for (std::size_t y = 0; y < 2; ++y)
            for (std::size_t x = 0; x < 2; ++x) img.at(0, y, x) = 1.0;
        const ImageTensor gray = to_grayscale(img);
        for (double v : gray.pixels()) CHECK(v == doctest::Approx(0.299).epsilon(1e-15));
    }
    SUBCASE("channels come out identical") {
        const ImageTensor out = to_grayscale(random_image(3, 5, 5, rng));
        for (std::size_t y = 0; y < 5; ++y)
            for (std::size_t x = 0; x < 5; ++x) {
                CHECK(out.at(0, y, x) == out.at(1, y, x));
                CHECK(out.at(1, y, x) == out.at(2, y, x));
            }
    }
    SUBCASE("needs three channels") { CHECK_THROWS_AS(to_grayscale(ImageTensor(1, 2, 2)), ContractError); }
}

TEST_CASE("gaussian blur") {
    Rng rng(4);
    SUBCASE("kernel is normalized and symmetric") {
        const auto k = gaussian_kernel(1.3, 7);
        CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        for (std::size_t i = 0; i < 3; ++i) CHECK(k[i] == k[6 - i]);
        CHECK_THROWS_AS(gaussian_kernel(1.0, 4), ContractError);
        CHECK_THROWS_AS(gaussian_kernel(0.0, 5), ContractError);
    }
    SUBCASE("constant image is unchanged") {
        const ImageTensor out = gaussian_blur(ImageTensor(3, 6, 6, 0.37), 1.5, 5);
        for (double v : out.pixels()) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
    }
    SUBCASE("variance never grows on random images") {
        for (int trial = 0; trial < 50; ++trial) {
            const ImageTensor img = random_image(3, 12, 12, rng);
            const ImageTensor out = gaussian_blur(img, 0.3 + 0.05 * trial, 5);
            CHECK(testutil::variance(out.pixels()) <= testutil::variance(img.pixels()));
        }
    }
    SUBCASE("tiny sigma is a delta") {
        const ImageTensor img = random_image(3, 8, 8, rng);
        CHECK(testutil::max_abs_diff(gaussian_blur(img, 0.01, 5).pixels(), img.pixels()) <= 1e-6);
    }
    SUBCASE("reflection matches a hand computation at the border") {
        ImageTensor img(1, 1, 3, 0.0);
        img.at(0, 0, 0) = 1.0;
        const auto k = gaussian_kernel(1.0, 3);
        const ImageTensor out = gaussian_blur(img, 1.0, 3);
        // Row [1, 0, 0] reflected: x=-1 maps to x=1, x=3 maps to x=1. The vertical pass sees a
        // single row, which reflection keeps as-is.
        CHECK(out.at(0, 0, 0) == doctest::Approx(k[1]).epsilon(1e-15));
        CHECK(out.at(0, 0, 1) == doctest::Approx(k[0]).epsilon(1e-15));
        CHECK(out.at(0, 0, 2) == doctest::Approx(0.0));
    }
}

TEST_CASE("standard pipeline") {
    Rng rng(5);
    const ImageTensor img = random_image(3, 8, 8, rng);
    SUBCASE("identity config is the identity") {
        Rng r(1);
        const ImageTensor out = apply_standard(img, r, AugmentConfig::identity());
        CHECK(testutil::max_abs_diff(out.pixels(), img.pixels()) <= 1e-6);
    }
    SUBCASE("seeded and shape-preserving") {
        Rng a(9), b(9);
        const ImageTensor x = apply_standard(img, a, AugmentConfig{});
        CHECK(x == apply_standard(img, b, AugmentConfig{}));
        CHECK(x.same_shape(img));
        CHECK(x.in_unit_range());
    }
    SUBCASE("validation") {
        AugmentConfig cfg;
        cfg.hflip_prob = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ContractError);
        cfg = AugmentConfig{};
        cfg.brightness = {1.2, 0.8};
        CHECK_THROWS_AS(cfg.validate(), ContractError);
    }
}

TEST_CASE("contrastive views") {
    Rng rng(6);
    SUBCASE("with a fixed k and identity augmentations the chaotic view is the transform") {
        auto map = ChaoticMapSpec::defaults(MapKind::Tent);
        map.k_min = map.k_max = 3;
        const ImageTensor img = random_image(3, 8, 8, rng);
        Rng r(3);
        const ViewPair v = make_contrastive_views(img, r, AugmentConfig::identity(), map);
        const ImageTensor expected = chaotic_transform(img, 3, map);
        CHECK(testutil::max_abs_diff(v.v_chaos.pixels(), expected.pixels()) <= 1e-12);
        CHECK(testutil::max_abs_diff(v.v1.pixels(), img.pixels()) <= 1e-6);
    }
    SUBCASE("both views stay in [0,1]") {
        const auto map = ChaoticMapSpec::defaults(MapKind::Logistic);
        for (int i = 0; i < 1000; ++i) {
            const ImageTensor img = random_image(3, 4, 4, rng);
            const ViewPair v = make_contrastive_views(img, rng, AugmentConfig{}, map);
            REQUIRE(v.v1.in_unit_range());
            REQUIRE(v.v_chaos.in_unit_range());
        }
    }
    SUBCASE("seeded pairs reproduce") {
        const auto map = ChaoticMapSpec::defaults(MapKind::Sine);
        const ImageTensor img = random_image(3, 6, 6, rng);
        Rng a(44), b(44);
        const ViewPair x = make_contrastive_views(img, a, AugmentConfig{}, map);
        const ViewPair y = make_contrastive_views(img, b, AugmentConfig{}, map);
        CHECK(x.v1 == y.v1);
        CHECK(x.v_chaos == y.v_chaos);
    }
}
