#include <doctest.h>

#include <array>
#include <cmath>
#include <cstring>

#include "chaosssl/chaos_maps.hpp"
#include "chaosssl/errors.hpp"
#include "test_util.hpp"

using namespace chaosssl;

TEST_CASE("map kinds parse and print") {
    CHECK(parse_map_kind("Tent") == MapKind::Tent);
    CHECK(parse_map_kind("logistic") == MapKind::Logistic);
    CHECK(parse_map_kind("SINE") == MapKind::Sine);
    CHECK_THROWS_AS(parse_map_kind("henon"), ContractError);
    CHECK(to_string(MapKind::Tent) == "tent");
}

TEST_CASE("default parameters per map") {
    CHECK(ChaoticMapSpec::defaults(MapKind::Logistic).param == 3.99);
    CHECK(ChaoticMapSpec::defaults(MapKind::Tent).param == 2.0);
    CHECK(ChaoticMapSpec::defaults(MapKind::Sine).param == 1.0);
    const auto d = ChaoticMapSpec::defaults(MapKind::Tent);
    CHECK(d.epsilon == 1e-6);
    CHECK(d.k_min == 1);
    CHECK(d.k_max == 5);
}

TEST_CASE("map_step examples") {
    CHECK(map_step(0.5, ChaoticMapSpec::defaults(MapKind::Logistic)) == doctest::Approx(0.9975).epsilon(1e-15));
    CHECK(map_step(2.0 / 3.0, ChaoticMapSpec::defaults(MapKind::Tent)) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(map_step(0.5, ChaoticMapSpec::defaults(MapKind::Sine)) == 1.0);
    CHECK_THROWS_AS(map_step(1.5, ChaoticMapSpec::defaults(MapKind::Tent)), DomainError);
    CHECK_THROWS_AS(map_step(-0.1, ChaoticMapSpec::defaults(MapKind::Sine)), DomainError);
}

TEST_CASE("iterate_map examples") {
    const auto tent = ChaoticMapSpec::defaults(MapKind::Tent);
    SUBCASE("Tent from 0.3") {
        // Hand iteration: 0.3 -> 0.6 -> 0.8 -> 0.4 (the binary expansion shifts, so drift stays tiny).
        CHECK(std::abs(iterate_map(0.3, 1, tent) - 0.6) <= 1e-15);
        CHECK(std::abs(iterate_map(0.3, 2, tent) - 0.8) <= 1e-15);
        CHECK(std::abs(iterate_map(0.3, 3, tent) - 0.4) <= 1e-15);
    }
    SUBCASE("Logistic from 0.2") {
        const auto logistic = ChaoticMapSpec::defaults(MapKind::Logistic);
        double x = 0.2;
        x = 3.99 * x * (1.0 - x);
        CHECK(iterate_map(0.2, 1, logistic) == doctest::Approx(0.6384).epsilon(1e-14));
        CHECK(iterate_map(0.2, 1, logistic) == x);
        x = 3.99 * x * (1.0 - x);
        CHECK(iterate_map(0.2, 2, logistic) == x);
        CHECK(std::abs(x - 0.9210733) <= 5e-8);
    }
    SUBCASE("the initial state is clamped to [eps, 1-eps]") {
        CHECK(iterate_map(0.0, 1, tent) == doctest::Approx(2.0 * tent.epsilon).epsilon(1e-12));
        CHECK(iterate_map(1.0, 1, tent) == doctest::Approx(2.0 * tent.epsilon).epsilon(1e-9));
        CHECK(iterate_map(0.0, 1, tent) > 0.0);
    }
    SUBCASE("k below one is rejected") { CHECK_THROWS_AS(iterate_map(0.3, 0, tent), ContractError); }
}

TEST_CASE("reclamping keeps Tent orbits off the absorbing zero") {
    auto spec = ChaoticMapSpec::defaults(MapKind::Tent);
    // 0.5 -> 1 -> 0 without reclamping; the initial clamp does not touch 0.5.
    CHECK(iterate_map(0.5, 2, spec) == 0.0);
    spec.reclamp_each_step = true;
    const double x = iterate_map(0.5, 2, spec);
    CHECK(x == doctest::Approx(2.0 * spec.epsilon).epsilon(1e-9));
}

TEST_CASE("chaotic_transform examples") {
    const auto tent = ChaoticMapSpec::defaults(MapKind::Tent);
    SUBCASE("constant 2/3 is a fixed image") {
        const ImageTensor img(3, 4, 4, 2.0 / 3.0);
        for (int k = 1; k <= 5; ++k) {
            const ImageTensor out = chaotic_transform(img, k, tent);
            // The double nearest 2/3 is repelled at rate 2 per step.
            for (double v : out.pixels()) CHECK(std::abs(v - 2.0 / 3.0) <= k * 1e-15);
        }
    }
    SUBCASE("constant 0.3, k=3 gives constant 0.4") {
        const ImageTensor out = chaotic_transform(ImageTensor(3, 5, 5, 0.3), 3, tent);
        for (double v : out.pixels()) CHECK(std::abs(v - 0.4) <= 1e-15);
    }
    SUBCASE("repeat calls are bit-identical, output stays in [0,1]") {
        Rng rng(11);
        const ImageTensor img = testutil::random_image(3, 8, 8, rng);
        for (MapKind kind : {MapKind::Logistic, MapKind::Tent, MapKind::Sine}) {
            const auto spec = ChaoticMapSpec::defaults(kind);
            const ImageTensor a = chaotic_transform(img, 4, spec);
            const ImageTensor b = chaotic_transform(img, 4, spec);
            CHECK(std::memcmp(a.pixels().data(), b.pixels().data(), a.size() * sizeof(double)) == 0);
            CHECK(a.in_unit_range());
        }
    }
    SUBCASE("k outside the configured range is rejected") {
        CHECK_THROWS_AS(chaotic_transform(ImageTensor(1, 2, 2, 0.5), 6, tent), ContractError);
        CHECK_THROWS_AS(chaotic_transform(ImageTensor(1, 2, 2, 0.5), 0, tent), ContractError);
    }
}

TEST_CASE("sample_k") {
    SUBCASE("degenerate range") {
        auto spec = ChaoticMapSpec::defaults(MapKind::Tent);
        spec.k_min = spec.k_max = 3;
        Rng rng(1);
        for (int i = 0; i < 100; ++i) CHECK(sample_k(rng, spec) == 3);
    }
    SUBCASE("default range is uniform over {1..5}") {
        const auto spec = ChaoticMapSpec::defaults(MapKind::Tent);
        Rng rng(12345);
        std::array<int, 5> counts{};
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const int k = sample_k(rng, spec);
            REQUIRE(k >= 1);
            REQUIRE(k <= 5);
            ++counts[static_cast<std::size_t>(k - 1)];
        }
        double chi2 = 0.0;
        for (int c : counts) {
            const double f = static_cast<double>(c) / n;
            CHECK(std::abs(f - 0.2) <= 0.01);
            chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
        }
        // 4 degrees of freedom, 0.999 quantile 18.47.
        CHECK(chi2 < 18.47);
    }
    SUBCASE("seeded streams reproduce") {
        const auto spec = ChaoticMapSpec::defaults(MapKind::Sine);
        Rng a(99), b(99);
        for (int i = 0; i < 50; ++i) CHECK(sample_k(a, spec) == sample_k(b, spec));
    }
}

TEST_CASE("sensitivity_probe") {
    const auto logistic = ChaoticMapSpec::defaults(MapKind::Logistic);
    SUBCASE("zero delta gives a zero series") {
        for (double g : sensitivity_probe(0.37, 0.0, 40, logistic)) CHECK(g == 0.0);
        for (double g : sensitivity_probe(2.0 / 3.0, 0.0, 40, ChaoticMapSpec::defaults(MapKind::Tent))) CHECK(g == 0.0);
    }
    SUBCASE("Logistic orbits separate for most starting points") {
        Rng rng(2024);
        std::uniform_real_distribution<double> x0(0.01, 0.99);
        int diverged = 0;
        for (int i = 0; i < 100; ++i) {
            const auto gaps = sensitivity_probe(x0(rng), 1e-8, 50, logistic);
            CHECK(gaps.size() == 50);
            diverged += gaps.back() > 0.01 || *std::max_element(gaps.begin(), gaps.end()) > 0.01;
        }
        CHECK(diverged >= 90);
    }
}

TEST_CASE("spec validation") {
    auto spec = ChaoticMapSpec::defaults(MapKind::Tent);
    spec.epsilon = 0.0;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = ChaoticMapSpec::defaults(MapKind::Tent);
    spec.k_min = 4;
    spec.k_max = 2;
    CHECK_THROWS_AS(spec.validate(), ContractError);
}
