#include "chaosssl/chaos_maps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "chaosssl/errors.hpp"

namespace chaosssl {

std::string to_string(MapKind kind) {
    switch (kind) {
        case MapKind::Logistic: return "logistic";
        case MapKind::Tent: return "tent";
        case MapKind::Sine: return "sine";
    }
    return "unknown";
}

MapKind parse_map_kind(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "logistic") return MapKind::Logistic;
    if (lower == "tent") return MapKind::Tent;
    if (lower == "sine") return MapKind::Sine;
    throw ContractError("unknown chaotic map '" + name + "' (expected logistic, tent or sine)");
}

ChaoticMapSpec ChaoticMapSpec::defaults(MapKind kind) {
    ChaoticMapSpec spec;
    spec.kind = kind;
    switch (kind) {
        case MapKind::Logistic: spec.param = 3.99; break;
        case MapKind::Tent: spec.param = 2.0; break;
        case MapKind::Sine: spec.param = 1.0; break;
    }
    return spec;
}

void ChaoticMapSpec::validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw ContractError("map epsilon must lie in (0, 0.5)");
    if (k_min < 1) throw ContractError("k_min must be at least 1");
    if (k_min > k_max) throw ContractError("k_min must not exceed k_max");
}

double map_step(double x, const ChaoticMapSpec& spec) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("map input " + std::to_string(x) + " outside [0,1]");
    switch (spec.kind) {
        case MapKind::Logistic: return spec.param * x * (1.0 - x);
        case MapKind::Tent: return spec.param * std::min(x, 1.0 - x);
        case MapKind::Sine: return spec.param * std::sin(std::numbers::pi * x);
    }
    return x;
}

double iterate_map(double x0, int k, const ChaoticMapSpec& spec) {
    if (k < 1) throw ContractError("iteration count must be positive");
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("map input " + std::to_string(x0) + " outside [0,1]");
    const double lo = spec.epsilon;
    const double hi = 1.0 - spec.epsilon;
    double x = std::clamp(x0, lo, hi);
    for (int i = 0; i < k; ++i) {
        x = map_step(x, spec);
        if (spec.reclamp_each_step) x = std::clamp(x, lo, hi);
    }
    return x;
}

ImageTensor chaotic_transform(const ImageTensor& img, int k, const ChaoticMapSpec& spec) {
    if (k < spec.k_min || k > spec.k_max) {
        throw ContractError("k=" + std::to_string(k) + " outside [" + std::to_string(spec.k_min) + ", " +
                            std::to_string(spec.k_max) + "]");
    }
    ImageTensor out = img;
    for (double& v : out.pixels()) v = iterate_map(v, k, spec);
    return out;
}

int sample_k(Rng& rng, const ChaoticMapSpec& spec) {
    if (spec.k_min > spec.k_max) throw ContractError("k_min must not exceed k_max");
    return std::uniform_int_distribution<int>(spec.k_min, spec.k_max)(rng);
}

std::vector<double> sensitivity_probe(double x0, double delta, int n, const ChaoticMapSpec& spec) {
    std::vector<double> distances;
    distances.reserve(static_cast<std::size_t>(std::max(n, 0)));
    double a = x0;
    double b = x0 + delta;
    for (int i = 0; i < n; ++i) {
        a = map_step(a, spec);
        b = map_step(b, spec);
        distances.push_back(std::abs(a - b));
    }
    return distances;
}

}  // namespace chaosssl
