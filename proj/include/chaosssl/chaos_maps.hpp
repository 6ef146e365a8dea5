#pragma once

#include <string>
#include <vector>

#include "chaosssl/image.hpp"

namespace chaosssl {

enum class MapKind { Logistic, Tent, Sine };

std::string to_string(MapKind kind);
// Accepts "logistic", "tent", "sine" (case-insensitive).
MapKind parse_map_kind(const std::string& name);

struct ChaoticMapSpec {
    MapKind kind = MapKind::Tent;
    double param = 2.0;  // r for Logistic/Sine, mu for Tent
    double epsilon = 1e-6;
    int k_min = 1;
    int k_max = 5;
    // Off: only the initial state is clamped to [eps, 1-eps]. On: the state is
    // clamped again after every step (keeps Tent away from its absorbing 0).
    bool reclamp_each_step = false;

    // Logistic r=3.99, Tent mu=2.0, Sine r=1.0; eps 1e-6; k in [1,5].
    static ChaoticMapSpec defaults(MapKind kind);

    // Throws ContractError on eps outside (0, 0.5) or a bad k range.
    void validate() const;
};

// One application of the map. Throws DomainError for x outside [0,1].
double map_step(double x, const ChaoticMapSpec& spec);

// Clamps x0 to [eps, 1-eps], then applies the map k times.
double iterate_map(double x0, int k, const ChaoticMapSpec& spec);

// Pixel-wise iterate_map over every channel. k must lie in [k_min, k_max].
ImageTensor chaotic_transform(const ImageTensor& img, int k, const ChaoticMapSpec& spec);

// Uniform integer on {k_min, ..., k_max}.
int sample_k(Rng& rng, const ChaoticMapSpec& spec);

// |orbit(x0) - orbit(x0 + delta)| after each of n unclamped steps.
std::vector<double> sensitivity_probe(double x0, double delta, int n, const ChaoticMapSpec& spec);

}  // namespace chaosssl
