#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "chaosssl/augment.hpp"
#include "chaosssl/chaos_maps.hpp"
#include "chaosssl/contrastive.hpp"
#include "chaosssl/dataset.hpp"
#include "chaosssl/finetune.hpp"
#include "chaosssl/fusion.hpp"

namespace chaosssl {

// Everything a pipeline run depends on. Sub-seeds of every stage are derived
// from the single global seed.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "chaosssl-run";

    MapKind map_kind = MapKind::Tent;
    std::optional<double> map_param;  // unset: the kind's default
    double map_epsilon = 1e-6;
    int k_min = 1;
    int k_max = 5;
    bool reclamp_each_step = false;

    AugmentConfig augment{};
    TextureDatasetSpec dataset{};
    std::vector<std::size_t> tiny_hidden{256, 128};
    std::size_t tiny_feature_dim = 64;
    std::vector<std::size_t> large_hidden{512, 256};
    std::size_t large_feature_dim = 128;
    ProjectorSpec projector{};
    AdamWHyper adamw{};
    PretrainConfig pretrain{};
    FinetuneConfig finetune_tiny{};
    FinetuneConfig finetune_large{};
    FusionTrainConfig fusion{};
    // Also fine-tune the tiny encoder from its pre-SSL initialization.
    bool baseline = true;

    ExperimentConfig();

    ChaoticMapSpec map_spec() const;
    EncoderSpec tiny_encoder() const;
    EncoderSpec large_encoder() const;

    // Sub-seeds for dataset generation, initializations and shuffling.
    std::uint64_t stage_seed(std::uint64_t tag) const;
    // Copies seed and AdamW settings into the per-stage configs.
    void propagate();
    void validate() const;
};

// Flat YAML document, one section per stage; absent keys keep their defaults
// and unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& yaml_text);
// The defaults as an annotated YAML document.
std::string default_config_yaml();

// Canonical JSON rendering (used for hashing and reports).
std::string config_json(const ExperimentConfig& cfg);
// Hex SHA-256 of config_json.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace chaosssl
