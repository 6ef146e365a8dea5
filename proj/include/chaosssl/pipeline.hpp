#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chaosssl/checkpoint.hpp"
#include "chaosssl/config.hpp"
#include "chaosssl/fusion.hpp"
#include "chaosssl/metrics.hpp"

namespace chaosssl {

// File layout of one run under ExperimentConfig::output_dir.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path data() const { return root / "data"; }
    std::filesystem::path encoder_init() const { return root / "stage1_encoder_init.ckpt"; }
    std::filesystem::path ssl_encoder() const { return root / "stage1_encoder.ckpt"; }
    std::filesystem::path tiny() const { return root / "stage2_tiny.ckpt"; }
    std::filesystem::path large() const { return root / "stage2_large.ckpt"; }
    std::filesystem::path tiny_baseline() const { return root / "stage2_tiny_baseline.ckpt"; }
    std::filesystem::path fusion() const { return root / "stage3_fusion.ckpt"; }
    std::filesystem::path metrics() const { return root / "metrics.json"; }
};

struct PipelineReport {
    MetricsReport fusion;
    MetricsReport tiny;   // fine-tuned from the SSL encoder
    MetricsReport large;  // fine-tuned from random init
    std::optional<MetricsReport> tiny_baseline;  // tiny encoder fine-tuned without SSL
    std::vector<double> pretrain_epoch_losses;
    std::string map_kind;
    std::string config_hash;
    std::uint64_t seed = 0;

    // accuracy, macro_f1, confusion (fusion model), config_hash, seed, plus
    // per-stage metrics.
    std::string to_json() const;
};

// Checkpoint <-> model helpers.
Checkpoint encoder_checkpoint(const Mlp& encoder, std::map<std::string, std::string> metadata);
Mlp encoder_from_checkpoint(const Checkpoint& ckpt);
Checkpoint classifier_checkpoint(const Classifier& model, std::map<std::string, std::string> metadata);
Classifier classifier_from_checkpoint(const Checkpoint& ckpt);
Checkpoint fusion_checkpoint(const FusionModel& model, std::map<std::string, std::string> metadata);
FusionModel fusion_from_checkpoint(const Checkpoint& ckpt);

MetricsReport evaluate(const Classifier& model, const Dataset& test);
MetricsReport evaluate(const FusionModel& model, const Dataset& test);

// Individual stages. Each reads its inputs from and writes its outputs to
// cfg.output_dir; failures surface as StageError tagged with the stage name.
void stage_gen_data(const ExperimentConfig& cfg);
std::vector<double> stage_pretrain(const ExperimentConfig& cfg);
void stage_finetune(const ExperimentConfig& cfg);
void stage_fuse(const ExperimentConfig& cfg);
PipelineReport stage_evaluate(const ExperimentConfig& cfg);

// All stages in order. stage_evaluate writes metrics.json.
PipelineReport run_pipeline(const ExperimentConfig& cfg);

}  // namespace chaosssl
