#pragma once

#include <cstdint>
#include <vector>

#include "chaosssl/finetune.hpp"
#include "chaosssl/nn.hpp"
#include "chaosssl/optim.hpp"

namespace chaosssl {

// max(8, (d1 + d2) / 16).
std::size_t reduced_dim(std::size_t concat_dim);

// Two backbones, a squeeze-and-excite gate over their concatenated features
// and a linear classifier on the gated features.
struct FusionModel {
    Mlp backbone1;   // generalist ("large")
    Mlp backbone2;   // specialist ("tiny")
    Tensor w1;       // [d_r × (d1+d2)], no bias
    Tensor w2;       // [(d1+d2) × d_r], no bias
    Tensor w_class;  // [M × (d1+d2)]
    Tensor b_class;  // [M]

    // New head parameters are uniform in ±1/sqrt(fan_in); backbones are used as given.
    static FusionModel assemble(Mlp backbone1, Mlp backbone2, std::size_t num_classes, Rng& rng);

    std::size_t concat_dim() const;
    std::size_t num_classes() const { return w_class.rows(); }
    void validate() const;

    // [f1, f2] per row, f1 first.
    Tensor extract_concat(const Tensor& batch) const;
    // σ(W2 · ReLU(W1 · f)) per row; every entry in (0,1).
    Tensor se_attention(const Tensor& f_concat) const;
    // W_class (f ⊙ w_attn) + b_class.
    Tensor forward(const Tensor& batch) const;

    std::vector<Tensor> backbone_parameters() const;
    std::vector<Tensor> head_parameters() const;
    NamedTensors named_parameters() const;
    static FusionModel from_named(const NamedTensors& tensors);
};

struct FusionTrainConfig {
    int epochs = 10;
    double lr_backbone = 1e-6;
    double lr_head = 1e-4;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    AdamWHyper adamw{};

    void validate() const;
};

struct FusionHistory {
    std::vector<double> epoch_losses;
};

// Cross-entropy with AdamW groups {backbones @ lr_backbone, head @ lr_head},
// constant learning rates.
FusionHistory train_fusion(FusionModel& model, const LabeledImages& data, const FusionTrainConfig& cfg);

std::vector<int> predict(const FusionModel& model, std::span<const ImageTensor> images, std::size_t chunk = 256);

}  // namespace chaosssl
