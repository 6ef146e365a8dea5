#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaosssl/augment.hpp"
#include "chaosssl/chaos_maps.hpp"
#include "chaosssl/nn.hpp"
#include "chaosssl/optim.hpp"

namespace chaosssl {

inline constexpr std::size_t kProjectionDim = 128;

// Affine+ReLU stack: input_dim -> hidden_dims... -> feature_dim.
struct EncoderSpec {
    std::size_t input_dim = 3 * 32 * 32;
    std::vector<std::size_t> hidden_dims{256, 128};
    std::size_t feature_dim = 64;

    static EncoderSpec tiny(std::size_t input_dim);
    static EncoderSpec large(std::size_t input_dim);

    std::vector<std::size_t> widths() const;
    void validate() const;
};

// Three affine layers with ReLU between them and a linear 128-wide output.
struct ProjectorSpec {
    std::vector<std::size_t> layer_dims{256, 256, kProjectionDim};

    // Narrower output for gradient checks; production configs always end in 128.
    static ProjectorSpec reduced_for_tests(std::vector<std::size_t> dims);
    void validate() const;

private:
    bool fixed_output_ = true;
};

Mlp make_encoder(const EncoderSpec& spec, Rng& rng);

struct ContrastiveModel {
    Mlp encoder;
    Mlp projector;

    static ContrastiveModel random(const EncoderSpec& enc, const ProjectorSpec& proj, Rng& rng);

    Tensor encode(const Tensor& batch) const;
    Tensor encode(std::span<const ImageTensor> images) const;
    Tensor project(const Tensor& features) const;
};

// Partner index for every row: i <-> i + N for a [2N × D] batch laid out as
// all first views, then all second views.
std::vector<std::size_t> standard_pairing(std::size_t n_pairs);

// Throws ContractError unless pairing is a fixed-point-free involution over
// 'rows' rows and rows is even.
void validate_pairing(std::span<const std::size_t> pairing, std::size_t rows);

// Mean over rows of -log(exp(s_ij/τ) / Σ_{k≠i} exp(s_ik/τ)), s = cosine
// similarity, j = pairing[i]. Differentiable w.r.t. z.
Tensor nt_xent_loss(const Tensor& z, std::span<const std::size_t> pairing, double temperature);

// The same loss as a plain double loop over every pair of rows.
double nt_xent_oracle(const Tensor& z, std::span<const std::size_t> pairing, double temperature);

struct PretrainConfig {
    int epochs = 30;
    std::size_t batch_size = 64;
    double temperature = 0.5;
    double lr_encoder = 1e-3;
    double lr_projector = 1e-3;
    std::uint64_t seed = 0;
    AdamWHyper adamw{};

    void validate() const;
};

struct PretrainResult {
    Mlp encoder;                       // projector is dropped
    std::vector<double> batch_losses;  // one per optimizer step
    std::vector<double> epoch_losses;  // mean batch loss per epoch
};

// SimCLR-style loop: views -> encode -> project -> NT-Xent -> AdamW with
// groups {encoder @ lr_encoder, projector @ lr_projector}. The last partial
// batch of every epoch is dropped. Takes ownership of the model parameters.
PretrainResult pretrain(std::span<const ImageTensor> images, const AugmentConfig& aug, const ChaoticMapSpec& map,
                        const PretrainConfig& cfg, ContrastiveModel model);

}  // namespace chaosssl
