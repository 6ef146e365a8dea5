#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaosssl/image.hpp"
#include "chaosssl/tensor.hpp"

namespace chaosssl {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Affine layer y = x Wᵀ + b with W stored [out×in].
struct Linear {
    Tensor weight;
    Tensor bias;

    // Weights and biases uniform in ±1/sqrt(in).
    static Linear random(std::size_t in, std::size_t out, Rng& rng);
    static Linear zeros(std::size_t in, std::size_t out);

    std::size_t in_features() const { return weight.cols(); }
    std::size_t out_features() const { return weight.rows(); }
    Tensor forward(const Tensor& x) const { return linear(x, weight, bias); }
};

// Stack of affine layers with ReLU between them, and optionally after the last.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<Linear> layers, bool relu_on_output);

    static Mlp random(std::size_t input_dim, const std::vector<std::size_t>& widths, bool relu_on_output, Rng& rng);
    static Mlp zeros(std::size_t input_dim, const std::vector<std::size_t>& widths, bool relu_on_output);

    Tensor forward(const Tensor& x) const;

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    bool relu_on_output() const noexcept { return relu_on_output_; }
    const std::vector<Linear>& layers() const noexcept { return layers_; }

    std::vector<Tensor> parameters() const;
    // "<prefix>.<layer>.weight" / "<prefix>.<layer>.bias".
    NamedTensors named_parameters(const std::string& prefix) const;
    // Rebuilds the layer stack from named_parameters() output.
    static Mlp from_named(const NamedTensors& tensors, const std::string& prefix, bool relu_on_output);

    // Independent copy of all parameters.
    Mlp clone() const;

private:
    std::vector<Linear> layers_;
    bool relu_on_output_ = false;
};

// Fixed input normalization, mean 0.5 and std 0.5: [0,1] pixels become [-1,1].
inline double to_model_input(double pixel) { return (pixel - 0.5) / 0.5; }

// Stacks flattened, normalized images into a [B × C·H·W] constant tensor.
Tensor images_to_batch(std::span<const ImageTensor> images);
Tensor images_to_batch(std::span<const ImageTensor> images, std::span<const std::size_t> indices);

bool bit_identical(const Tensor& a, const Tensor& b);

}  // namespace chaosssl
