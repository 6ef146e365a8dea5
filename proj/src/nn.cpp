#include "chaosssl/nn.hpp"

#include <cmath>
#include <cstring>

#include "chaosssl/errors.hpp"

namespace chaosssl {

Linear Linear::random(std::size_t in, std::size_t out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(in * out), b(out);
    for (double& v : w) v = dist(rng);
    for (double& v : b) v = dist(rng);
    return {Tensor::from({out, in}, std::move(w), true), Tensor::from({out}, std::move(b), true)};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
    return {Tensor::zeros({out, in}, true), Tensor::zeros({out}, true)};
}

Mlp::Mlp(std::vector<Linear> layers, bool relu_on_output) : layers_(std::move(layers)), relu_on_output_(relu_on_output) {
    if (layers_.empty()) throw ContractError("an MLP needs at least one layer");
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        if (layers_[i].in_features() != layers_[i - 1].out_features()) {
            throw DimensionError("MLP layer " + std::to_string(i) + " input width does not match previous output");
        }
    }
}

Mlp Mlp::random(std::size_t input_dim, const std::vector<std::size_t>& widths, bool relu_on_output, Rng& rng) {
    std::vector<Linear> layers;
    std::size_t in = input_dim;
    for (auto w : widths) {
        if (w == 0) throw ContractError("layer widths must be positive");
        layers.push_back(Linear::random(in, w, rng));
        in = w;
    }
    return Mlp(std::move(layers), relu_on_output);
}

Mlp Mlp::zeros(std::size_t input_dim, const std::vector<std::size_t>& widths, bool relu_on_output) {
    std::vector<Linear> layers;
    std::size_t in = input_dim;
    for (auto w : widths) {
        layers.push_back(Linear::zeros(in, w));
        in = w;
    }
    return Mlp(std::move(layers), relu_on_output);
}

Tensor Mlp::forward(const Tensor& x) const {
    if (x.dim() != 2 || x.cols() != input_dim()) {
        throw DimensionError("MLP expects input width " + std::to_string(input_dim()) + ", got " +
                             shape_str(x.shape()));
    }
    Tensor h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = layers_[i].forward(h);
        if (i + 1 < layers_.size() || relu_on_output_) h = relu(h);
    }
    return h;
}

std::size_t Mlp::input_dim() const { return layers_.front().in_features(); }
std::size_t Mlp::output_dim() const { return layers_.back().out_features(); }

std::vector<Tensor> Mlp::parameters() const {
    std::vector<Tensor> out;
    for (const auto& l : layers_) {
        out.push_back(l.weight);
        out.push_back(l.bias);
    }
    return out;
}

NamedTensors Mlp::named_parameters(const std::string& prefix) const {
    NamedTensors out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string base = prefix + "." + std::to_string(i);
        out.emplace_back(base + ".weight", layers_[i].weight);
        out.emplace_back(base + ".bias", layers_[i].bias);
    }
    return out;
}

Mlp Mlp::from_named(const NamedTensors& tensors, const std::string& prefix, bool relu_on_output) {
    auto lookup = [&](const std::string& name) -> const Tensor* {
        for (const auto& [n, t] : tensors)
            if (n == name) return &t;
        return nullptr;
    };
    std::vector<Linear> layers;
    for (std::size_t i = 0;; ++i) {
        const std::string base = prefix + "." + std::to_string(i);
        const Tensor* w = lookup(base + ".weight");
        const Tensor* b = lookup(base + ".bias");
        if (!w && !b) break;
        if (!w || !b) throw ContractError("incomplete layer '" + base + "'");
        if (w->dim() != 2 || b->dim() != 1 || b->numel() != w->rows()) {
            throw DimensionError("layer '" + base + "' has inconsistent shapes");
        }
        layers.push_back({w->clone(), b->clone()});
        layers.back().weight.set_requires_grad(true);
        layers.back().bias.set_requires_grad(true);
    }
    if (layers.empty()) throw ContractError("no layers with prefix '" + prefix + "'");
    return Mlp(std::move(layers), relu_on_output);
}

Mlp Mlp::clone() const {
    std::vector<Linear> copy;
    for (const auto& l : layers_) copy.push_back({l.weight.clone(), l.bias.clone()});
    return Mlp(std::move(copy), relu_on_output_);
}

Tensor images_to_batch(std::span<const ImageTensor> images) {
    if (images.empty()) throw ContractError("empty image batch");
    const std::size_t dim = images.front().size();
    std::vector<double> data;
    data.reserve(images.size() * dim);
    for (const auto& img : images) {
        if (img.size() != dim) throw DimensionError("images in a batch must share one shape");
        for (double v : img.pixels()) data.push_back(to_model_input(v));
    }
    return Tensor::from({images.size(), dim}, std::move(data));
}

Tensor images_to_batch(std::span<const ImageTensor> images, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ContractError("empty image batch");
    const std::size_t dim = images[indices.front()].size();
    std::vector<double> data;
    data.reserve(indices.size() * dim);
    for (auto i : indices) {
        if (i >= images.size()) throw ContractError("image index out of range");
        if (images[i].size() != dim) throw DimensionError("images in a batch must share one shape");
        for (double v : images[i].pixels()) data.push_back(to_model_input(v));
    }
    return Tensor::from({indices.size(), dim}, std::move(data));
}

bool bit_identical(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(double)) == 0;
}

}  // namespace chaosssl
