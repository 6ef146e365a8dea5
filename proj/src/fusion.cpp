#include "chaosssl/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

constexpr std::uint64_t kShuffleStream = 0x4655;

Tensor uniform_matrix(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> data(rows * cols);
    for (double& v : data) v = dist(rng);
    return Tensor::from({rows, cols}, std::move(data), true);
}

}  // namespace

std::size_t reduced_dim(std::size_t concat_dim) { return std::max<std::size_t>(8, concat_dim / 16); }

FusionModel FusionModel::assemble(Mlp backbone1, Mlp backbone2, std::size_t num_classes, Rng& rng) {
    if (num_classes < 2) throw ContractError("fusion needs at least two classes");
    if (backbone1.input_dim() != backbone2.input_dim()) throw ContractError("backbones must share an input width");
    const std::size_t d = backbone1.output_dim() + backbone2.output_dim();
    const std::size_t dr = reduced_dim(d);
    FusionModel m;
    m.backbone1 = std::move(backbone1);
    m.backbone2 = std::move(backbone2);
    m.w1 = uniform_matrix(dr, d, d, rng);
    m.w2 = uniform_matrix(d, dr, dr, rng);
    m.w_class = uniform_matrix(num_classes, d, d, rng);
    const Tensor bias = uniform_matrix(1, num_classes, d, rng);
    m.b_class = Tensor::from({num_classes}, {bias.data().begin(), bias.data().end()}, true);
    return m;
}

std::size_t FusionModel::concat_dim() const { return backbone1.output_dim() + backbone2.output_dim(); }

void FusionModel::validate() const {
    const std::size_t d = concat_dim();
    if (backbone1.input_dim() != backbone2.input_dim()) throw ContractError("backbones must share an input width");
    if (w1.dim() != 2 || w1.cols() != d || w1.rows() < 1) throw DimensionError("W1 must be [d_r × (d1+d2)]");
    if (w2.dim() != 2 || w2.rows() != d || w2.cols() != w1.rows()) throw DimensionError("W2 must be [(d1+d2) × d_r]");
    if (w_class.dim() != 2 || w_class.cols() != d) throw DimensionError("W_class must be [M × (d1+d2)]");
    if (b_class.dim() != 1 || b_class.numel() != w_class.rows()) throw DimensionError("b_class must be [M]");
}

Tensor FusionModel::extract_concat(const Tensor& batch) const {
    return concat_cols(backbone1.forward(batch), backbone2.forward(batch));
}

Tensor FusionModel::se_attention(const Tensor& f_concat) const {
    return sigmoid(linear(relu(linear(f_concat, w1)), w2));
}

Tensor FusionModel::forward(const Tensor& batch) const {
    const Tensor f = extract_concat(batch);
    const Tensor attended = mul(f, se_attention(f));
    return linear(attended, w_class, b_class);
}

std::vector<Tensor> FusionModel::backbone_parameters() const {
    auto out = backbone1.parameters();
    auto more = backbone2.parameters();
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

std::vector<Tensor> FusionModel::head_parameters() const { return {w1, w2, w_class, b_class}; }

NamedTensors FusionModel::named_parameters() const {
    auto out = backbone1.named_parameters("backbone1");
    auto more = backbone2.named_parameters("backbone2");
    out.insert(out.end(), more.begin(), more.end());
    out.emplace_back("se.w1", w1);
    out.emplace_back("se.w2", w2);
    out.emplace_back("classifier.weight", w_class);
    out.emplace_back("classifier.bias", b_class);
    return out;
}

FusionModel FusionModel::from_named(const NamedTensors& tensors) {
    auto find = [&](const std::string& name) {
        for (const auto& [n, t] : tensors)
            if (n == name) {
                Tensor copy = t.clone();
                copy.set_requires_grad(true);
                return copy;
            }
        throw ContractError("fusion checkpoint lacks tensor '" + name + "'");
    };
    FusionModel m;
    m.backbone1 = Mlp::from_named(tensors, "backbone1", true);
    m.backbone2 = Mlp::from_named(tensors, "backbone2", true);
    m.w1 = find("se.w1");
    m.w2 = find("se.w2");
    m.w_class = find("classifier.weight");
    m.b_class = find("classifier.bias");
    m.validate();
    return m;
}

void FusionTrainConfig::validate() const {
    if (epochs < 0) throw ContractError("epochs must be nonnegative");
    if (batch_size < 1) throw ContractError("batch size must be at least 1");
    if (lr_backbone < 0.0 || lr_head < 0.0) throw ContractError("learning rates must be nonnegative");
}

FusionHistory train_fusion(FusionModel& model, const LabeledImages& data, const FusionTrainConfig& cfg) {
    cfg.validate();
    data.validate();
    model.validate();
    if (model.num_classes() != data.num_classes) throw ContractError("fusion head class count does not match labels");
    if (model.backbone1.input_dim() != data.images.front().size()) {
        throw ContractError("backbone input width does not match the images");
    }

    std::vector<ParamGroup> groups{{"backbones", model.backbone_parameters(), cfg.lr_backbone},
                                   {"head", model.head_parameters(), cfg.lr_head}};
    AdamWState state{cfg.adamw, {}, {}, 0};
    FusionHistory history;

    std::vector<std::size_t> order(data.images.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng = derive_rng(cfg.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        double loss_total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
            std::vector<int> labels;
            labels.reserve(idx.size());
            for (auto i : idx) labels.push_back(data.labels[i]);

            zero_grad(groups);
            const Tensor loss = cross_entropy(model.forward(images_to_batch(data.images, idx)), labels);
            backward(loss);
            adamw_step(groups, state);
            loss_total += loss.item();
            ++batches;
        }
        history.epoch_losses.push_back(loss_total / static_cast<double>(batches));
    }
    return history;
}

std::vector<int> predict(const FusionModel& model, std::span<const ImageTensor> images, std::size_t chunk) {
    std::vector<int> out;
    out.reserve(images.size());
    for (std::size_t start = 0; start < images.size(); start += chunk) {
        const auto part = images.subspan(start, std::min(chunk, images.size() - start));
        const auto pred = argmax_rows(model.forward(images_to_batch(part)));
        out.insert(out.end(), pred.begin(), pred.end());
    }
    return out;
}

}  // namespace chaosssl
