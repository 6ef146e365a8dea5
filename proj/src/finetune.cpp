#include "chaosssl/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {
constexpr std::uint64_t kShuffleStream = 0x4654;
}

void LabeledImages::validate() const {
    if (images.empty()) throw ContractError("labeled dataset is empty");
    if (images.size() != labels.size()) throw ContractError("image and label counts differ");
    if (num_classes < 2) throw ContractError("need at least two classes");
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw ContractError("label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
}

ClassifierHead ClassifierHead::random(std::size_t feature_dim, std::size_t num_classes, Rng& rng) {
    if (num_classes < 2) throw ContractError("a classifier head needs at least two classes");
    return {Linear::random(feature_dim, num_classes, rng)};
}

NamedTensors Classifier::named_parameters() const {
    auto out = encoder.named_parameters("encoder");
    out.emplace_back("head.weight", head.layer.weight);
    out.emplace_back("head.bias", head.layer.bias);
    return out;
}

void FinetuneConfig::validate() const {
    if (epochs < 0) throw ContractError("epochs must be nonnegative");
    if (batch_size < 1) throw ContractError("batch size must be at least 1");
    if (lr_min > lr_max) throw ContractError("lr_min must not exceed lr_max");
    if (lr_min < 0.0) throw ContractError("learning rates must be nonnegative");
}

Tensor one_hot(std::span<const int> labels, std::size_t num_classes) {
    if (labels.empty()) throw ContractError("no labels");
    std::vector<double> data(labels.size() * num_classes, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw ContractError("label out of range");
        }
        data[i * num_classes + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return Tensor::from({labels.size(), num_classes}, std::move(data));
}

Tensor cross_entropy(const Tensor& logits, const Tensor& labels_one_hot) {
    if (logits.dim() != 2 || logits.shape() != labels_one_hot.shape()) {
        throw DimensionError("cross_entropy: logits " + shape_str(logits.shape()) + " vs labels " +
                             shape_str(labels_one_hot.shape()));
    }
    const std::size_t m = logits.cols();
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        int ones = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double y = labels_one_hot.at(i, j);
            if (y == 1.0) ++ones;
            else if (y != 0.0) ones = -1000;
        }
        if (ones != 1) throw ContractError("label row " + std::to_string(i) + " is not one-hot");
    }
    const Tensor picked = sum(mul(log_softmax(logits), labels_one_hot));
    return scale(picked, -1.0 / static_cast<double>(logits.rows()));
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
    if (logits.dim() != 2) throw DimensionError("cross_entropy expects [B×M] logits");
    return cross_entropy(logits, one_hot(labels, logits.cols()));
}

double cosine_annealing_lr(double t, double t_max, double lr_max, double lr_min) {
    if (!(t_max > 0.0)) throw ContractError("T_max must be positive");
    if (t < 0.0 || t > t_max) throw ContractError("schedule step outside [0, T_max]");
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * (t / t_max)));
}

std::vector<int> argmax_rows(const Tensor& logits) {
    const std::size_t m = logits.rows(), n = logits.cols();
    std::vector<int> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        out[i] = static_cast<int>(best);
    }
    return out;
}

std::vector<int> predict(const Classifier& model, std::span<const ImageTensor> images, std::size_t chunk) {
    std::vector<int> out;
    out.reserve(images.size());
    for (std::size_t start = 0; start < images.size(); start += chunk) {
        const auto part = images.subspan(start, std::min(chunk, images.size() - start));
        const auto pred = argmax_rows(model.logits(images_to_batch(part)));
        out.insert(out.end(), pred.begin(), pred.end());
    }
    return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size() || truth.empty()) throw ContractError("accuracy needs matching, nonempty inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

FinetuneHistory finetune(Classifier& model, const LabeledImages& data, const FinetuneConfig& cfg) {
    cfg.validate();
    data.validate();
    if (model.head.num_classes() != data.num_classes) {
        throw ContractError("head has " + std::to_string(model.head.num_classes()) + " classes, labels have " +
                            std::to_string(data.num_classes));
    }
    if (model.head.feature_dim() != model.encoder.output_dim()) {
        throw ContractError("encoder output width does not match the head input");
    }

    std::vector<ParamGroup> groups{{"encoder", model.encoder.parameters(), cfg.lr_max},
                                   {"head", {model.head.layer.weight, model.head.layer.bias}, cfg.lr_max}};
    AdamWState state{cfg.adamw, {}, {}, 0};
    FinetuneHistory history;

    std::vector<std::size_t> order(data.images.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_annealing_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);
        for (auto& g : groups) g.lr = lr;

        std::iota(order.begin(), order.end(), 0);
        Rng rng = derive_rng(cfg.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        double loss_total = 0.0;
        std::size_t hits = 0, batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
            std::vector<int> labels;
            labels.reserve(idx.size());
            for (auto i : idx) labels.push_back(data.labels[i]);

            zero_grad(groups);
            const Tensor logits = model.logits(images_to_batch(data.images, idx));
            const Tensor loss = cross_entropy(logits, labels);
            backward(loss);
            adamw_step(groups, state);

            const auto pred = argmax_rows(logits);
            for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
            loss_total += loss.item();
            ++batches;
        }
        history.epoch_losses.push_back(loss_total / static_cast<double>(batches));
        history.epoch_lrs.push_back(lr);
        history.epoch_running_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(order.size()));
    }
    return history;
}

}  // namespace chaosssl
