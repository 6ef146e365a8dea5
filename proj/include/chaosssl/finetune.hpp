#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaosssl/nn.hpp"
#include "chaosssl/optim.hpp"

namespace chaosssl {

struct LabeledImages {
    std::span<const ImageTensor> images;
    std::span<const int> labels;
    std::size_t num_classes = 0;

    void validate() const;
};

// Linear classifier C(f) = W f + b over d-wide features, M >= 2 classes.
struct ClassifierHead {
    Linear layer;

    static ClassifierHead random(std::size_t feature_dim, std::size_t num_classes, Rng& rng);
    std::size_t num_classes() const { return layer.out_features(); }
    std::size_t feature_dim() const { return layer.in_features(); }
    Tensor forward(const Tensor& features) const { return layer.forward(features); }
};

// Encoder followed by a linear head.
struct Classifier {
    Mlp encoder;
    ClassifierHead head;

    Tensor logits(const Tensor& batch) const { return head.forward(encoder.forward(batch)); }
    NamedTensors named_parameters() const;
};

struct FinetuneConfig {
    int epochs = 10;
    double lr_max = 1e-3;
    double lr_min = 0.0;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    AdamWHyper adamw{};

    void validate() const;
};

struct FinetuneHistory {
    std::vector<double> epoch_losses;
    std::vector<double> epoch_lrs;
    std::vector<double> epoch_running_accuracy;  // from the training-batch logits
};

// One-hot [B×M] label matrix.
Tensor one_hot(std::span<const int> labels, std::size_t num_classes);

// Mean over the batch of -Σ_c y_c log softmax(logits)_c. Throws
// ContractError if a label row is not one-hot.
Tensor cross_entropy(const Tensor& logits, const Tensor& labels_one_hot);
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

// η_min + ½(η_max − η_min)(1 + cos(π t / T_max)), for 0 <= t <= T_max.
double cosine_annealing_lr(double t, double t_max, double lr_max, double lr_min);

// Row-wise argmax; ties go to the lowest class index.
std::vector<int> argmax_rows(const Tensor& logits);
std::vector<int> predict(const Classifier& model, std::span<const ImageTensor> images, std::size_t chunk = 256);

// Trains every parameter (encoder and head) with AdamW; the learning rate
// follows the cosine schedule, updated once per epoch.
FinetuneHistory finetune(Classifier& model, const LabeledImages& data, const FinetuneConfig& cfg);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace chaosssl
