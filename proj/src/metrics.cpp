#include "chaosssl/metrics.hpp"

#include "chaosssl/errors.hpp"

namespace chaosssl {

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes) {
    if (truth.size() != predicted.size()) throw ContractError("truth and prediction counts differ");
    ConfusionMatrix cm(num_classes, std::vector<std::int64_t>(num_classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = static_cast<std::size_t>(truth[i]);
        const auto p = static_cast<std::size_t>(predicted[i]);
        if (truth[i] < 0 || predicted[i] < 0 || t >= num_classes || p >= num_classes) {
            throw ContractError("class index outside [0, " + std::to_string(num_classes) + ")");
        }
        ++cm[t][p];
    }
    return cm;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion) {
    const std::size_t m = confusion.size();
    if (m == 0) throw ContractError("empty confusion matrix");
    std::int64_t total = 0, diagonal = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (confusion[i].size() != m) throw ContractError("confusion matrix must be square");
        for (std::size_t j = 0; j < m; ++j) {
            if (confusion[i][j] < 0) throw ContractError("negative confusion count");
            total += confusion[i][j];
        }
        diagonal += confusion[i][i];
    }
    if (total == 0) throw ContractError("cannot score an empty evaluation set");

    double f1_sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        std::int64_t predicted = 0, actual = 0;
        for (std::size_t k = 0; k < m; ++k) {
            predicted += confusion[k][c];
            actual += confusion[c][k];
        }
        const double tp = static_cast<double>(confusion[c][c]);
        const double precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
        const double recall = actual ? tp / static_cast<double>(actual) : 0.0;
        if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
    }

    return {static_cast<double>(diagonal) / static_cast<double>(total), f1_sum / static_cast<double>(m), confusion};
}

MetricsReport evaluate(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes) {
    if (truth.empty()) throw ContractError("cannot evaluate on an empty test set");
    return metrics_from_confusion(confusion_matrix(truth, predicted, num_classes));
}

}  // namespace chaosssl
