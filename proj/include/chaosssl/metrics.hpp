#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace chaosssl {

// rows = true class, columns = predicted class
using ConfusionMatrix = std::vector<std::vector<std::int64_t>>;

struct MetricsReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    ConfusionMatrix confusion;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes);

// accuracy = trace / total. Per-class F1 = 2PR/(P+R), taken as 0 when P+R = 0
// (including a class that never occurs in truth or prediction); macro-F1 is
// the unweighted mean over all classes. Throws ContractError on an empty or
// non-square matrix.
MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion);

MetricsReport evaluate(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes);

}  // namespace chaosssl
