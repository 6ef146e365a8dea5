#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chaosssl/tensor.hpp"

namespace chaosssl {

// A named set of parameters sharing one learning rate.
struct ParamGroup {
    std::string name;
    std::vector<Tensor> params;
    double lr = 0.0;
};

struct AdamWHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Moment buffers are laid out group by group, parameter by parameter, in the
// order the groups are passed to adamw_step.
struct AdamWState {
    AdamWHyper hyper;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::uint64_t step = 0;
};

// One decoupled-weight-decay Adam update with bias correction:
//   p <- p - lr * wd * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Throws ContractError when a parameter has no gradient, when a tensor appears
// in more than one group, or when the group layout changed since the last step.
void adamw_step(std::span<ParamGroup> groups, AdamWState& state);

void zero_grad(std::span<ParamGroup> groups);

ParamGroup* find_group(std::span<ParamGroup> groups, const std::string& name);

}  // namespace chaosssl
