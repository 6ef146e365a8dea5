#include "chaosssl/optim.hpp"

#include <cmath>
#include <unordered_set>

#include "chaosssl/errors.hpp"

namespace chaosssl {

void adamw_step(std::span<ParamGroup> groups, AdamWState& state) {
    std::size_t total = 0;
    std::unordered_set<const void*> seen;
    for (const auto& group : groups) {
        for (const auto& p : group.params) {
            if (!seen.insert(p.handle().get()).second) {
                throw ContractError("parameter appears in more than one group (group '" + group.name + "')");
            }
            if (!p.has_grad()) throw ContractError("missing gradient for a parameter in group '" + group.name + "'");
            ++total;
        }
    }

    if (state.first_moment.empty()) {
        for (const auto& group : groups) {
            for (const auto& p : group.params) {
                state.first_moment.emplace_back(p.numel(), 0.0);
                state.second_moment.emplace_back(p.numel(), 0.0);
            }
        }
    } else if (state.first_moment.size() != total) {
        throw ContractError("optimizer state does not match the parameter groups");
    }

    ++state.step;
    const auto& h = state.hyper;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(h.beta1, t);
    const double bias2 = 1.0 - std::pow(h.beta2, t);

    std::size_t slot = 0;
    for (auto& group : groups) {
        for (auto& p : group.params) {
            auto& m = state.first_moment[slot];
            auto& v = state.second_moment[slot];
            ++slot;
            if (m.size() != p.numel()) throw ContractError("optimizer state shape mismatch");
            double* __restrict values = p.mutable_data().data();
            const double* __restrict grad = p.grad().data();
            double* __restrict mm = m.data();
            double* __restrict vv = v.data();
            const double decay = 1.0 - group.lr * h.weight_decay;
            for (std::size_t i = 0; i < m.size(); ++i) {
                const double g = grad[i];
                mm[i] = h.beta1 * mm[i] + (1.0 - h.beta1) * g;
                vv[i] = h.beta2 * vv[i] + (1.0 - h.beta2) * g * g;
                const double m_hat = mm[i] / bias1;
                const double v_hat = vv[i] / bias2;
                values[i] *= decay;
                values[i] -= group.lr * m_hat / (std::sqrt(v_hat) + h.eps);
            }
        }
    }
}

void zero_grad(std::span<ParamGroup> groups) {
    for (auto& group : groups)
        for (auto& p : group.params) p.zero_grad();
}

ParamGroup* find_group(std::span<ParamGroup> groups, const std::string& name) {
    for (auto& g : groups)
        if (g.name == name) return &g;
    return nullptr;
}

}  // namespace chaosssl
