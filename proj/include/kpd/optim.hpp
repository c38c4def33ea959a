#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kpd/model.hpp"

namespace kpd {

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct AdamState {
    long long step = 0;
    std::vector<std::vector<float>> m, v;  // per parameter tensor, flat
};

// Standard Adam with bias correction. grads[i] pairs with weights.params[i].
inline void adam_step(ModelWeights& weights, const std::vector<TensorF>& grads, AdamState& state,
                      const AdamConfig& cfg) {
    if (grads.size() != weights.params.size())
        throw std::invalid_argument("adam_step: gradient count mismatch");
    if (state.m.empty()) {
        state.m.resize(weights.params.size());
        state.v.resize(weights.params.size());
        for (size_t i = 0; i < weights.params.size(); ++i) {
            state.m[i].assign(weights.params[i].second.data.size(), 0.f);
            state.v[i].assign(weights.params[i].second.data.size(), 0.f);
        }
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg.beta1), state.step);
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg.beta2), state.step);
    for (size_t i = 0; i < weights.params.size(); ++i) {
        auto& [name, p] = weights.params[i];
        const auto& g = grads[i];
        if (g.data.size() != p.data.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch at " + name);
        for (size_t k = 0; k < p.data.size(); ++k) {
            const float gk = g.data[k];
            if (!std::isfinite(gk))
                throw std::runtime_error("adam_step: non-finite gradient in layer " + name);
            state.m[i][k] = cfg.beta1 * state.m[i][k] + (1.f - cfg.beta1) * gk;
            state.v[i][k] = cfg.beta2 * state.v[i][k] + (1.f - cfg.beta2) * gk * gk;
            const double mhat = state.m[i][k] / bc1;
            const double vhat = state.v[i][k] / bc2;
            p.data[k] -= static_cast<float>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }
}

}  // namespace kpd
