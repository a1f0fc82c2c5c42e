#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cshift/common.hpp"

namespace cshift {

// SGD with Nesterov momentum, momentum-buffer formulation:
//   g' = g + wd*p;  b <- mu*b + g';  p <- p - lr*(g' + mu*b)
// Defaults: lr 5e-2, momentum 0.9, weight decay 1e-3.
struct OptimizerState {
    std::vector<float> momentum;
    float lr = 5e-2f;
    float mu = 0.9f;
    float weight_decay = 1e-3f;

    explicit OptimizerState(size_t n = 0, float lr_ = 5e-2f, float mu_ = 0.9f, float wd = 1e-3f)
        : momentum(n, 0.0f), lr(lr_), mu(mu_), weight_decay(wd) {}
};

inline void sgd_nesterov_step(std::vector<float>& params, const std::vector<float>& grads,
                              OptimizerState& opt) {
    if (params.size() != grads.size() || params.size() != opt.momentum.size())
        throw ShapeError("sgd_nesterov_step: size mismatch");
    for (float g : grads)
        if (!std::isfinite(g)) throw NumericsError("non-finite gradient");
    for (size_t i = 0; i < params.size(); ++i) {
        const float g = grads[i] + opt.weight_decay * params[i];
        float& b = opt.momentum[i];
        b = opt.mu * b + g;
        params[i] -= opt.lr * (g + opt.mu * b);
    }
}

// Reduce-on-plateau: relative threshold 1e-2, patience 10, factor 0.5,
// floor 5e-5. A reduction fires when the counter exceeds the patience.
struct SchedulerState {
    float best = std::numeric_limits<float>::infinity();
    int since_improvement = 0;
    int patience = 10;
    float factor = 0.5f;
    float threshold = 1e-2f;
    float min_lr = 5e-5f;
};

inline void plateau_step(SchedulerState& sched, float epoch_loss, OptimizerState& opt) {
    if (!std::isfinite(epoch_loss)) throw NumericsError("non-finite epoch loss");
    if (epoch_loss < sched.best * (1.0f - sched.threshold)) {
        sched.best = epoch_loss;
        sched.since_improvement = 0;
        return;
    }
    ++sched.since_improvement;
    if (sched.since_improvement > sched.patience) {
        opt.lr = std::max(opt.lr * sched.factor, sched.min_lr);
        sched.since_improvement = 0;
    }
}

}  // namespace cshift
