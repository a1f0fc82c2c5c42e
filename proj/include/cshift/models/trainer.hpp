#pragma once

#include <map>
#include <numeric>
#include <vector>

#include "cshift/models/edge_model.hpp"
#include "cshift/models/losses.hpp"
#include "cshift/models/optimizer.hpp"
#include "cshift/rng.hpp"

namespace cshift {

struct TrainConfig {
    int epochs = 30;
    int batch = 8;
    uint64_t seed = 0;
    float lr = 5e-2f;
    float momentum = 0.9f;
    float weight_decay = 1e-3f;
    float clip_norm = 1.0f;  // batch-gradient L2 clip; <= 0 disables
    std::vector<int> snapshot_epochs;  // 1-based; parameters copied after these epochs
};

struct TrainTrace {
    std::vector<float> epoch_loss;                 // one entry per epoch
    std::map<int, std::vector<float>> snapshots;   // epoch -> parameter copy
};

// Trains one edge on aligned (input, target) map lists. Single-threaded and
// fully deterministic for a given seed: fixed Fisher-Yates shuffle, fixed
// accumulation order, no cross-sample parallelism. Throws NumericsError if
// the loss goes non-finite; callers restart with lr/10.
inline TrainTrace train_edge(EdgeModel& model, const std::vector<const ImageF*>& inputs,
                             const std::vector<const ImageF*>& targets, const TrainConfig& cfg,
                             const SsimEngine<float>& ssim) {
    if (inputs.size() != targets.size()) throw ShapeError("train_edge: input/target count mismatch");
    if (cfg.batch < 1) throw ConfigError("batch size must be >= 1");
    const size_t n = inputs.size();
    TrainTrace trace;
    if (cfg.epochs <= 0 || n == 0) return trace;

    for (size_t i = 0; i < n; ++i) {
        if (inputs[i]->c != model.src.channels) throw ShapeError("train_edge: input channels mismatch");
        if (targets[i]->c != model.dst.channels) throw ShapeError("train_edge: target channels mismatch");
    }

    const LossSpec loss = LossSpec::for_task(model.dst);

    // Target-side SSIM stats never change during the run.
    std::vector<TargetStats<float>> cached;
    if (loss.kind == LossKind::RegressionL2Ssim) {
        cached.reserve(n);
        for (size_t i = 0; i < n; ++i) cached.push_back(make_target_stats(*targets[i], ssim));
    }

    OptimizerState opt(model.core.params.size(), cfg.lr, cfg.momentum, cfg.weight_decay);
    SchedulerState sched;
    Rng rng(hash_seed({cfg.seed, 0x7e41ull}));
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));

    std::vector<float> grad_accum(model.core.params.size());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (size_t start = 0; start < n; start += cfg.batch) {
            const size_t end = std::min(n, start + cfg.batch);
            std::fill(grad_accum.begin(), grad_accum.end(), 0.0f);
            for (size_t k = start; k < end; ++k) {
                const size_t idx = order[k];
                ForwardCache<float> cache;
                model.core.run_forward(*inputs[idx], cache, /*keep=*/true);
                const auto lr_res = composite_loss_images<float>(
                    cache.output, *targets[idx], loss.kind, ssim,
                    cached.empty() ? nullptr : &cached[idx]);
                loss_sum += lr_res.value;
                const std::vector<float> g = model.core.backward(*inputs[idx], cache, lr_res.grad);
                kernels::axpy(1.0f, g.data(), grad_accum.data(), g.size());
            }
            // Per-sample losses are pixel means, so their gradients are tiny;
            // summing over the batch (not averaging) keeps the step size
            // usable at the stock learning rate on these small models. The
            // L2 clip bounds the step for the steep cross-entropy edges.
            if (cfg.clip_norm > 0.0f) {
                const double norm2 = kernels::dot(grad_accum.data(), grad_accum.data(), grad_accum.size());
                if (norm2 > double(cfg.clip_norm) * cfg.clip_norm)
                    kernels::scale(static_cast<float>(cfg.clip_norm / std::sqrt(norm2)),
                                   grad_accum.data(), grad_accum.size());
            }
            sgd_nesterov_step(model.core.params, grad_accum, opt);
        }
        const float epoch_loss = static_cast<float>(loss_sum / static_cast<double>(n));
        if (!std::isfinite(epoch_loss)) throw NumericsError("training diverged (non-finite loss)");
        trace.epoch_loss.push_back(epoch_loss);
        plateau_step(sched, epoch_loss, opt);
        for (int snap : cfg.snapshot_epochs)
            if (snap == epoch) trace.snapshots[epoch] = model.core.params;
    }
    return trace;
}

}  // namespace cshift
