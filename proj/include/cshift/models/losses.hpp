#pragma once

#include <cmath>
#include <memory>

#include "cshift/core/image.hpp"
#include "cshift/models/ssim.hpp"

namespace cshift {

// Training losses: regression edges minimize 0.5*MSE + 0.5*(1 - mean SSIM);
// classification edges minimize mean per-pixel cross-entropy against soft
// simplex targets.

enum class LossKind { RegressionL2Ssim, CrossEntropy };

struct LossSpec {
    LossKind kind = LossKind::RegressionL2Ssim;

    static LossSpec for_task(const TaskSpec& task) {
        return {task.kind == TaskKind::Classification ? LossKind::CrossEntropy
                                                      : LossKind::RegressionL2Ssim};
    }
};

template <typename T>
struct LossResult {
    T value = T(0);
    Image<T> grad;  // d(value)/d(pred)
};

// Cached target-side SSIM statistics (one entry per channel). Targets are
// fixed for a whole training run, so this avoids refiltering them per epoch.
template <typename T>
struct TargetStats {
    std::vector<SsimPlaneStats<T>> per_channel;
    std::vector<std::vector<T>> planes;
};

template <typename T>
TargetStats<T> make_target_stats(const Image<T>& target, const SsimEngine<T>& engine) {
    TargetStats<T> st;
    st.per_channel.resize(target.c);
    st.planes.resize(target.c);
    for (int ch = 0; ch < target.c; ++ch) {
        extract_plane(target, ch, st.planes[ch]);
        st.per_channel[ch] = engine.plane_stats(st.planes[ch].data(), target.h, target.w);
    }
    return st;
}

constexpr double kLogFloor = 1e-12;

template <typename T>
LossResult<T> composite_loss_images(const Image<T>& pred, const Image<T>& target, LossKind kind,
                                    const SsimEngine<T>& engine,
                                    const TargetStats<T>* cached = nullptr, bool want_grad = true) {
    if (!pred.same_shape(target)) throw ShapeError("composite_loss: shape mismatch");
    LossResult<T> res;
    if (want_grad) res.grad = Image<T>(pred.h, pred.w, pred.c);

    if (kind == LossKind::CrossEntropy) {
        const T inv_pixels = T(1) / T(size_t(pred.h) * pred.w);
        T total = 0;
        for (size_t i = 0; i < pred.data.size(); ++i) {
            const T p = pred.data[i] > T(kLogFloor) ? pred.data[i] : T(kLogFloor);
            total -= target.data[i] * std::log(p);
            if (want_grad)
                res.grad.data[i] =
                    pred.data[i] > T(kLogFloor) ? -target.data[i] / p * inv_pixels : T(0);
        }
        res.value = total * inv_pixels;
        return res;
    }

    const size_t m = pred.data.size();
    const T inv_m = T(1) / T(m);
    // MSE half.
    T mse = 0;
    for (size_t i = 0; i < m; ++i) {
        const T d = pred.data[i] - target.data[i];
        mse += d * d;
        if (want_grad) res.grad.data[i] = d * inv_m;  // 0.5 * 2d/m
    }
    mse *= inv_m;

    // SSIM half, per channel; mean over channels.
    TargetStats<T> local;
    const TargetStats<T>* stats = cached;
    if (!stats) {
        local = make_target_stats(target, engine);
        stats = &local;
    }
    std::vector<T> px, grad_plane;
    T mean_ssim = 0;
    const T chan_up = T(-0.5) / T(pred.c);  // d(loss)/d(mean ssim of one channel)
    for (int ch = 0; ch < pred.c; ++ch) {
        extract_plane(pred, ch, px);
        grad_plane.assign(px.size(), T(0));
        const T s = engine.mean_ssim_plane(px.data(), stats->planes[ch].data(), stats->per_channel[ch],
                                           pred.h, pred.w, chan_up, want_grad ? grad_plane.data() : nullptr);
        mean_ssim += s;
        if (want_grad) deposit_plane_add(res.grad, ch, grad_plane);
    }
    mean_ssim /= T(pred.c);
    res.value = T(0.5) * mse + T(0.5) * (T(1) - mean_ssim);
    return res;
}

// Spec surface: loss between two prediction maps of the same task.
inline LossResult<float> composite_loss(const PredictionMap& pred, const PredictionMap& target,
                                        const LossSpec& spec, const SsimEngine<float>& engine) {
    if (!(pred.task == target.task)) throw ShapeError("composite_loss: task mismatch");
    return composite_loss_images<float>(pred.image, target.image, spec.kind, engine);
}

}  // namespace cshift
