#pragma once

#include <cmath>

#include "cshift/core/image.hpp"
#include "cshift/core/imageops.hpp"
#include "cshift/kernels/kernels.hpp"
#include "cshift/rng.hpp"

namespace cshift::synth {

// Simulated out-of-distribution expert: ground truth plus controlled,
// partly structured corruption. Regression tasks get blur + white noise +
// a smooth per-region bias field; classification tasks get label flips
// whose replacement class is region-correlated, so different experts
// disagree in structured ways rather than pure salt-and-pepper.
struct ExpertSimulator {
    TaskSpec task;
    float sigma = 0.0f;          // additive Gaussian, regression
    int blur_radius = 0;         // box blur, regression
    float bias_amplitude = 0.0f; // region bias field amplitude, regression
    float flip_rate = 0.0f;      // argmax flip probability, classification
    uint64_t seed = 0;

    void validate() const {
        if (sigma < 0.0f) throw ConfigError("expert sigma must be >= 0");
        if (blur_radius < 0) throw ConfigError("expert blur radius must be >= 0");
        if (bias_amplitude < 0.0f) throw ConfigError("expert bias amplitude must be >= 0");
        if (flip_rate < 0.0f || flip_rate >= 1.0f) throw ConfigError("flip rate must be in [0,1)");
    }

    bool is_identity() const {
        return sigma == 0.0f && blur_radius == 0 && bias_amplitude == 0.0f && flip_rate == 0.0f;
    }
};

namespace expert_detail {

// Smooth structured field in [-1,1]: coarse value-noise grid, bilinear
// interpolation. Pure function of (seed, sample id, tag).
inline ImageF region_field(int h, int w, uint64_t seed, int id, uint64_t tag) {
    const int cell = std::max(8, std::min(h, w) / 4);
    const int gh = h / cell + 2, gw = w / cell + 2;
    Rng rng(hash_seed({seed, static_cast<uint64_t>(id), tag}));
    std::vector<float> grid(size_t(gh) * gw);
    for (auto& v : grid) v = rng.uniform_range(-1.0f, 1.0f);
    ImageF out(h, w, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float fy = static_cast<float>(y) / cell, fx = static_cast<float>(x) / cell;
            const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
            const float ty = fy - y0, tx = fx - x0;
            auto g = [&](int yy, int xx) { return grid[size_t(yy) * gw + xx]; };
            const float a = g(y0, x0) * (1 - tx) + g(y0, x0 + 1) * tx;
            const float b = g(y0 + 1, x0) * (1 - tx) + g(y0 + 1, x0 + 1) * tx;
            out.at(y, x, 0) = a * (1 - ty) + b * ty;
        }
    return out;
}

}  // namespace expert_detail

constexpr float kClassSmoothingFloor = 1e-3f;

inline PredictionMap expert_predict(const ExpertSimulator& expert, const PredictionMap& gt, int id) {
    if (!(expert.task == gt.task)) throw ConfigError("expert/ground-truth task mismatch: '" +
                                                     expert.task.name + "' vs '" + gt.task.name + "'");
    expert.validate();
    if (expert.is_identity()) return gt;

    const int h = gt.image.h, w = gt.image.w, c = gt.image.c;
    PredictionMap out(gt.task, h, w);

    if (gt.task.kind == TaskKind::Regression) {
        ImageF base = box_blur(gt.image, expert.blur_radius);
        Rng noise(hash_seed({expert.seed, static_cast<uint64_t>(id), 0x401eull}));
        ImageF bias = expert_detail::region_field(h, w, expert.seed, id, 0xb1a5ull);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int ch = 0; ch < c; ++ch)
                    out.image.at(y, x, ch) = base.at(y, x, ch) + expert.sigma * noise.normal_float() +
                                             expert.bias_amplitude * bias.at(y, x, 0);
        kernels::clamp01(out.image.data.data(), out.image.data.size());
    } else {
        Rng flips(hash_seed({expert.seed, static_cast<uint64_t>(id), 0xf11bull}));
        ImageF region = expert_detail::region_field(h, w, expert.seed, id, 0xc1a55ull);
        const float eps = kClassSmoothingFloor;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int best = 0;
                for (int ch = 1; ch < c; ++ch)
                    if (gt.image.at(y, x, ch) > gt.image.at(y, x, best)) best = ch;
                const bool flip = flips.uniform_float() < expert.flip_rate;
                if (flip && c > 1) {
                    // Replacement class follows the region field, so one
                    // expert's mistakes cluster spatially.
                    const float r = region.at(y, x, 0);
                    const int offset = 1 + std::min(c - 2, static_cast<int>((r + 1.0f) * 0.5f * (c - 1)));
                    best = (best + offset) % c;
                }
                for (int ch = 0; ch < c; ++ch)
                    out.image.at(y, x, ch) = eps + (1.0f - c * eps) * (ch == best ? 1.0f : 0.0f);
            }
    }
    return out;
}

}  // namespace cshift::synth
