#pragma once

#include <cmath>

#include "cshift/core/image.hpp"
#include "cshift/core/imageops.hpp"
#include "cshift/models/ssim.hpp"

namespace cshift::consensus {

// Distance / similarity measures between two prediction maps, evaluated per
// pixel (channel-mean where multi-channel). Orientation matters downstream:
// PSNR and SSIM already grow with similarity, the rest grow with distance.
enum class MetricKind { L1, L2, Psnr, Ssim, Variance, Perceptual };

inline const char* metric_name(MetricKind m) {
    switch (m) {
        case MetricKind::L1: return "l1";
        case MetricKind::L2: return "l2";
        case MetricKind::Psnr: return "psnr";
        case MetricKind::Ssim: return "ssim";
        case MetricKind::Variance: return "var";
        case MetricKind::Perceptual: return "perc";
    }
    return "?";
}

inline MetricKind metric_from_name(const std::string& s) {
    if (s == "l1") return MetricKind::L1;
    if (s == "l2") return MetricKind::L2;
    if (s == "psnr") return MetricKind::Psnr;
    if (s == "ssim") return MetricKind::Ssim;
    if (s == "var") return MetricKind::Variance;
    if (s == "perc") return MetricKind::Perceptual;
    throw ConfigError("unknown metric '" + s + "' (expected l1|l2|psnr|ssim|var|perc)");
}

inline bool larger_is_similar(MetricKind m) { return m == MetricKind::Psnr || m == MetricKind::Ssim; }

// Handcrafted perceptual surrogate (deliberately not a learned metric):
// per-pixel mean absolute difference of a {luminance, gradient magnitude at
// 3 blur scales} feature stack.
inline ImageF perceptual_features(const ImageF& img) {
    ImageF lum = channel_mean(img);
    const ImageF g0 = sobel_magnitude(lum);
    const ImageF g1 = sobel_magnitude(box_blur(lum, 2));
    const ImageF g2 = sobel_magnitude(box_blur(lum, 4));
    ImageF out(img.h, img.w, 4);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            out.at(y, x, 0) = lum.at(y, x, 0);
            out.at(y, x, 1) = g0.at(y, x, 0);
            out.at(y, x, 2) = g1.at(y, x, 0);
            out.at(y, x, 3) = g2.at(y, x, 0);
        }
    return out;
}

// h*w*1 distance (or similarity, for PSNR/SSIM) map between two same-shape
// images. Variance is set-wise and rejected here.
inline ImageF distance_map(const ImageF& a, const ImageF& b, MetricKind metric,
                           const SsimEngine<float>& ssim) {
    if (!a.same_shape(b)) throw ShapeError("distance_map: shape mismatch");
    const size_t pixels = size_t(a.h) * a.w;
    ImageF out(a.h, a.w, 1);
    switch (metric) {
        case MetricKind::L1: {
            for (int y = 0; y < a.h; ++y)
                for (int x = 0; x < a.w; ++x) {
                    float s = 0.0f;
                    for (int ch = 0; ch < a.c; ++ch) s += std::fabs(a.at(y, x, ch) - b.at(y, x, ch));
                    out.at(y, x, 0) = s / a.c;
                }
            return out;
        }
        case MetricKind::L2: {
            for (int y = 0; y < a.h; ++y)
                for (int x = 0; x < a.w; ++x) {
                    float s = 0.0f;
                    for (int ch = 0; ch < a.c; ++ch) {
                        const float d = a.at(y, x, ch) - b.at(y, x, ch);
                        s += d * d;
                    }
                    out.at(y, x, 0) = s / a.c;
                }
            return out;
        }
        case MetricKind::Psnr: {
            // Global score broadcast to every pixel: PSNR has no spatial
            // resolution, which is exactly why it ablates poorly.
            const double mse = double(kernels::sum_sq_diff(a.data.data(), b.data.data(), a.data.size())) /
                               double(a.data.size());
            double psnr = mse <= 0.0 ? 100.0 : 10.0 * std::log10(1.0 / mse);
            psnr = std::min(100.0, std::max(0.0, psnr));
            for (size_t i = 0; i < pixels; ++i) out.data[i] = static_cast<float>(psnr);
            return out;
        }
        case MetricKind::Ssim: {
            // Windowed SSIM shifted from [-1,1] to a [0,1] similarity.
            Image<float> s = ssim_map(a, b, ssim);
            for (size_t i = 0; i < pixels; ++i) out.data[i] = 0.5f * (s.data[i] + 1.0f);
            return out;
        }
        case MetricKind::Perceptual: {
            const ImageF fa = perceptual_features(a);
            const ImageF fb = perceptual_features(b);
            for (int y = 0; y < a.h; ++y)
                for (int x = 0; x < a.w; ++x) {
                    float s = 0.0f;
                    for (int ch = 0; ch < 4; ++ch) s += std::fabs(fa.at(y, x, ch) - fb.at(y, x, ch));
                    out.at(y, x, 0) = s / 4.0f;
                }
            return out;
        }
        case MetricKind::Variance:
            throw ConfigError("variance is a set-wise metric; use compute_weights");
    }
    throw ConfigError("unreachable metric kind");
}

}  // namespace cshift::consensus
