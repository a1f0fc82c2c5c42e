#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cshift/common.hpp"
#include "cshift/core/task.hpp"
#include "cshift/kernels/kernels.hpp"

namespace cshift {

// Dense h*w*c raster, row-major (y, x, channel). The float instantiation is
// the production payload; the double one backs the gradient checks.
template <typename T>
struct Image {
    int h = 0, w = 0, c = 0;
    std::vector<T> data;

    Image() = default;
    Image(int h_, int w_, int c_, T fill = T(0)) : h(h_), w(w_), c(c_), data(size_t(h_) * w_ * c_, fill) {}

    size_t size() const { return data.size(); }
    T& at(int y, int x, int ch) { return data[(size_t(y) * w + x) * c + ch]; }
    const T& at(int y, int x, int ch) const { return data[(size_t(y) * w + x) * c + ch]; }
    T* row(int y) { return data.data() + size_t(y) * w * c; }
    const T* row(int y) const { return data.data() + size_t(y) * w * c; }

    bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }

    bool operator==(const Image& o) const { return h == o.h && w == o.w && c == o.c && data == o.data; }
};

using ImageF = Image<float>;
using ImageD = Image<double>;

// One task view of one sample.
struct PredictionMap {
    TaskSpec task;
    ImageF image;

    PredictionMap() = default;
    PredictionMap(TaskSpec t, ImageF img) : task(std::move(t)), image(std::move(img)) {}
    PredictionMap(TaskSpec t, int h, int w) : task(std::move(t)), image(h, w, task.channels) {}
};

constexpr float kSimplexTolerance = 1e-5f;

// Checks the value contract: finite everywhere; [0,1] for regression, a
// per-pixel probability simplex (within tolerance) for classification.
// Returns an explanation for the first violation, empty string if valid.
inline std::string check_map(const PredictionMap& m) {
    const ImageF& img = m.image;
    if (img.h < 1 || img.w < 1 || img.c < 1) return "empty image";
    if (img.c != m.task.channels) return "channel count does not match task '" + m.task.name + "'";
    for (size_t i = 0; i < img.data.size(); ++i)
        if (!std::isfinite(img.data[i])) return "non-finite value at flat index " + std::to_string(i);
    if (m.task.kind == TaskKind::Regression) {
        for (size_t i = 0; i < img.data.size(); ++i)
            if (img.data[i] < 0.0f || img.data[i] > 1.0f)
                return "regression value out of [0,1] at flat index " + std::to_string(i);
    } else {
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x) {
                double s = 0.0;
                for (int ch = 0; ch < img.c; ++ch) {
                    const float v = img.at(y, x, ch);
                    if (v < 0.0f) return "negative class probability at (" + std::to_string(y) + "," + std::to_string(x) + ")";
                    s += v;
                }
                if (std::fabs(s - 1.0) > kSimplexTolerance)
                    return "pixel (" + std::to_string(y) + "," + std::to_string(x) + ") simplex sum " +
                           std::to_string(s);
            }
    }
    return {};
}

inline void validate_map(const PredictionMap& m) {
    const std::string err = check_map(m);
    if (!err.empty()) throw InvalidMap("invalid map for task '" + m.task.name + "': " + err);
}

// Renormalizes classification pixels to an exact simplex. Pixels with no
// mass fall back to uniform.
inline void renormalize_simplex(ImageF& img) {
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double s = 0.0;
            for (int ch = 0; ch < img.c; ++ch) {
                float& v = img.at(y, x, ch);
                if (v < 0.0f) v = 0.0f;
                s += v;
            }
            if (s <= 0.0 || !std::isfinite(s)) {
                const float u = 1.0f / static_cast<float>(img.c);
                for (int ch = 0; ch < img.c; ++ch) img.at(y, x, ch) = u;
            } else {
                for (int ch = 0; ch < img.c; ++ch)
                    img.at(y, x, ch) = static_cast<float>(img.at(y, x, ch) / s);
            }
        }
}

// Per-pixel mean over channels, as a single-channel image.
template <typename T>
Image<T> channel_mean(const Image<T>& img) {
    Image<T> out(img.h, img.w, 1);
    if (img.c == 1) {
        out.data = img.data;
        return out;
    }
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            T s = T(0);
            for (int ch = 0; ch < img.c; ++ch) s += img.at(y, x, ch);
            out.at(y, x, 0) = s / T(img.c);
        }
    return out;
}

}  // namespace cshift
