#pragma once

// Independent reference implementations used only by tests. These
// deliberately take the dumbest correct route (direct window loops,
// threshold enumeration, double precision) so they share no code with the
// production paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cshift/core/image.hpp"

namespace oracle {

// Windowed SSIM at one pixel of two single-channel planes: direct 2-D loop
// over the in-bounds 11x11 Gaussian window, weights renormalized over the
// window cells that fall inside the image.
inline double ssim_at(const std::vector<double>& x, const std::vector<double>& y, int h, int w,
                      int cy, int cx) {
    const int R = 5;
    const double sigma = 1.5;
    double wsum = 0, mx = 0, my = 0;
    auto weight = [&](int dy, int dx) {
        return std::exp(-0.5 * (dy * dy + dx * dx) / (sigma * sigma));
    };
    for (int dy = -R; dy <= R; ++dy)
        for (int dx = -R; dx <= R; ++dx) {
            const int yy = cy + dy, xx = cx + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            const double g = weight(dy, dx);
            wsum += g;
            mx += g * x[yy * w + xx];
            my += g * y[yy * w + xx];
        }
    mx /= wsum;
    my /= wsum;
    double vx = 0, vy = 0, cov = 0;
    for (int dy = -R; dy <= R; ++dy)
        for (int dx = -R; dx <= R; ++dx) {
            const int yy = cy + dy, xx = cx + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            const double g = weight(dy, dx) / wsum;
            vx += g * (x[yy * w + xx] - mx) * (x[yy * w + xx] - mx);
            vy += g * (y[yy * w + xx] - my) * (y[yy * w + xx] - my);
            cov += g * (x[yy * w + xx] - mx) * (y[yy * w + xx] - my);
        }
    const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    return ((2 * mx * my + C1) * (2 * cov + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
}

// note: gaussian-weighted variance around the weighted mean equals
// F(x^2) - mu^2 with the same weights, so this matches the separable path.

// Reference HSV -> RGB (h, s, v in [0,1], h scaled from degrees/360).
inline void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    if (s <= 0.0) {
        r = g = b = v;
        return;
    }
    double hh = h * 6.0;
    if (hh >= 6.0) hh = 0.0;
    const int i = static_cast<int>(hh);
    const double f = hh - i;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (i) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

// Weighted median by threshold enumeration: the smallest candidate value v
// such that the normalized weight of {values <= v} reaches one half.
inline float weighted_median(const std::vector<float>& values, const std::vector<float>& weights) {
    double total = 0;
    for (float w : weights) total += w;
    std::vector<float> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (float v : sorted) {
        double mass = 0;
        for (size_t i = 0; i < values.size(); ++i)
            if (values[i] <= v) mass += weights[i];
        if (mass >= 0.5 * total) return v;
    }
    return sorted.back();
}

// Plain double-loop mean absolute error x100.
inline double l1_x100(const cshift::ImageF& a, const cshift::ImageF& b) {
    double s = 0;
    size_t n = 0;
    for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x)
            for (int c = 0; c < a.c; ++c) {
                s += std::fabs(double(a.at(y, x, c)) - double(b.at(y, x, c)));
                ++n;
            }
    return 100.0 * s / n;
}

// Kolmogorov-Smirnov statistic between the empirical CDFs of two samples.
inline double ks_statistic(std::vector<float> a, std::vector<float> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        const double fa = double(i) / a.size(), fb = double(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

// Scalar Nesterov recursion (momentum-buffer form), independent of the
// production vector implementation.
struct ScalarNesterov {
    double p, b = 0;
    double lr, mu, wd;
    void step(double g) {
        const double gp = g + wd * p;
        b = mu * b + gp;
        p -= lr * (gp + mu * b);
    }
};

}  // namespace oracle
