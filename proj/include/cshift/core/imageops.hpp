#pragma once

#include <algorithm>
#include <cmath>

#include "cshift/core/image.hpp"

namespace cshift {

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Box blur with replicate borders; radius 0 is the identity. Separable,
// two passes, exact mean over the (2r+1) window.
template <typename T>
Image<T> box_blur(const Image<T>& img, int radius) {
    if (radius <= 0) return img;
    const int h = img.h, w = img.w, c = img.c;
    const T inv = T(1) / T(2 * radius + 1);
    Image<T> tmp(h, w, c), out(h, w, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                T s = T(0);
                for (int k = -radius; k <= radius; ++k) s += img.at(y, clamp_index(x + k, w), ch);
                tmp.at(y, x, ch) = s * inv;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                T s = T(0);
                for (int k = -radius; k <= radius; ++k) s += tmp.at(clamp_index(y + k, h), x, ch);
                out.at(y, x, ch) = s * inv;
            }
    return out;
}

// Sobel gradient magnitude of a single-channel image, replicate borders,
// normalized by the maximum possible response (4*sqrt(2)) on [0,1] input.
template <typename T>
Image<T> sobel_magnitude(const Image<T>& img) {
    const int h = img.h, w = img.w;
    Image<T> out(h, w, 1);
    const T norm = T(1) / (T(4) * std::sqrt(T(2)));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto v = [&](int dy, int dx) { return img.at(clamp_index(y + dy, h), clamp_index(x + dx, w), 0); };
            const T gx = (v(-1, 1) + T(2) * v(0, 1) + v(1, 1)) - (v(-1, -1) + T(2) * v(0, -1) + v(1, -1));
            const T gy = (v(1, -1) + T(2) * v(1, 0) + v(1, 1)) - (v(-1, -1) + T(2) * v(-1, 0) + v(-1, 1));
            T m = std::sqrt(gx * gx + gy * gy) * norm;
            out.at(y, x, 0) = m > T(1) ? T(1) : m;
        }
    return out;
}

}  // namespace cshift
