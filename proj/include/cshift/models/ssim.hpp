#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "cshift/core/image.hpp"

namespace cshift {

// Windowed SSIM with the standard constants: 11x11 Gaussian window,
// sigma 1.5, C1=(0.01)^2, C2=(0.03)^2 on unit dynamic range. Windows are
// clamped at the borders and renormalized, which keeps constants exact
// (SSIM of two constant maps is well defined at every pixel) and works on
// maps smaller than the window. The renormalization factorizes per axis,
// so the filter stays separable.
//
// The backward pass propagates through means, variances and covariance
// analytically; see ssim_accumulate_grad.

template <typename T>
struct GaussianFilter {
    static constexpr int kRadius = 5;
    static constexpr int kTaps = 2 * kRadius + 1;
    std::array<T, kTaps> g;

    GaussianFilter() {
        T s = 0;
        for (int k = -kRadius; k <= kRadius; ++k) {
            g[k + kRadius] = std::exp(T(-0.5) * T(k) * T(k) / T(1.5 * 1.5));
            s += g[k + kRadius];
        }
        for (auto& v : g) v /= s;
    }

    // out[i] = sum_k g[k]*in[i+k] / norm(i), taps outside [0,n) dropped.
    void pass(const T* in, T* out, int n, int stride) const {
        for (int i = 0; i < n; ++i) {
            T acc = 0, norm = 0;
            const int klo = std::max(-kRadius, -i), khi = std::min(kRadius, n - 1 - i);
            for (int k = klo; k <= khi; ++k) {
                acc += g[k + kRadius] * in[(i + k) * stride];
                norm += g[k + kRadius];
            }
            out[i * stride] = acc / norm;
        }
    }

    // Adjoint of pass: out[j] = sum_k g[k]/norm(j-k) * up[j-k], for valid
    // output positions j-k.
    void pass_adjoint(const T* up, T* out, int n, int stride) const {
        std::vector<T> inv_norm(n);
        for (int i = 0; i < n; ++i) {
            T norm = 0;
            const int klo = std::max(-kRadius, -i), khi = std::min(kRadius, n - 1 - i);
            for (int k = klo; k <= khi; ++k) norm += g[k + kRadius];
            inv_norm[i] = T(1) / norm;
        }
        for (int j = 0; j < n; ++j) {
            T acc = 0;
            for (int k = -kRadius; k <= kRadius; ++k) {
                const int i = j - k;
                if (i < 0 || i >= n) continue;
                acc += g[k + kRadius] * inv_norm[i] * up[i * stride];
            }
            out[j * stride] = acc;
        }
    }

    // 2-D filter on a single-channel plane (row pass then column pass).
    void filter2d(const T* in, T* out, int h, int w, std::vector<T>& tmp) const {
        tmp.resize(size_t(h) * w);
        for (int y = 0; y < h; ++y) pass(in + size_t(y) * w, tmp.data() + size_t(y) * w, w, 1);
        for (int x = 0; x < w; ++x) pass(tmp.data() + x, out + x, h, w);
    }

    void filter2d_adjoint(const T* up, T* out, int h, int w, std::vector<T>& tmp) const {
        tmp.resize(size_t(h) * w);
        for (int x = 0; x < w; ++x) pass_adjoint(up + x, tmp.data() + x, h, w);
        for (int y = 0; y < h; ++y) pass_adjoint(tmp.data() + size_t(y) * w, out + size_t(y) * w, w, 1);
    }
};

template <typename T>
struct SsimConstants {
    static constexpr T C1 = T(0.01) * T(0.01);
    static constexpr T C2 = T(0.03) * T(0.03);
};

// Per-plane filtered statistics of a map; target-side stats are cached
// across training epochs since targets do not move.
template <typename T>
struct SsimPlaneStats {
    std::vector<T> mu;      // F(x)
    std::vector<T> svar;    // F(x^2) - mu^2
};

template <typename T>
class SsimEngine {
public:
    SsimPlaneStats<T> plane_stats(const T* plane, int h, int w) const {
        const size_t n = size_t(h) * w;
        SsimPlaneStats<T> st;
        st.mu.resize(n);
        st.svar.resize(n);
        std::vector<T> tmp, sq(n);
        filt_.filter2d(plane, st.mu.data(), h, w, tmp);
        for (size_t i = 0; i < n; ++i) sq[i] = plane[i] * plane[i];
        filt_.filter2d(sq.data(), st.svar.data(), h, w, tmp);
        for (size_t i = 0; i < n; ++i) st.svar[i] -= st.mu[i] * st.mu[i];
        return st;
    }

    // Per-pixel SSIM of two single-channel planes.
    std::vector<T> ssim_plane(const T* x, const T* y, int h, int w) const {
        const SsimPlaneStats<T> sx = plane_stats(x, h, w);
        const SsimPlaneStats<T> sy = plane_stats(y, h, w);
        return ssim_from_stats(x, y, sx, sy, h, w);
    }

    // Mean SSIM over a plane plus (optionally) d(mean SSIM)/dx scaled by
    // `upstream`, accumulated into grad (same plane layout).
    T mean_ssim_plane(const T* x, const T* y, const SsimPlaneStats<T>& sy, int h, int w,
                      T upstream, T* grad) const {
        const size_t n = size_t(h) * w;
        const SsimPlaneStats<T> sx = plane_stats(x, h, w);
        std::vector<T> tmp, xy(n), sxy(n);
        for (size_t i = 0; i < n; ++i) xy[i] = x[i] * y[i];
        filt_.filter2d(xy.data(), sxy.data(), h, w, tmp);
        for (size_t i = 0; i < n; ++i) sxy[i] -= sx.mu[i] * sy.mu[i];

        constexpr T C1 = SsimConstants<T>::C1, C2 = SsimConstants<T>::C2;
        T total = 0;
        std::vector<T> g_mu, g_svar, g_sxy;
        if (grad) {
            g_mu.assign(n, T(0));
            g_svar.assign(n, T(0));
            g_sxy.assign(n, T(0));
        }
        const T per_pixel_up = grad ? upstream / T(n) : T(0);
        for (size_t i = 0; i < n; ++i) {
            const T mx = sx.mu[i], my = sy.mu[i];
            const T a1 = T(2) * mx * my + C1;
            const T a2 = T(2) * sxy[i] + C2;
            const T b1 = mx * mx + my * my + C1;
            const T b2 = sx.svar[i] + sy.svar[i] + C2;
            const T inv = T(1) / (b1 * b2);
            const T s = a1 * a2 * inv;
            total += s;
            if (grad) {
                const T dS_dmu = per_pixel_up * (T(2) * my * a2 * inv - s * T(2) * mx / b1);
                const T dS_dsvar = per_pixel_up * (-s / b2);
                const T dS_dsxy = per_pixel_up * (T(2) * a1 * inv);
                // mu also feeds svar (= F(x^2) - mu^2) and sxy (= F(xy) - mux*muy).
                g_mu[i] = dS_dmu - T(2) * mx * dS_dsvar - my * dS_dsxy;
                g_svar[i] = dS_dsvar;
                g_sxy[i] = dS_dsxy;
            }
        }
        if (grad) {
            std::vector<T> back(n), tmp2;
            filt_.filter2d_adjoint(g_mu.data(), back.data(), h, w, tmp2);
            for (size_t i = 0; i < n; ++i) grad[i] += back[i];
            filt_.filter2d_adjoint(g_svar.data(), back.data(), h, w, tmp2);
            for (size_t i = 0; i < n; ++i) grad[i] += T(2) * x[i] * back[i];
            filt_.filter2d_adjoint(g_sxy.data(), back.data(), h, w, tmp2);
            for (size_t i = 0; i < n; ++i) grad[i] += y[i] * back[i];
        }
        return total / T(n);
    }

    const GaussianFilter<T>& filter() const { return filt_; }

private:
    std::vector<T> ssim_from_stats(const T* x, const T* y, const SsimPlaneStats<T>& sx,
                                   const SsimPlaneStats<T>& sy, int h, int w) const {
        const size_t n = size_t(h) * w;
        std::vector<T> tmp, xy(n), sxy(n), out(n);
        for (size_t i = 0; i < n; ++i) xy[i] = x[i] * y[i];
        filt_.filter2d(xy.data(), sxy.data(), h, w, tmp);
        constexpr T C1 = SsimConstants<T>::C1, C2 = SsimConstants<T>::C2;
        for (size_t i = 0; i < n; ++i) {
            sxy[i] -= sx.mu[i] * sy.mu[i];
            const T a1 = T(2) * sx.mu[i] * sy.mu[i] + C1;
            const T a2 = T(2) * sxy[i] + C2;
            const T b1 = sx.mu[i] * sx.mu[i] + sy.mu[i] * sy.mu[i] + C1;
            const T b2 = sx.svar[i] + sy.svar[i] + C2;
            out[i] = (a1 * a2) / (b1 * b2);
        }
        return out;
    }

    GaussianFilter<T> filt_;
};

// Extracts channel `ch` of an interleaved image into a contiguous plane.
template <typename T>
void extract_plane(const Image<T>& img, int ch, std::vector<T>& plane) {
    plane.resize(size_t(img.h) * img.w);
    const T* p = img.data.data() + ch;
    for (size_t i = 0; i < plane.size(); ++i) plane[i] = p[i * img.c];
}

template <typename T>
void deposit_plane_add(Image<T>& img, int ch, const std::vector<T>& plane) {
    T* p = img.data.data() + ch;
    for (size_t i = 0; i < plane.size(); ++i) p[i * img.c] += plane[i];
}

// Per-pixel SSIM map of two same-shape images, channel-mean, as h*w*1.
template <typename T>
Image<T> ssim_map(const Image<T>& a, const Image<T>& b, const SsimEngine<T>& engine) {
    if (!a.same_shape(b)) throw ShapeError("ssim_map: shape mismatch");
    Image<T> out(a.h, a.w, 1);
    std::vector<T> pa, pb;
    for (int ch = 0; ch < a.c; ++ch) {
        extract_plane(a, ch, pa);
        extract_plane(b, ch, pb);
        const std::vector<T> s = engine.ssim_plane(pa.data(), pb.data(), a.h, a.w);
        for (size_t i = 0; i < s.size(); ++i) out.data[i] += s[i];
    }
    const T inv = T(1) / T(a.c);
    for (auto& v : out.data) v *= inv;
    return out;
}

}  // namespace cshift
