#include <cmath>
#include <cstddef>

#include "cshift/kernels/kernels_table.hpp"

// Scalar reference kernels. The 8-lane blocked accumulation mirrors the
// AVX2 register layout so both variants round identically.

namespace cshift::kernels::detail {
namespace {

constexpr size_t kLanes = 8;

template <typename Acc>
float combine_tail(Acc&& body, const float* tail_a, const float* tail_b, size_t tail_n, float lanes[kLanes]) {
    float s = lanes[0];
    for (size_t j = 1; j < kLanes; ++j) s += lanes[j];
    for (size_t i = 0; i < tail_n; ++i) s += body(tail_a ? tail_a[i] : 0.0f, tail_b ? tail_b[i] : 0.0f);
    return s;
}

float sum_impl(const float* x, size_t n) {
    float acc[kLanes] = {};
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        for (size_t j = 0; j < kLanes; ++j) acc[j] += x[i + j];
    return combine_tail([](float a, float) { return a; }, x + nb, nullptr, n - nb, acc);
}

float dot_impl(const float* x, const float* y, size_t n) {
    float acc[kLanes] = {};
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        for (size_t j = 0; j < kLanes; ++j) acc[j] += x[i + j] * y[i + j];
    return combine_tail([](float a, float b) { return a * b; }, x + nb, y + nb, n - nb, acc);
}

float sum_abs_diff_impl(const float* x, const float* y, size_t n) {
    float acc[kLanes] = {};
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        for (size_t j = 0; j < kLanes; ++j) acc[j] += std::fabs(x[i + j] - y[i + j]);
    return combine_tail([](float a, float b) { return std::fabs(a - b); }, x + nb, y + nb, n - nb, acc);
}

float sum_sq_diff_impl(const float* x, const float* y, size_t n) {
    float acc[kLanes] = {};
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        for (size_t j = 0; j < kLanes; ++j) {
            const float d = x[i + j] - y[i + j];
            acc[j] += d * d;
        }
    return combine_tail(
        [](float a, float b) {
            const float d = a - b;
            return d * d;
        },
        x + nb, y + nb, n - nb, acc);
}

void axpy_impl(float a, const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_impl(float a, float* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_impl(const float* x, const float* y, float* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_impl(const float* x, const float* y, float* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_impl(const float* x, const float* y, float* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void abs_diff_impl(const float* x, const float* y, float* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i] - y[i]);
}

void clamp01_impl(float* x, size_t n) {
    // Selection rule matches vmaxps/vminps (a OP b ? a : b).
    for (size_t i = 0; i < n; ++i) {
        const float lo = x[i] > 0.0f ? x[i] : 0.0f;
        x[i] = lo < 1.0f ? lo : 1.0f;
    }
}

}  // namespace

const Table& scalar_table() {
    static const Table t = {sum_impl, dot_impl,      sum_abs_diff_impl, sum_sq_diff_impl,
                            axpy_impl, scale_impl,   add_impl,          sub_impl,
                            mul_impl,  abs_diff_impl, clamp01_impl};
    return t;
}

}  // namespace cshift::kernels::detail
