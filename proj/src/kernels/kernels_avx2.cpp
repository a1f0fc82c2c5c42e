#include <cmath>
#include <cstddef>

#include "cshift/kernels/kernels_table.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

// AVX2 kernels. No FMA: one rounding per multiply and add, exactly like the
// scalar reference. Horizontal reductions store the accumulator register and
// combine the lanes left to right, then fold the tail in index order.

namespace cshift::kernels::detail {
namespace {

constexpr size_t kLanes = 8;

inline float hreduce(__m256 acc) {
    alignas(32) float lanes[kLanes];
    _mm256_store_ps(lanes, acc);
    float s = lanes[0];
    for (size_t j = 1; j < kLanes; ++j) s += lanes[j];
    return s;
}

inline __m256 abs_ps(__m256 v) {
    const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
    return _mm256_and_ps(v, mask);
}

float sum_impl(const float* x, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    float s = hreduce(acc);
    for (size_t i = nb; i < n; ++i) s += x[i];
    return s;
}

float dot_impl(const float* x, const float* y, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    float s = hreduce(acc);
    for (size_t i = nb; i < n; ++i) s += x[i] * y[i];
    return s;
}

float sum_abs_diff_impl(const float* x, const float* y, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        acc = _mm256_add_ps(acc, abs_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i))));
    float s = hreduce(acc);
    for (size_t i = nb; i < n; ++i) s += std::fabs(x[i] - y[i]);
    return s;
}

float sum_sq_diff_impl(const float* x, const float* y, size_t n) {
    __m256 acc = _mm256_setzero_ps();
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes) {
        const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
        acc = _mm256_add_ps(acc, _mm256_mul_ps(d, d));
    }
    float s = hreduce(acc);
    for (size_t i = nb; i < n; ++i) {
        const float d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void axpy_impl(float a, const float* x, float* y, size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_mul_ps(va, _mm256_loadu_ps(x + i))));
    for (size_t i = nb; i < n; ++i) y[i] += a * x[i];
}

void scale_impl(float a, float* x, size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes) _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
    for (size_t i = nb; i < n; ++i) x[i] *= a;
}

void add_impl(const float* x, const float* y, float* out, size_t n) {
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (size_t i = nb; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_impl(const float* x, const float* y, float* out, size_t n) {
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (size_t i = nb; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_impl(const float* x, const float* y, float* out, size_t n) {
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (size_t i = nb; i < n; ++i) out[i] = x[i] * y[i];
}

void abs_diff_impl(const float* x, const float* y, float* out, size_t n) {
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        _mm256_storeu_ps(out + i, abs_ps(_mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i))));
    for (size_t i = nb; i < n; ++i) out[i] = std::fabs(x[i] - y[i]);
}

void clamp01_impl(float* x, size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    const __m256 one = _mm256_set1_ps(1.0f);
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        _mm256_storeu_ps(x + i, _mm256_min_ps(_mm256_max_ps(_mm256_loadu_ps(x + i), zero), one));
    for (size_t i = nb; i < n; ++i) {
        const float lo = x[i] > 0.0f ? x[i] : 0.0f;
        x[i] = lo < 1.0f ? lo : 1.0f;
    }
}

}  // namespace

const Table& avx2_table() {
    static const Table t = {sum_impl, dot_impl,      sum_abs_diff_impl, sum_sq_diff_impl,
                            axpy_impl, scale_impl,   add_impl,          sub_impl,
                            mul_impl,  abs_diff_impl, clamp01_impl};
    return t;
}

}  // namespace cshift::kernels::detail

#else  // !__AVX2__

namespace cshift::kernels::detail {

// Non-x86 build: the dispatcher never selects this table.
const Table& avx2_table() { return scalar_table(); }

}  // namespace cshift::kernels::detail

#endif
