#include "cshift/kernels/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "cshift/common.hpp"
#include "cshift/kernels/kernels_table.hpp"

namespace cshift::kernels {
namespace {

std::atomic<const detail::Table*> g_table{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

bool detect_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const detail::Table* resolve() {
    const detail::Table* t = g_table.load(std::memory_order_acquire);
    if (t) return t;
    Isa isa = detect_avx2() ? Isa::avx2 : Isa::scalar;
    if (const char* env = std::getenv("CSHIFT_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) isa = Isa::scalar;
        else if (std::strcmp(env, "avx2") == 0) {
            if (!detect_avx2()) throw ConfigError("CSHIFT_KERNELS=avx2 but the CPU lacks AVX2");
            isa = Isa::avx2;
        } else if (std::strcmp(env, "auto") != 0) {
            throw ConfigError(std::string("unknown CSHIFT_KERNELS value: ") + env);
        }
    }
    t = isa == Isa::avx2 ? &detail::avx2_table() : &detail::scalar_table();
    g_isa.store(isa, std::memory_order_relaxed);
    g_table.store(t, std::memory_order_release);
    return t;
}

inline const detail::Table& table() { return *resolve(); }

}  // namespace

Isa active_isa() {
    resolve();
    return g_isa.load(std::memory_order_relaxed);
}

bool cpu_has_avx2() { return detect_avx2(); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !detect_avx2()) throw ConfigError("cannot force AVX2 kernels: unsupported CPU");
    g_isa.store(isa, std::memory_order_relaxed);
    g_table.store(isa == Isa::avx2 ? &detail::avx2_table() : &detail::scalar_table(),
                  std::memory_order_release);
}

float sum(const float* x, size_t n) { return table().sum(x, n); }
float dot(const float* x, const float* y, size_t n) { return table().dot(x, y, n); }
float sum_abs_diff(const float* x, const float* y, size_t n) { return table().sum_abs_diff(x, y, n); }
float sum_sq_diff(const float* x, const float* y, size_t n) { return table().sum_sq_diff(x, y, n); }
void axpy(float a, const float* x, float* y, size_t n) { table().axpy(a, x, y, n); }
void scale(float a, float* x, size_t n) { table().scale(a, x, n); }
void add(const float* x, const float* y, float* out, size_t n) { table().add(x, y, out, n); }
void sub(const float* x, const float* y, float* out, size_t n) { table().sub(x, y, out, n); }
void mul(const float* x, const float* y, float* out, size_t n) { table().mul(x, y, out, n); }
void abs_diff(const float* x, const float* y, float* out, size_t n) { table().abs_diff(x, y, out, n); }
void clamp01(float* x, size_t n) { table().clamp01(x, n); }

// Double-precision path: plain scalar loops with the same blocked reduction
// order, used by the high-precision gradient checks.
namespace {
constexpr size_t kLanes = 8;
}

double sum(const double* x, size_t n) {
    double acc[kLanes] = {};
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        for (size_t j = 0; j < kLanes; ++j) acc[j] += x[i + j];
    double s = acc[0];
    for (size_t j = 1; j < kLanes; ++j) s += acc[j];
    for (size_t i = nb; i < n; ++i) s += x[i];
    return s;
}

double dot(const double* x, const double* y, size_t n) {
    double acc[kLanes] = {};
    const size_t nb = n / kLanes * kLanes;
    for (size_t i = 0; i < nb; i += kLanes)
        for (size_t j = 0; j < kLanes; ++j) acc[j] += x[i + j] * y[i + j];
    double s = acc[0];
    for (size_t j = 1; j < kLanes; ++j) s += acc[j];
    for (size_t i = nb; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_abs_diff(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::fabs(x[i] - y[i]);
    return s;
}

double sum_sq_diff(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void axpy(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
void scale(double a, double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= a;
}
void add(const double* x, const double* y, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}
void sub(const double* x, const double* y, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}
void mul(const double* x, const double* y, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}
void abs_diff(const double* x, const double* y, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i] - y[i]);
}
void clamp01(double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const double lo = x[i] > 0.0 ? x[i] : 0.0;
        x[i] = lo < 1.0 ? lo : 1.0;
    }
}

}  // namespace cshift::kernels
