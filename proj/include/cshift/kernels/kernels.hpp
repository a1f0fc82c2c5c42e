#pragma once

#include <cstddef>

namespace cshift::kernels {

// Data-parallel inner loops behind the whole pipeline (patch/conv dot
// products, loss reductions, elementwise map arithmetic). Two variants
// exist: a scalar reference and an AVX2 one, selected at runtime.
//
// Both follow the same contract so results are bit-identical:
//   - reductions accumulate into 8 lanes (lane j takes elements 8k+j),
//     the lanes are combined left to right, then the tail (< 8 elements)
//     is folded in, in index order;
//   - elementwise ops do one rounding per element (no FMA);
//   - min/max use the "a OP b ? a : b" selection rule of vminps/vmaxps.
// Inputs are expected to be finite.

enum class Isa { scalar, avx2 };

// Active variant: CSHIFT_KERNELS=scalar|avx2|auto (default auto = best
// supported by the CPU). Resolved once on first use.
Isa active_isa();
// Test hook; throws ConfigError if the ISA is unsupported on this machine.
void force_isa(Isa isa);
bool cpu_has_avx2();

float sum(const float* x, size_t n);
float dot(const float* x, const float* y, size_t n);
float sum_abs_diff(const float* x, const float* y, size_t n);
float sum_sq_diff(const float* x, const float* y, size_t n);

void axpy(float a, const float* x, float* y, size_t n);           // y += a*x
void scale(float a, float* x, size_t n);                          // x *= a
void add(const float* x, const float* y, float* out, size_t n);   // out = x+y
void sub(const float* x, const float* y, float* out, size_t n);   // out = x-y
void mul(const float* x, const float* y, float* out, size_t n);   // out = x*y
void abs_diff(const float* x, const float* y, float* out, size_t n);
void clamp01(float* x, size_t n);

// Double-precision twins used by the gradient-check instantiations; these
// are scalar-only but follow the same reduction order.
double sum(const double* x, size_t n);
double dot(const double* x, const double* y, size_t n);
double sum_abs_diff(const double* x, const double* y, size_t n);
double sum_sq_diff(const double* x, const double* y, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void scale(double a, double* x, size_t n);
void add(const double* x, const double* y, double* out, size_t n);
void sub(const double* x, const double* y, double* out, size_t n);
void mul(const double* x, const double* y, double* out, size_t n);
void abs_diff(const double* x, const double* y, double* out, size_t n);
void clamp01(double* x, size_t n);

}  // namespace cshift::kernels
