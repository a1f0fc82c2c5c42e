#pragma once

#include <cstddef>

// Internal: per-ISA implementation table. Not part of the public surface.

namespace cshift::kernels::detail {

struct Table {
    float (*sum)(const float*, size_t);
    float (*dot)(const float*, const float*, size_t);
    float (*sum_abs_diff)(const float*, const float*, size_t);
    float (*sum_sq_diff)(const float*, const float*, size_t);
    void (*axpy)(float, const float*, float*, size_t);
    void (*scale)(float, float*, size_t);
    void (*add)(const float*, const float*, float*, size_t);
    void (*sub)(const float*, const float*, float*, size_t);
    void (*mul)(const float*, const float*, float*, size_t);
    void (*abs_diff)(const float*, const float*, float*, size_t);
    void (*clamp01)(float*, size_t);
};

const Table& scalar_table();
const Table& avx2_table();  // valid only when the CPU supports AVX2

}  // namespace cshift::kernels::detail
