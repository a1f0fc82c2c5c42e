#include <doctest.h>

#include <cmath>
#include <vector>

#include "cshift/kernels/kernels.hpp"
#include "cshift/kernels/kernels_table.hpp"
#include "cshift/rng.hpp"

using namespace cshift;

namespace {

std::vector<float> random_vec(size_t n, uint64_t seed, float lo = -2.0f, float hi = 2.0f) {
    Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = rng.uniform_range(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("scalar and avx2 kernels are bit-identical") {
    if (!kernels::cpu_has_avx2()) {
        MESSAGE("no AVX2 on this machine; equivalence suite skipped");
        return;
    }
    const auto& s = kernels::detail::scalar_table();
    const auto& v = kernels::detail::avx2_table();

    // Sizes straddling the 8-lane block boundary plus larger buffers.
    for (size_t n : {size_t(1), size_t(3), size_t(7), size_t(8), size_t(9), size_t(15), size_t(16),
                     size_t(75), size_t(129), size_t(4096), size_t(4099)}) {
        const auto x = random_vec(n, 11 * n + 1);
        const auto y = random_vec(n, 13 * n + 7);

        CHECK(s.sum(x.data(), n) == v.sum(x.data(), n));
        CHECK(s.dot(x.data(), y.data(), n) == v.dot(x.data(), y.data(), n));
        CHECK(s.sum_abs_diff(x.data(), y.data(), n) == v.sum_abs_diff(x.data(), y.data(), n));
        CHECK(s.sum_sq_diff(x.data(), y.data(), n) == v.sum_sq_diff(x.data(), y.data(), n));

        std::vector<float> a1 = y, a2 = y;
        s.axpy(0.37f, x.data(), a1.data(), n);
        v.axpy(0.37f, x.data(), a2.data(), n);
        CHECK(a1 == a2);

        a1 = x;
        a2 = x;
        s.scale(-1.113f, a1.data(), n);
        v.scale(-1.113f, a2.data(), n);
        CHECK(a1 == a2);

        std::vector<float> o1(n), o2(n);
        s.add(x.data(), y.data(), o1.data(), n);
        v.add(x.data(), y.data(), o2.data(), n);
        CHECK(o1 == o2);
        s.sub(x.data(), y.data(), o1.data(), n);
        v.sub(x.data(), y.data(), o2.data(), n);
        CHECK(o1 == o2);
        s.mul(x.data(), y.data(), o1.data(), n);
        v.mul(x.data(), y.data(), o2.data(), n);
        CHECK(o1 == o2);
        s.abs_diff(x.data(), y.data(), o1.data(), n);
        v.abs_diff(x.data(), y.data(), o2.data(), n);
        CHECK(o1 == o2);

        a1 = x;
        a2 = x;
        s.clamp01(a1.data(), n);
        v.clamp01(a2.data(), n);
        CHECK(a1 == a2);
    }
}

TEST_CASE("reductions agree with a double-precision reference") {
    for (size_t n : {size_t(5), size_t(64), size_t(1000)}) {
        const auto x = random_vec(n, 5 * n);
        const auto y = random_vec(n, 5 * n + 3);
        double ref_sum = 0, ref_dot = 0, ref_abs = 0, ref_sq = 0;
        for (size_t i = 0; i < n; ++i) {
            ref_sum += x[i];
            ref_dot += double(x[i]) * y[i];
            ref_abs += std::fabs(double(x[i]) - y[i]);
            const double d = double(x[i]) - y[i];
            ref_sq += d * d;
        }
        CHECK(kernels::sum(x.data(), n) == doctest::Approx(ref_sum).epsilon(1e-4));
        CHECK(kernels::dot(x.data(), y.data(), n) == doctest::Approx(ref_dot).epsilon(1e-4));
        CHECK(kernels::sum_abs_diff(x.data(), y.data(), n) == doctest::Approx(ref_abs).epsilon(1e-4));
        CHECK(kernels::sum_sq_diff(x.data(), y.data(), n) == doctest::Approx(ref_sq).epsilon(1e-4));
    }
}

TEST_CASE("clamp01 pins values into the unit interval") {
    std::vector<float> v = {-1.0f, -0.0f, 0.0f, 0.25f, 1.0f, 2.5f};
    kernels::clamp01(v.data(), v.size());
    CHECK(v == std::vector<float>{0.0f, 0.0f, 0.0f, 0.25f, 1.0f, 1.0f});
}

TEST_CASE("active isa resolves and can be forced") {
    const kernels::Isa isa = kernels::active_isa();
    if (kernels::cpu_has_avx2()) {
        kernels::force_isa(kernels::Isa::scalar);
        CHECK(kernels::active_isa() == kernels::Isa::scalar);
        kernels::force_isa(kernels::Isa::avx2);
        CHECK(kernels::active_isa() == kernels::Isa::avx2);
    }
    kernels::force_isa(isa);
}
