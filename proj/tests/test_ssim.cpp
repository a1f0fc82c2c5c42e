#include <doctest.h>

#include <cmath>

#include "cshift/models/losses.hpp"
#include "cshift/models/ssim.hpp"
#include "cshift/rng.hpp"
#include "oracles.hpp"

using namespace cshift;

namespace {

template <typename T>
Image<T> random_image(int h, int w, int c, uint64_t seed, T lo = T(0.05), T hi = T(0.95)) {
    Rng rng(seed);
    Image<T> img(h, w, c);
    for (auto& v : img.data) v = lo + (hi - lo) * T(rng.uniform_double());
    return img;
}

}  // namespace

TEST_CASE("ssim of a map with itself is exactly 1 and the loss is 0") {
    const SsimEngine<float> engine;
    const ImageF a = random_image<float>(16, 16, 1, 3);
    const Image<float> s = ssim_map(a, a, engine);
    for (float v : s.data) CHECK(v == doctest::Approx(1.0f).epsilon(1e-6));

    const auto res = composite_loss_images<float>(a, a, LossKind::RegressionL2Ssim, engine);
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("constant 0 vs constant 1: hand-computed loss value") {
    // Means 0 and 1, variances 0: SSIM = C1/(1+C1) everywhere (the border
    // renormalization keeps constants exact). Loss = 0.5*1 + 0.5*(1 - that).
    const SsimEngine<double> engine;
    const ImageD zero(12, 12, 1, 0.0);
    const ImageD one(12, 12, 1, 1.0);
    const double C1 = 1e-4;
    const double expected = 0.5 * 1.0 + 0.5 * (1.0 - C1 / (1.0 + C1));
    const auto res = composite_loss_images<double>(zero, one, LossKind::RegressionL2Ssim, engine);
    CHECK(res.value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("separable ssim matches the direct windowed oracle") {
    const SsimEngine<double> engine;
    for (uint64_t seed : {1ull, 2ull}) {
        const ImageD a = random_image<double>(16, 16, 1, seed);
        const ImageD b = random_image<double>(16, 16, 1, seed + 100);
        std::vector<double> pa(a.data.begin(), a.data.end());
        std::vector<double> pb(b.data.begin(), b.data.end());
        const std::vector<double> s = engine.ssim_plane(pa.data(), pb.data(), 16, 16);
        double mean_impl = 0, mean_oracle = 0;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                const double ref = oracle::ssim_at(pa, pb, 16, 16, y, x);
                REQUIRE(s[y * 16 + x] == doctest::Approx(ref).epsilon(1e-9));
                mean_impl += s[y * 16 + x];
                mean_oracle += ref;
            }
        CHECK(mean_impl / 256 == doctest::Approx(mean_oracle / 256).epsilon(1e-5));
    }
}

TEST_CASE("gaussian filter adjoint is a true adjoint: <Fx, y> == <x, Fty>") {
    const GaussianFilter<double> filt;
    Rng rng(9);
    const int h = 9, w = 13;
    std::vector<double> x(h * w), y(h * w), fx(h * w), fty(h * w), tmp;
    for (auto& v : x) v = rng.uniform_double() - 0.5;
    for (auto& v : y) v = rng.uniform_double() - 0.5;
    filt.filter2d(x.data(), fx.data(), h, w, tmp);
    filt.filter2d_adjoint(y.data(), fty.data(), h, w, tmp);
    double lhs = 0, rhs = 0;
    for (int i = 0; i < h * w; ++i) {
        lhs += fx[i] * y[i];
        rhs += x[i] * fty[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("composite regression loss gradient matches central differences") {
    // Double-precision finite differences, step 1e-3, on random 8x8 inputs.
    const SsimEngine<double> engine;
    for (uint64_t seed : {4ull, 5ull, 6ull}) {
        ImageD pred = random_image<double>(8, 8, 1, seed, 0.1, 0.9);
        const ImageD target = random_image<double>(8, 8, 1, seed + 50, 0.1, 0.9);
        const auto res = composite_loss_images<double>(pred, target, LossKind::RegressionL2Ssim, engine);

        const double step = 1e-3;
        double max_rel = 0;
        for (size_t i = 0; i < pred.data.size(); i += 7) {  // spot-check a spread of pixels
            const double keep = pred.data[i];
            pred.data[i] = keep + step;
            const double up =
                composite_loss_images<double>(pred, target, LossKind::RegressionL2Ssim, engine, nullptr, false)
                    .value;
            pred.data[i] = keep - step;
            const double dn =
                composite_loss_images<double>(pred, target, LossKind::RegressionL2Ssim, engine, nullptr, false)
                    .value;
            pred.data[i] = keep;
            const double fd = (up - dn) / (2 * step);
            const double denom = std::max({std::fabs(fd), std::fabs(res.grad.data[i]), 1e-8});
            max_rel = std::max(max_rel, std::fabs(fd - res.grad.data[i]) / denom);
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("cross-entropy value and gradient") {
    const SsimEngine<double> engine;
    // Uniform prediction over 3 classes vs one-hot target: value = ln 3.
    ImageD pred(4, 4, 3, 1.0 / 3.0);
    ImageD target(4, 4, 3, 0.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) target.at(y, x, 1) = 1.0;
    const auto res = composite_loss_images<double>(pred, target, LossKind::CrossEntropy, engine);
    CHECK(res.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    // FD check on a soft-target case.
    ImageD p2 = random_image<double>(6, 6, 4, 8, 0.1, 0.9);
    ImageD t2 = random_image<double>(6, 6, 4, 9, 0.05, 0.95);
    const auto r2 = composite_loss_images<double>(p2, t2, LossKind::CrossEntropy, engine);
    const double step = 1e-5;
    for (size_t i = 0; i < p2.data.size(); i += 5) {
        const double keep = p2.data[i];
        p2.data[i] = keep + step;
        const double up = composite_loss_images<double>(p2, t2, LossKind::CrossEntropy, engine, nullptr, false).value;
        p2.data[i] = keep - step;
        const double dn = composite_loss_images<double>(p2, t2, LossKind::CrossEntropy, engine, nullptr, false).value;
        p2.data[i] = keep;
        const double fd = (up - dn) / (2 * step);
        REQUIRE(fd == doctest::Approx(r2.grad.data[i]).epsilon(1e-6));
    }
}

TEST_CASE("loss rejects shape mismatches") {
    const SsimEngine<float> engine;
    const ImageF a = random_image<float>(8, 8, 1, 1);
    const ImageF b = random_image<float>(8, 9, 1, 1);
    CHECK_THROWS_AS(composite_loss_images<float>(a, b, LossKind::RegressionL2Ssim, engine), ShapeError);
}

TEST_CASE("target stats cache gives identical results") {
    const SsimEngine<float> engine;
    const ImageF pred = random_image<float>(12, 12, 2, 31);
    const ImageF target = random_image<float>(12, 12, 2, 32);
    const TargetStats<float> stats = make_target_stats(target, engine);
    const auto with_cache =
        composite_loss_images<float>(pred, target, LossKind::RegressionL2Ssim, engine, &stats);
    const auto without =
        composite_loss_images<float>(pred, target, LossKind::RegressionL2Ssim, engine, nullptr);
    CHECK(with_cache.value == without.value);
    CHECK(with_cache.grad.data == without.grad.data);
}
