#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cshift/common.hpp"
#include "cshift/core/image.hpp"

namespace cshift::eval {

// Two-sample discrepancy: unbiased squared maximum mean discrepancy with an
// RBF kernel, k(u,v) = exp(-|u-v|^2 / (2 sigma^2)).
//
// For equally sized samples the paired-exclusion form
//   1/(m(m-1)) sum_{i!=j} [k(xi,xj) + k(yi,yj) - k(xi,yj) - k(xj,yi)]
// is used, which is exactly zero when Y is the same list as X. For m != n
// the cross term averages over all m*n pairs. Either way the estimate may
// be slightly negative on same-distribution samples.

using SampleEmbedding = std::vector<float>;

struct MmdOptions {
    bool median_heuristic = true;  // sigma = median pairwise distance of X u Y
    double sigma = 1.0;            // used when median_heuristic is false
};

namespace mmd_detail {

inline double sq_dist(const SampleEmbedding& a, const SampleEmbedding& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return s;
}

inline double median_pairwise_distance(const std::vector<SampleEmbedding>& pool) {
    std::vector<double> dists;
    dists.reserve(pool.size() * (pool.size() - 1) / 2);
    for (size_t i = 0; i < pool.size(); ++i)
        for (size_t j = i + 1; j < pool.size(); ++j) dists.push_back(std::sqrt(sq_dist(pool[i], pool[j])));
    if (dists.empty()) return 0.0;
    const size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    return dists[mid];
}

}  // namespace mmd_detail

inline double mmd2_unbiased(const std::vector<SampleEmbedding>& X, const std::vector<SampleEmbedding>& Y,
                            const MmdOptions& opts = {}) {
    const size_t m = X.size(), n = Y.size();
    if (m < 2 || n < 2) throw ConfigError("mmd2_unbiased needs at least 2 samples per side");
    const size_t dim = X[0].size();
    for (const auto& v : X)
        if (v.size() != dim) throw ShapeError("mmd2_unbiased: inconsistent embedding dimension");
    for (const auto& v : Y)
        if (v.size() != dim) throw ShapeError("mmd2_unbiased: inconsistent embedding dimension");

    double sigma = opts.sigma;
    if (opts.median_heuristic) {
        std::vector<SampleEmbedding> pool;
        pool.reserve(m + n);
        pool.insert(pool.end(), X.begin(), X.end());
        pool.insert(pool.end(), Y.begin(), Y.end());
        sigma = mmd_detail::median_pairwise_distance(pool);
        if (sigma <= 0.0) sigma = 1.0;  // all points coincide
    }
    if (sigma <= 0.0) throw ConfigError("mmd2_unbiased: sigma must be positive");
    const double gamma = 1.0 / (2.0 * sigma * sigma);
    auto k = [&](const SampleEmbedding& a, const SampleEmbedding& b) {
        return std::exp(-mmd_detail::sq_dist(a, b) * gamma);
    };

    if (m == n) {
        // Accumulate the h-statistic per pair so identical X and Y cancel
        // term by term and the estimate is exactly zero.
        double total = 0.0;
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j)
                if (i != j)
                    total += k(X[i], X[j]) + k(Y[i], Y[j]) - k(X[i], Y[j]) - k(X[j], Y[i]);
        return total / (static_cast<double>(m) * (m - 1));
    }

    double kxx = 0.0, kyy = 0.0, cross = 0.0;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
            if (i != j) kxx += k(X[i], X[j]);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j) kyy += k(Y[i], Y[j]);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) cross += k(X[i], Y[j]);
    kxx /= static_cast<double>(m) * (m - 1);
    kyy /= static_cast<double>(n) * (n - 1);
    cross /= static_cast<double>(m) * n;
    return kxx + kyy - 2.0 * cross;
}

// Flattens a map into an embedding, optionally subsampling the grid to keep
// dimensions manageable.
inline SampleEmbedding embed_image(const ImageF& img, int stride = 1) {
    SampleEmbedding out;
    out.reserve((size_t(img.h) / stride + 1) * (size_t(img.w) / stride + 1) * img.c);
    for (int y = 0; y < img.h; y += stride)
        for (int x = 0; x < img.w; x += stride)
            for (int ch = 0; ch < img.c; ++ch) out.push_back(img.at(y, x, ch));
    return out;
}

}  // namespace cshift::eval
