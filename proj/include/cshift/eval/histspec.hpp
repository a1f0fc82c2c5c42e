#pragma once

#include <algorithm>
#include <vector>

#include "cshift/core/image.hpp"

namespace cshift::eval {

// Histogram specification: remaps a single-channel map so its value
// distribution matches a reference map's, via out = Ginv(F(source)).
// Source-side quantiles use the bin-midpoint convention (a constant source
// maps to the reference median, not to an edge of the range); the reference
// inverse CDF interpolates linearly between bin edges. Output is clamped to
// the reference value range; per-pixel weak ordering is preserved since the
// whole mapping is monotone.
inline ImageF histogram_specification_values(const ImageF& source, const std::vector<float>& reference,
                                             int bins = 256) {
    if (source.c != 1) throw ShapeError("histogram_specification expects single-channel maps");
    if (reference.empty()) throw ConfigError("histogram_specification: empty reference");
    if (bins < 2) throw ConfigError("histogram_specification: bins must be >= 2");

    auto bin_of = [bins](float v) {
        int b = static_cast<int>(v * bins);
        return std::min(bins - 1, std::max(0, b));
    };

    std::vector<double> hist_s(bins, 0.0), hist_r(bins, 0.0);
    for (float v : source.data) hist_s[bin_of(v)] += 1.0;
    for (float v : reference) hist_r[bin_of(v)] += 1.0;
    const double ns = static_cast<double>(source.data.size());
    const double nr = static_cast<double>(reference.size());

    std::vector<double> cum_s(bins + 1, 0.0), cum_r(bins + 1, 0.0);
    for (int b = 0; b < bins; ++b) {
        cum_s[b + 1] = cum_s[b] + hist_s[b];
        cum_r[b + 1] = cum_r[b] + hist_r[b];
    }

    float ref_min = reference[0], ref_max = reference[0];
    for (float v : reference) {
        ref_min = std::min(ref_min, v);
        ref_max = std::max(ref_max, v);
    }

    ImageF out(source.h, source.w, 1);
    for (size_t i = 0; i < source.data.size(); ++i) {
        const int b = bin_of(source.data[i]);
        const double t = (cum_s[b] + 0.5 * hist_s[b]) / ns;  // source quantile
        const double target = t * nr;
        // Smallest bin whose cumulative mass reaches the target.
        const int j = static_cast<int>(
            std::lower_bound(cum_r.begin() + 1, cum_r.end(), target) - (cum_r.begin() + 1));
        const int jb = std::min(j, bins - 1);
        double frac = 0.5;
        if (hist_r[jb] > 0.0) frac = (target - cum_r[jb]) / hist_r[jb];
        frac = std::min(1.0, std::max(0.0, frac));
        float v = static_cast<float>((jb + frac) / bins);
        v = std::min(ref_max, std::max(ref_min, v));
        out.data[i] = v;
    }
    return out;
}

inline ImageF histogram_specification(const ImageF& source, const ImageF& reference, int bins = 256) {
    if (reference.c != 1) throw ShapeError("histogram_specification expects single-channel maps");
    return histogram_specification_values(source, reference.data, bins);
}

inline PredictionMap histogram_specification(const PredictionMap& source, const PredictionMap& reference,
                                             int bins = 256) {
    if (source.task.kind != TaskKind::Regression || reference.task.kind != TaskKind::Regression)
        throw ConfigError("histogram_specification applies to regression maps");
    return PredictionMap(source.task, histogram_specification(source.image, reference.image, bins));
}

}  // namespace cshift::eval
