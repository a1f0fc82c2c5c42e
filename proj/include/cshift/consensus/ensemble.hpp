#pragma once

#include "cshift/consensus/median.hpp"
#include "cshift/consensus/weights.hpp"

namespace cshift::consensus {

// The selection ensemble: per pixel and per channel, the weighted median of
// the candidate values under that pixel's (channel-shared) weights.
// Classification outputs are renormalized to an exact simplex afterwards.
inline PredictionMap cshift_select(const CandidateSet& cands, const EnsembleWeights& weights) {
    cands.validate();
    const ImageF& first = cands.entries.front().map;
    const int n = static_cast<int>(cands.entries.size());
    if (weights.h != first.h || weights.w != first.w || weights.n != n)
        throw ShapeError("cshift_select: weights do not match candidate set");

    PredictionMap out(cands.dst, first.h, first.w);
    std::vector<float> vals(n), wts(n);
    for (int y = 0; y < first.h; ++y)
        for (int x = 0; x < first.w; ++x) {
            for (int k = 0; k < n; ++k) wts[k] = weights.at(y, x, k);
            for (int ch = 0; ch < first.c; ++ch) {
                for (int k = 0; k < n; ++k) vals[k] = cands.entries[k].map.at(y, x, ch);
                out.image.at(y, x, ch) = weighted_median(vals.data(), wts.data(), n);
            }
        }
    if (cands.dst.kind == TaskKind::Classification) renormalize_simplex(out.image);
    return out;
}

// NGC-style baseline: plain per-pixel mean over the candidate set.
inline PredictionMap mean_ensemble(const CandidateSet& cands) {
    cands.validate();
    const ImageF& first = cands.entries.front().map;
    PredictionMap out(cands.dst, first.h, first.w);
    for (const auto& e : cands.entries)
        kernels::axpy(1.0f, e.map.data.data(), out.image.data.data(), out.image.data.size());
    kernels::scale(1.0f / static_cast<float>(cands.entries.size()), out.image.data.data(),
                   out.image.data.size());
    if (cands.dst.kind == TaskKind::Classification) renormalize_simplex(out.image);
    return out;
}

}  // namespace cshift::consensus
