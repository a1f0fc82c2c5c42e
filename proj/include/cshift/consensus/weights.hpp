#pragma once

#include <cmath>
#include <vector>

#include "cshift/consensus/distance.hpp"

namespace cshift::consensus {

// The selection-ensemble weighting. For every destination pixel, each
// candidate map gets a non-negative weight; weights are normalized to sum
// to one per pixel:
//
//   W[x,y,k] = K(score_k[x,y]) / sum_j K(score_j[x,y])
//
// The score is, by default, a per-pixel similarity: metrics that grow with
// distance are inverted per pixel as  sim = max_j d_j - d + eps,  metrics
// that already grow with similarity (PSNR, SSIM) are used directly. With
// the identity kernel this upweights candidates that agree with the current
// view. The raw-distance reading (kernel applied to dissimilarity, useful
// with the Gaussian kernel or for ablating the literal formula) stays
// available via KernelInput::Distance.

enum class KernelKind { Identity, Constant, Gaussian };
enum class KernelInput { Similarity, Distance };

inline const char* kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::Identity: return "identity";
        case KernelKind::Constant: return "constant";
        case KernelKind::Gaussian: return "gaussian";
    }
    return "?";
}

inline KernelKind kernel_from_name(const std::string& s) {
    if (s == "identity") return KernelKind::Identity;
    if (s == "constant") return KernelKind::Constant;
    if (s == "gaussian") return KernelKind::Gaussian;
    throw ConfigError("unknown kernel '" + s + "' (expected identity|constant|gaussian)");
}

struct WeightOptions {
    KernelKind kernel = KernelKind::Identity;
    KernelInput input = KernelInput::Similarity;
    float gaussian_sigma = 0.25f;
    float eps = 1e-6f;
};

// One candidate entry: a source tag plus its transformed view.
struct Candidate {
    std::string source;
    ImageF map;
};

// The neighborhood of one destination view: every in-edge prediction plus
// the current pseudo-label, all with identical shape.
struct CandidateSet {
    TaskSpec dst;
    std::vector<Candidate> entries;
    int current_index = -1;  // position of the current-view entry

    void validate() const {
        if (entries.empty()) throw ConfigError("candidate set is empty");
        if (current_index < 0 || current_index >= static_cast<int>(entries.size()))
            throw ConfigError("candidate set has no current-view entry");
        for (const auto& e : entries)
            if (!e.map.same_shape(entries.front().map))
                throw ShapeError("candidate maps disagree in shape");
    }

    const ImageF& current() const { return entries[current_index].map; }
};

// h*w*n weight tensor; channel k matches candidate k.
struct EnsembleWeights {
    int h = 0, w = 0, n = 0;
    std::vector<float> data;

    float& at(int y, int x, int k) { return data[(size_t(y) * w + x) * n + k]; }
    const float& at(int y, int x, int k) const { return data[(size_t(y) * w + x) * n + k]; }
};

inline EnsembleWeights compute_weights(const CandidateSet& cands, MetricKind metric,
                                       const WeightOptions& opts, const SsimEngine<float>& ssim) {
    cands.validate();
    const int n = static_cast<int>(cands.entries.size());
    const int h = cands.entries.front().map.h, w = cands.entries.front().map.w;
    const size_t pixels = size_t(h) * w;

    // Per-candidate score maps.
    std::vector<ImageF> scores;
    scores.reserve(n);
    if (metric == MetricKind::Variance) {
        // Deviation from the per-pixel candidate mean (squared, channel-mean).
        const ImageF& first = cands.entries.front().map;
        ImageF mean(first.h, first.w, first.c);
        for (const auto& e : cands.entries)
            kernels::axpy(1.0f, e.map.data.data(), mean.data.data(), mean.data.size());
        kernels::scale(1.0f / n, mean.data.data(), mean.data.size());
        for (const auto& e : cands.entries) {
            ImageF d(h, w, 1);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    float s = 0.0f;
                    for (int ch = 0; ch < first.c; ++ch) {
                        const float dd = e.map.at(y, x, ch) - mean.at(y, x, ch);
                        s += dd * dd;
                    }
                    d.at(y, x, 0) = s / first.c;
                }
            scores.push_back(std::move(d));
        }
    } else {
        for (const auto& e : cands.entries)
            scores.push_back(distance_map(e.map, cands.current(), metric, ssim));
    }

    const bool similarity_metric = larger_is_similar(metric);
    EnsembleWeights weights;
    weights.h = h;
    weights.w = w;
    weights.n = n;
    weights.data.resize(pixels * n);

    std::vector<double> k_of(n);
    for (size_t p = 0; p < pixels; ++p) {
        // Orientation-normalized score per candidate at this pixel.
        double mx = -1e300;
        for (int k = 0; k < n; ++k) mx = std::max(mx, double(scores[k].data[p]));
        for (int k = 0; k < n; ++k) {
            const double raw = scores[k].data[p];
            double v;
            if (opts.input == KernelInput::Similarity) {
                v = similarity_metric ? raw : mx - raw + opts.eps;
            } else {
                if (metric == MetricKind::Psnr) v = (100.0 - raw) / 100.0;
                else if (metric == MetricKind::Ssim) v = 1.0 - raw;
                else v = raw;
            }
            switch (opts.kernel) {
                case KernelKind::Identity: k_of[k] = v; break;
                case KernelKind::Constant: k_of[k] = 1.0; break;
                case KernelKind::Gaussian:
                    k_of[k] = std::exp(-v * v / (2.0 * opts.gaussian_sigma * opts.gaussian_sigma));
                    break;
            }
        }
        double mass = 0.0;
        bool ok = true;
        for (int k = 0; k < n; ++k) {
            if (!(k_of[k] >= 0.0) || !std::isfinite(k_of[k])) ok = false;
            mass += k_of[k];
        }
        if (!ok || mass <= 1e-300) {
            // Degenerate pixel: no kernel mass anywhere, fall back to uniform.
            const float u = static_cast<float>(1.0 / n);
            for (int k = 0; k < n; ++k) weights.data[p * n + k] = u;
        } else {
            for (int k = 0; k < n; ++k)
                weights.data[p * n + k] = static_cast<float>(k_of[k] / mass);
        }
    }
    return weights;
}

}  // namespace cshift::consensus
