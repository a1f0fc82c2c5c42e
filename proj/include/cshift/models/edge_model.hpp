#pragma once

#include <cmath>
#include <cstring>
#include <vector>

#include "cshift/core/image.hpp"
#include "cshift/core/imageops.hpp"
#include "cshift/kernels/kernels.hpp"
#include "cshift/rng.hpp"

namespace cshift {

// Edge architectures. PatchLinear maps a 5x5 input patch linearly to the
// output channels: convex on linear tasks and cheap enough to train dozens
// of edges in minutes. ShallowConv stacks three 3x3 conv layers (width 16,
// tanh) for tasks that need nonlinearity. Both end in a range-enforcing
// head: sigmoid for regression targets, per-pixel softmax for
// classification, so outputs satisfy the map invariants structurally.

enum class ArchKind { PatchLinear, ShallowConv };

inline const char* arch_name(ArchKind a) {
    return a == ArchKind::PatchLinear ? "patch_linear" : "shallow_conv";
}

inline ArchKind arch_from_name(const std::string& s) {
    if (s == "patch_linear") return ArchKind::PatchLinear;
    if (s == "shallow_conv") return ArchKind::ShallowConv;
    throw ConfigError("unknown architecture '" + s + "'");
}

namespace conv_detail {

// Gathers the (2r+1)^2 * c_in patch around (y,x) with replicate borders.
// Interior rows are contiguous in memory and copied in one go.
template <typename T>
inline void gather_patch(const Image<T>& in, int y, int x, int r, T* buf) {
    const int w = in.w, c = in.c;
    const int row_len = (2 * r + 1) * c;
    for (int dy = -r; dy <= r; ++dy) {
        const T* row = in.row(clamp_index(y + dy, in.h));
        T* dst = buf + (dy + r) * row_len;
        if (x - r >= 0 && x + r < w) {
            std::memcpy(dst, row + size_t(x - r) * c, sizeof(T) * row_len);
        } else {
            for (int dx = -r; dx <= r; ++dx) {
                const T* src = row + size_t(clamp_index(x + dx, w)) * c;
                for (int ch = 0; ch < c; ++ch) dst[(dx + r) * c + ch] = src[ch];
            }
        }
    }
}

// out[y,x,co] = b[co] + W[co] . patch(y,x)
template <typename T>
void conv_forward(const Image<T>& in, const T* W, const T* b, int r, int c_out, Image<T>& out) {
    const int taps = (2 * r + 1) * (2 * r + 1) * in.c;
    std::vector<T> patch(taps);
    out = Image<T>(in.h, in.w, c_out);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
            gather_patch(in, y, x, r, patch.data());
            T* o = &out.at(y, x, 0);
            for (int co = 0; co < c_out; ++co)
                o[co] = b[co] + kernels::dot(W + size_t(co) * taps, patch.data(), taps);
        }
}

// Accumulates dL/dW and dL/db given dL/d(pre-activation) `dz`.
template <typename T>
void conv_backward_params(const Image<T>& in, const Image<T>& dz, int r, T* grad_W, T* grad_b) {
    const int taps = (2 * r + 1) * (2 * r + 1) * in.c;
    const int c_out = dz.c;
    std::vector<T> patch(taps);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
            gather_patch(in, y, x, r, patch.data());
            const T* g = &dz.at(y, x, 0);
            for (int co = 0; co < c_out; ++co) {
                kernels::axpy(g[co], patch.data(), grad_W + size_t(co) * taps, taps);
                grad_b[co] += g[co];
            }
        }
}

// dL/d(input), the adjoint of the replicate-padded convolution (border
// gradients fold back onto the clamped source pixels).
template <typename T>
void conv_backward_input(const Image<T>& dz, const T* W, int r, int c_in, Image<T>& grad_in) {
    const int taps1d = 2 * r + 1;
    const int taps = taps1d * taps1d * c_in;
    grad_in = Image<T>(dz.h, dz.w, c_in);
    for (int y = 0; y < dz.h; ++y)
        for (int x = 0; x < dz.w; ++x) {
            const T* g = &dz.at(y, x, 0);
            for (int co = 0; co < dz.c; ++co) {
                const T gv = g[co];
                if (gv == T(0)) continue;
                const T* wrow = W + size_t(co) * taps;
                for (int dy = -r; dy <= r; ++dy) {
                    T* grow = &grad_in.at(clamp_index(y + dy, dz.h), 0, 0);
                    const T* wseg = wrow + (dy + r) * taps1d * c_in;
                    for (int dx = -r; dx <= r; ++dx) {
                        T* gdst = grow + size_t(clamp_index(x + dx, dz.w)) * c_in;
                        const T* wsrc = wseg + (dx + r) * c_in;
                        for (int ch = 0; ch < c_in; ++ch) gdst[ch] += gv * wsrc[ch];
                    }
                }
            }
        }
}

}  // namespace conv_detail

// Architecture geometry: parameter layout per layer is [W | b], layers
// concatenated in order.
struct LayerDims {
    int radius, c_in, c_out;
    size_t weight_count() const {
        return size_t(2 * radius + 1) * (2 * radius + 1) * c_in * c_out;
    }
    size_t param_count() const { return weight_count() + c_out; }
};

inline std::vector<LayerDims> arch_layers(ArchKind arch, int c_in, int c_out) {
    if (arch == ArchKind::PatchLinear) return {{2, c_in, c_out}};
    return {{1, c_in, 16}, {1, 16, 16}, {1, 16, c_out}};
}

inline size_t arch_param_count(ArchKind arch, int c_in, int c_out) {
    size_t n = 0;
    for (const auto& l : arch_layers(arch, c_in, c_out)) n += l.param_count();
    return n;
}

template <typename T>
struct ForwardCache {
    std::vector<Image<T>> pre;    // pre-activation per layer
    std::vector<Image<T>> post;   // post-activation per layer (tanh), last = pre-head logits
    Image<T> output;              // after head
};

// Numeric core shared by the float production path and the double path the
// gradient checks instantiate.
template <typename T>
struct ModelCore {
    ArchKind arch;
    int c_in, c_out;
    TaskKind head;
    std::vector<T> params;

    ModelCore(ArchKind a, int ci, int co, TaskKind h)
        : arch(a), c_in(ci), c_out(co), head(h), params(arch_param_count(a, ci, co), T(0)) {}

    void init(uint64_t seed) {
        Rng rng(hash_seed({seed, 0x1417ull}));
        size_t off = 0;
        for (const auto& l : arch_layers(arch, c_in, c_out)) {
            const int fan_in = (2 * l.radius + 1) * (2 * l.radius + 1) * l.c_in;
            const int fan_out = (2 * l.radius + 1) * (2 * l.radius + 1) * l.c_out;
            const T bound = std::sqrt(T(6) / T(fan_in + fan_out));
            for (size_t i = 0; i < l.weight_count(); ++i)
                params[off + i] = T(2) * bound * T(rng.uniform_float()) - bound;
            off += l.weight_count();
            for (int i = 0; i < l.c_out; ++i) params[off + i] = T(0);
            off += l.c_out;
        }
    }

    Image<T> forward(const Image<T>& in) const {
        ForwardCache<T> cache;
        run_forward(in, cache, /*keep=*/false);
        return std::move(cache.output);
    }

    void run_forward(const Image<T>& in, ForwardCache<T>& cache, bool keep) const {
        if (in.c != c_in) throw ShapeError("model input has wrong channel count");
        const auto layers = arch_layers(arch, c_in, c_out);
        cache.pre.clear();
        cache.post.clear();
        if (keep) {
            cache.pre.reserve(layers.size());
            cache.post.reserve(layers.size());
        }
        Image<T> holder;
        const Image<T>* cur = &in;
        size_t off = 0;
        for (size_t li = 0; li < layers.size(); ++li) {
            const auto& l = layers[li];
            Image<T> z;
            conv_detail::conv_forward(*cur, params.data() + off, params.data() + off + l.weight_count(),
                                      l.radius, l.c_out, z);
            off += l.param_count();
            if (li + 1 == layers.size()) {
                if (keep) cache.pre.push_back(z);
                cache.output = std::move(z);
            } else {
                Image<T> act = z;
                for (auto& v : act.data) v = std::tanh(v);
                if (keep) {
                    cache.pre.push_back(std::move(z));
                    cache.post.push_back(std::move(act));
                    cur = &cache.post.back();
                } else {
                    holder = std::move(act);
                    cur = &holder;
                }
            }
        }
        apply_head(cache.output);
    }

    void apply_head(Image<T>& z) const {
        if (head == TaskKind::Regression) {
            for (auto& v : z.data) v = T(1) / (T(1) + std::exp(-v));
        } else {
            for (int y = 0; y < z.h; ++y)
                for (int x = 0; x < z.w; ++x) {
                    T* p = &z.at(y, x, 0);
                    T mx = p[0];
                    for (int ch = 1; ch < z.c; ++ch) mx = std::max(mx, p[ch]);
                    T s = T(0);
                    for (int ch = 0; ch < z.c; ++ch) {
                        p[ch] = std::exp(p[ch] - mx);
                        s += p[ch];
                    }
                    const T inv = T(1) / s;
                    for (int ch = 0; ch < z.c; ++ch) p[ch] *= inv;
                }
        }
    }

    // Backward from dL/d(head output); returns dL/d(params). The input is
    // training data, so no input gradient is produced.
    std::vector<T> backward(const Image<T>& in, const ForwardCache<T>& cache,
                            const Image<T>& grad_out) const {
        const auto layers = arch_layers(arch, c_in, c_out);
        std::vector<T> grads(params.size(), T(0));

        // Head jacobian.
        Image<T> dz = grad_out;
        const Image<T>& out = cache.output;
        if (head == TaskKind::Regression) {
            for (size_t i = 0; i < dz.data.size(); ++i)
                dz.data[i] *= out.data[i] * (T(1) - out.data[i]);
        } else {
            for (int y = 0; y < dz.h; ++y)
                for (int x = 0; x < dz.w; ++x) {
                    const T* o = &out.at(y, x, 0);
                    T* g = &dz.at(y, x, 0);
                    T s = T(0);
                    for (int ch = 0; ch < dz.c; ++ch) s += g[ch] * o[ch];
                    for (int ch = 0; ch < dz.c; ++ch) g[ch] = o[ch] * (g[ch] - s);
                }
        }

        // Layer offsets.
        std::vector<size_t> offsets(layers.size());
        size_t off = 0;
        for (size_t li = 0; li < layers.size(); ++li) {
            offsets[li] = off;
            off += layers[li].param_count();
        }

        for (size_t li = layers.size(); li-- > 0;) {
            const auto& l = layers[li];
            const Image<T>& layer_in = li == 0 ? in : cache.post[li - 1];
            conv_detail::conv_backward_params(layer_in, dz, l.radius, grads.data() + offsets[li],
                                              grads.data() + offsets[li] + l.weight_count());
            if (li == 0) break;
            Image<T> gin;
            conv_detail::conv_backward_input(dz, params.data() + offsets[li], l.radius, l.c_in, gin);
            // tanh' = 1 - post^2
            const Image<T>& post = cache.post[li - 1];
            for (size_t i = 0; i < gin.data.size(); ++i)
                gin.data[i] *= T(1) - post.data[i] * post.data[i];
            dz = std::move(gin);
        }
        return grads;
    }
};

// A trainable graph edge: source view in, destination view out.
struct EdgeModel {
    TaskSpec src, dst;
    ModelCore<float> core;

    EdgeModel(TaskSpec s, TaskSpec d, ArchKind arch)
        : src(std::move(s)), dst(std::move(d)), core(arch, src.channels, dst.channels, dst.kind) {}

    void init(uint64_t seed) { core.init(seed); }

    PredictionMap forward(const PredictionMap& in) const {
        if (!(in.task == src))
            throw ShapeError("edge " + src.name + "->" + dst.name + " fed with task '" + in.task.name + "'");
        return PredictionMap(dst, core.forward(in.image));
    }

    // Penultimate activations: the last hidden layer for ShallowConv, the
    // pre-head logits for PatchLinear. Used as the learned sample embedding.
    ImageF features(const ImageF& in) const {
        ForwardCache<float> cache;
        core.run_forward(in, cache, /*keep=*/true);
        return cache.post.empty() ? cache.pre.back() : cache.post.back();
    }
};

}  // namespace cshift
