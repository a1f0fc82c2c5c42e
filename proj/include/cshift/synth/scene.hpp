#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "cshift/core/image.hpp"
#include "cshift/core/imageops.hpp"
#include "cshift/rng.hpp"
#include "cshift/synth/tasks.hpp"

namespace cshift::synth {

// Procedural scene generator: layered primitives over a slanted background
// plane, rendered into mutually consistent ground-truth views. Everything is
// a pure function of (config seed, sample id).

struct SceneConfig {
    int h = 64, w = 64;
    int n_shapes = 5;
    int class_count = 6;  // seg classes, background included
    uint64_t seed = 1;
    bool normals_two_channel = false;

    void validate() const {
        if (h < 16 || w < 16) throw ConfigError("scene size must be at least 16x16");
        if (n_shapes < 1) throw ConfigError("n_shapes must be >= 1");
        if (class_count < 2 || class_count > 16) throw ConfigError("class_count must be in [2,16]");
        if (n_shapes > class_count) throw ConfigError("n_shapes must not exceed class_count");
    }
};

struct SceneViews {
    PredictionMap rgb;
    PredictionMap depth;
    PredictionMap normals;
    PredictionMap seg;
};

// Normal encoding: component n in [-1,1] is stored as (n+1)/2.
inline float encode_normal(float n) { return 0.5f * (n + 1.0f); }
inline float decode_normal(float v) { return 2.0f * v - 1.0f; }

// Unit normals from depth central differences; `gain` converts depth units
// per pixel into slope (scaled with image size so slanted planes stay
// visibly tilted at any resolution).
inline ImageF normals_from_depth(const ImageF& depth, float gain) {
    const int h = depth.h, w = depth.w;
    ImageF out(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int xm = clamp_index(x - 1, w), xp = clamp_index(x + 1, w);
            const int ym = clamp_index(y - 1, h), yp = clamp_index(y + 1, h);
            const float sx = (xp - xm) > 0 ? float(xp - xm) : 1.0f;
            const float sy = (yp - ym) > 0 ? float(yp - ym) : 1.0f;
            const float ddx = (depth.at(y, xp, 0) - depth.at(y, xm, 0)) / sx * gain;
            const float ddy = (depth.at(yp, x, 0) - depth.at(ym, x, 0)) / sy * gain;
            const float inv = 1.0f / std::sqrt(ddx * ddx + ddy * ddy + 1.0f);
            out.at(y, x, 0) = -ddx * inv;
            out.at(y, x, 1) = -ddy * inv;
            out.at(y, x, 2) = inv;
        }
    return out;
}

namespace scene_detail {

enum class ShapeKind { Rectangle, Disk, GradientPlane };

struct Shape {
    ShapeKind kind;
    float cx, cy;        // center, relative coords
    float rx, ry;        // half extents
    float depth0;        // plane depth at center
    float slope_x, slope_y;  // depth slope (gradient-plane only)
    int seg_class;
    std::array<float, 3> albedo;
};

// Scene-wide class palette, a function of the config seed only, so the
// rgb <-> seg relation is stable across the dataset.
inline std::array<float, 3> palette_color(uint64_t cfg_seed, int cls) {
    Rng rng(hash_seed({cfg_seed, 0xa1b2u, static_cast<uint64_t>(cls)}));
    return {rng.uniform_range(0.3f, 0.85f), rng.uniform_range(0.3f, 0.85f), rng.uniform_range(0.3f, 0.85f)};
}

}  // namespace scene_detail

inline SceneViews generate_scene(const SceneConfig& cfg, int id) {
    cfg.validate();
    using namespace scene_detail;
    Rng rng(hash_seed({cfg.seed, static_cast<uint64_t>(id), 0x5ce11eull}));

    // Background plane, kept mid-range so shading never saturates.
    const float bg0 = rng.uniform_range(0.68f, 0.85f);
    const float bgx = rng.uniform_range(-0.16f, 0.16f);
    const float bgy = rng.uniform_range(-0.16f, 0.16f);
    const std::array<float, 3> bg_albedo_base = palette_color(cfg.seed, 0);

    std::vector<Shape> shapes;
    for (int j = 0; j < cfg.n_shapes; ++j) {
        Shape s;
        const int pick = static_cast<int>(rng.uniform_index(3));
        s.kind = pick == 0 ? ShapeKind::Rectangle : (pick == 1 ? ShapeKind::Disk : ShapeKind::GradientPlane);
        s.cx = rng.uniform_range(0.15f, 0.85f);
        s.cy = rng.uniform_range(0.15f, 0.85f);
        s.rx = rng.uniform_range(0.08f, 0.28f);
        s.ry = rng.uniform_range(0.08f, 0.28f);
        s.depth0 = rng.uniform_range(0.18f, 0.6f);
        if (s.kind == ShapeKind::GradientPlane) {
            s.slope_x = rng.uniform_range(-0.3f, 0.3f);
            s.slope_y = rng.uniform_range(-0.3f, 0.3f);
        } else {
            s.slope_x = s.slope_y = 0.0f;
        }
        s.seg_class = cfg.class_count >= 2 ? 1 + (j % (cfg.class_count - 1)) : 0;
        const auto base = palette_color(cfg.seed, s.seg_class);
        const float jitter = rng.uniform_range(-0.05f, 0.05f);
        for (int ch = 0; ch < 3; ++ch)
            s.albedo[ch] = std::min(0.9f, std::max(0.2f, base[ch] + jitter));
        shapes.push_back(s);
    }

    TaskSpec depth_task = task_by_name("depth", cfg.class_count);
    TaskSpec rgb_task = task_by_name("rgb", cfg.class_count);
    TaskSpec normals_task = task_by_name("normals", cfg.class_count, cfg.normals_two_channel);
    TaskSpec seg_task = task_by_name("seg", cfg.class_count);

    PredictionMap depth(depth_task, cfg.h, cfg.w);
    PredictionMap seg(seg_task, cfg.h, cfg.w);
    ImageF albedo_map(cfg.h, cfg.w, 3);
    ImageF class_map(cfg.h, cfg.w, 1);

    for (int y = 0; y < cfg.h; ++y)
        for (int x = 0; x < cfg.w; ++x) {
            const float u = (x + 0.5f) / cfg.w, v = (y + 0.5f) / cfg.h;
            float d = bg0 + bgx * (u - 0.5f) + bgy * (v - 0.5f);
            std::array<float, 3> alb = bg_albedo_base;
            int cls = 0;
            for (const auto& s : shapes) {
                const float dx = (u - s.cx) / s.rx, dy = (v - s.cy) / s.ry;
                bool inside = false;
                switch (s.kind) {
                    case ShapeKind::Rectangle:
                    case ShapeKind::GradientPlane:
                        inside = std::fabs(dx) <= 1.0f && std::fabs(dy) <= 1.0f;
                        break;
                    case ShapeKind::Disk:
                        inside = dx * dx + dy * dy <= 1.0f;
                        break;
                }
                if (!inside) continue;
                const float sd = s.depth0 + s.slope_x * (u - s.cx) + s.slope_y * (v - s.cy);
                if (sd < d) {  // nearer surface wins
                    d = sd;
                    alb = s.albedo;
                    cls = s.seg_class;
                }
            }
            depth.image.at(y, x, 0) = std::min(0.95f, std::max(0.1f, d));
            class_map.at(y, x, 0) = static_cast<float>(cls);
            for (int ch = 0; ch < 3; ++ch) albedo_map.at(y, x, ch) = alb[ch];
        }

    for (int y = 0; y < cfg.h; ++y)
        for (int x = 0; x < cfg.w; ++x)
            for (int ch = 0; ch < seg_task.channels; ++ch)
                seg.image.at(y, x, ch) = (static_cast<int>(class_map.at(y, x, 0)) == ch) ? 1.0f : 0.0f;

    const float gain = 0.5f * static_cast<float>(std::min(cfg.h, cfg.w));
    ImageF n = normals_from_depth(depth.image, gain);

    PredictionMap normals(normals_task, cfg.h, cfg.w);
    for (int y = 0; y < cfg.h; ++y)
        for (int x = 0; x < cfg.w; ++x)
            for (int ch = 0; ch < normals_task.channels; ++ch)
                normals.image.at(y, x, ch) = encode_normal(n.at(y, x, ch));

    // Lambertian shading with a per-sample light and mild depth attenuation;
    // band chosen so rgb stays well inside (0,1).
    const float lx = rng.uniform_range(-0.45f, 0.45f);
    const float ly = rng.uniform_range(-0.45f, 0.45f);
    const float lnorm = 1.0f / std::sqrt(lx * lx + ly * ly + 1.0f);
    PredictionMap rgb(rgb_task, cfg.h, cfg.w);
    for (int y = 0; y < cfg.h; ++y)
        for (int x = 0; x < cfg.w; ++x) {
            const float ndl = (n.at(y, x, 0) * lx + n.at(y, x, 1) * ly + n.at(y, x, 2)) * lnorm;
            const float lambert = ndl > 0.0f ? ndl : 0.0f;
            const float shade = 0.45f + 0.5f * lambert;
            const float atten = 1.0f - 0.25f * depth.image.at(y, x, 0);
            for (int ch = 0; ch < 3; ++ch) {
                float vcol = albedo_map.at(y, x, ch) * shade * atten;
                rgb.image.at(y, x, ch) = std::min(0.95f, std::max(0.05f, vcol));
            }
        }

    return SceneViews{std::move(rgb), std::move(depth), std::move(normals), std::move(seg)};
}

}  // namespace cshift::synth
