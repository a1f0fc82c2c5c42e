#pragma once

#include <cmath>

#include "cshift/core/image.hpp"
#include "cshift/core/imageops.hpp"
#include "cshift/synth/tasks.hpp"

namespace cshift::synth {

// Deterministic per-pixel transforms of the rgb view. These play the role
// of "trivial experts": tasks whose ground truth is computable in closed
// form from the input image.

inline float luminance(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

inline ImageF rgb_to_grayscale(const ImageF& rgb) {
    ImageF out(rgb.h, rgb.w, 1);
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x)
            out.at(y, x, 0) = luminance(rgb.at(y, x, 0), rgb.at(y, x, 1), rgb.at(y, x, 2));
    return out;
}

// Standard RGB -> HSV; hue scaled to [0,1). Gray pixels get H = S = 0.
inline ImageF rgb_to_hsv(const ImageF& rgb) {
    ImageF out(rgb.h, rgb.w, 3);
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x) {
            const float r = rgb.at(y, x, 0), g = rgb.at(y, x, 1), b = rgb.at(y, x, 2);
            const float mx = std::max(r, std::max(g, b));
            const float mn = std::min(r, std::min(g, b));
            const float delta = mx - mn;
            float h = 0.0f;
            if (delta > 0.0f) {
                if (mx == r) h = (g - b) / delta;
                else if (mx == g) h = 2.0f + (b - r) / delta;
                else h = 4.0f + (r - g) / delta;
                h /= 6.0f;
                if (h < 0.0f) h += 1.0f;
            }
            const float s = mx > 0.0f ? delta / mx : 0.0f;
            out.at(y, x, 0) = h;
            out.at(y, x, 1) = s;
            out.at(y, x, 2) = mx;
        }
    return out;
}

inline ImageF edges_view(const ImageF& rgb, int blur_radius) {
    ImageF gray = rgb_to_grayscale(rgb);
    return sobel_magnitude(box_blur(gray, blur_radius));
}

// 4x4 Bayer ordered dithering of the grayscale image; 2-class one-hot
// (channel 1 = "ink on").
inline ImageF halftone_view(const ImageF& rgb) {
    static constexpr int kBayer[4][4] = {{0, 8, 2, 10}, {12, 4, 14, 6}, {3, 11, 1, 9}, {15, 7, 13, 5}};
    ImageF gray = rgb_to_grayscale(rgb);
    ImageF out(rgb.h, rgb.w, 2);
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x) {
            const float threshold = (kBayer[y % 4][x % 4] + 0.5f) / 16.0f;
            const bool on = gray.at(y, x, 0) > threshold;
            out.at(y, x, 0) = on ? 0.0f : 1.0f;
            out.at(y, x, 1) = on ? 1.0f : 0.0f;
        }
    return out;
}

// Derives the view for one of the rgb-computable tasks.
inline PredictionMap derive_view(const PredictionMap& rgb, const TaskSpec& task) {
    if (rgb.image.c != 3) throw ShapeError("derive_view expects a 3-channel rgb map");
    ImageF img;
    if (task.name == "grayscale") img = rgb_to_grayscale(rgb.image);
    else if (task.name == "hsv") img = rgb_to_hsv(rgb.image);
    else if (task.name == "edges_small") img = edges_view(rgb.image, 0);
    else if (task.name == "edges_medium") img = edges_view(rgb.image, 2);
    else if (task.name == "edges_large") img = edges_view(rgb.image, 4);
    else if (task.name == "halftone") img = halftone_view(rgb.image);
    else throw ConfigError("derive_view: unsupported task '" + task.name + "'");
    return PredictionMap(task, std::move(img));
}

inline bool is_derived_task(const std::string& name) {
    return name == "grayscale" || name == "hsv" || name == "edges_small" || name == "edges_medium" ||
           name == "edges_large" || name == "halftone";
}

}  // namespace cshift::synth
