#pragma once

#include <vector>

#include "cshift/core/task.hpp"

namespace cshift::synth {

// Task roster of the synthetic world. "rgb" is the graph input node; depth,
// normals and seg come from scene geometry; the rest are deterministic
// transforms of rgb.
inline TaskSpec task_by_name(const std::string& name, int seg_classes, bool normals_two_channel = false) {
    if (name == "rgb") return {name, 3, TaskKind::Regression};
    if (name == "grayscale") return {name, 1, TaskKind::Regression};
    if (name == "hsv") return {name, 3, TaskKind::Regression};
    if (name == "depth") return {name, 1, TaskKind::Regression};
    if (name == "normals") return {name, normals_two_channel ? 2 : 3, TaskKind::Regression};
    if (name == "edges_small" || name == "edges_medium" || name == "edges_large")
        return {name, 1, TaskKind::Regression};
    if (name == "halftone") return {name, 2, TaskKind::Classification};
    if (name == "seg") return {name, seg_classes, TaskKind::Classification};
    throw ConfigError("unknown task '" + name + "'");
}

inline const std::vector<std::string>& known_task_names() {
    static const std::vector<std::string> names = {"rgb",   "grayscale",  "hsv",         "depth",
                                                   "normals", "edges_small", "edges_medium", "edges_large",
                                                   "halftone", "seg"};
    return names;
}

// Default desk-scale roster: one representative per task category.
inline const std::vector<std::string>& default_roster() {
    static const std::vector<std::string> names = {"rgb",   "grayscale",  "hsv",          "depth",
                                                   "normals", "edges_small", "edges_medium", "seg"};
    return names;
}

}  // namespace cshift::synth
