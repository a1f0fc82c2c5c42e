#pragma once

#include <string>
#include <vector>

#include "cshift/common.hpp"

namespace cshift {

enum class TaskKind { Regression, Classification };

// One view of the scene: a named node of the multi-task graph.
// Regression maps live in [0,1]; classification maps hold a per-pixel
// probability simplex over `channels` classes.
struct TaskSpec {
    std::string name;
    int channels = 1;
    TaskKind kind = TaskKind::Regression;

    bool operator==(const TaskSpec& o) const {
        return name == o.name && channels == o.channels && kind == o.kind;
    }
};

inline void validate_task(const TaskSpec& t) {
    if (t.name.empty()) throw ConfigError("task name must not be empty");
    if (t.channels < 1) throw ConfigError("task '" + t.name + "': channels must be >= 1");
    if (t.kind == TaskKind::Classification && t.channels < 2)
        throw ConfigError("task '" + t.name + "': classification needs >= 2 classes");
}

inline void validate_roster(const std::vector<TaskSpec>& tasks) {
    for (const auto& t : tasks) {
        validate_task(t);
        int count = 0;
        for (const auto& u : tasks)
            if (u.name == t.name) ++count;
        if (count != 1) throw ConfigError("duplicate task name '" + t.name + "'");
    }
}

}  // namespace cshift
