#pragma once

#include <vector>

#include "cshift/models/edge_model.hpp"

namespace cshift::graph {

// Edge architecture policy. Auto picks per destination: the convex
// PatchLinear for regression targets, ShallowConv where per-pixel class
// logits need nonlinearity.
enum class ArchPolicy { Auto, ForcePatchLinear, ForceShallowConv };

inline ArchPolicy arch_policy_from_name(const std::string& s) {
    if (s == "auto") return ArchPolicy::Auto;
    if (s == "patch_linear") return ArchPolicy::ForcePatchLinear;
    if (s == "shallow_conv") return ArchPolicy::ForceShallowConv;
    throw ConfigError("unknown arch '" + s + "' (expected auto|patch_linear|shallow_conv)");
}

inline ArchKind arch_for_edge(ArchPolicy policy, const TaskSpec& dst) {
    switch (policy) {
        case ArchPolicy::ForcePatchLinear: return ArchKind::PatchLinear;
        case ArchPolicy::ForceShallowConv: return ArchKind::ShallowConv;
        case ArchPolicy::Auto:
            return dst.kind == TaskKind::Classification ? ArchKind::ShallowConv : ArchKind::PatchLinear;
    }
    return ArchKind::PatchLinear;
}

// Fully connected directed multi-task graph: one trainable edge per ordered
// task pair (s, d), s != d. The d -> d identity is never a trained edge; the
// current view enters ensembles directly as a candidate.
class TaskGraph {
public:
    TaskGraph(std::vector<TaskSpec> tasks, ArchPolicy policy) : tasks_(std::move(tasks)) {
        validate_roster(tasks_);
        if (tasks_.size() < 2) throw ConfigError("graph needs at least 2 tasks");
        const int t = static_cast<int>(tasks_.size());
        edges_.reserve(size_t(t) * (t - 1));
        for (int s = 0; s < t; ++s)
            for (int d = 0; d < t; ++d)
                if (s != d) edges_.emplace_back(tasks_[s], tasks_[d], arch_for_edge(policy, tasks_[d]));
    }

    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    int task_count() const { return static_cast<int>(tasks_.size()); }
    size_t edge_count() const { return edges_.size(); }

    int task_index(const std::string& name) const {
        for (size_t i = 0; i < tasks_.size(); ++i)
            if (tasks_[i].name == name) return static_cast<int>(i);
        throw ConfigError("task '" + name + "' not in graph");
    }

    int edge_slot(int s, int d) const {
        const int t = task_count();
        if (s < 0 || d < 0 || s >= t || d >= t || s == d) throw ConfigError("bad edge index");
        return s * (t - 1) + (d < s ? d : d - 1);
    }

    EdgeModel& edge(int s, int d) { return edges_[edge_slot(s, d)]; }
    const EdgeModel& edge(int s, int d) const { return edges_[edge_slot(s, d)]; }

    std::vector<EdgeModel>& edges() { return edges_; }
    const std::vector<EdgeModel>& edges() const { return edges_; }

private:
    std::vector<TaskSpec> tasks_;
    std::vector<EdgeModel> edges_;
};

}  // namespace cshift::graph
