#pragma once

#include <filesystem>
#include <vector>

#include "cshift/core/map_io.hpp"
#include "cshift/core/splits.hpp"

namespace cshift::graph {

// Pseudo-labels for every (sample in P, task) pair. Immutable while edges
// train; replaced wholesale between phases (snapshot discipline), with an
// iteration tag recording which ensemble pass produced it.
class PseudoLabelStore {
public:
    PseudoLabelStore() = default;
    PseudoLabelStore(std::vector<SampleId> samples, std::vector<TaskSpec> tasks)
        : samples_(std::move(samples)), tasks_(std::move(tasks)),
          maps_(samples_.size(), std::vector<ImageF>(tasks_.size())) {}

    const std::vector<SampleId>& samples() const { return samples_; }
    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    int iteration_tag() const { return tag_; }
    void set_iteration_tag(int tag) { tag_ = tag; }

    size_t sample_pos(SampleId id) const {
        for (size_t i = 0; i < samples_.size(); ++i)
            if (samples_[i] == id) return i;
        throw ConfigError("sample " + std::to_string(id) + " not in store");
    }

    ImageF& view(size_t sample_pos, int task_idx) { return maps_[sample_pos][task_idx]; }
    const ImageF& view(size_t sample_pos, int task_idx) const { return maps_[sample_pos][task_idx]; }

    bool complete() const {
        for (const auto& per_sample : maps_)
            for (const auto& img : per_sample)
                if (img.data.empty()) return false;
        return true;
    }

    bool operator==(const PseudoLabelStore& o) const {
        return samples_ == o.samples_ && maps_ == o.maps_;
    }

    void save(const std::filesystem::path& dir) const {
        namespace fs = std::filesystem;
        for (size_t i = 0; i < samples_.size(); ++i) {
            const fs::path sample_dir = dir / std::to_string(samples_[i]);
            fs::create_directories(sample_dir);
            for (size_t t = 0; t < tasks_.size(); ++t)
                write_map(PredictionMap(tasks_[t], maps_[i][t]), sample_dir / (tasks_[t].name + ".csmap"));
        }
    }

private:
    std::vector<SampleId> samples_;
    std::vector<TaskSpec> tasks_;
    std::vector<std::vector<ImageF>> maps_;
    int tag_ = 0;
};

}  // namespace cshift::graph
