#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cshift/core/map_io.hpp"
#include "cshift/core/splits.hpp"
#include "cshift/io/png.hpp"
#include "cshift/parallel.hpp"
#include "cshift/synth/expert.hpp"
#include "cshift/synth/scene.hpp"
#include "cshift/synth/views.hpp"

namespace cshift {

// On-disk dataset layout:
//   <root>/<split>/<sample_id>/<task>.csmap      split = part1..partN|val|test
//   <root>/manifest.json
// Sample ids are global (unique across splits); the split assignment is a
// deterministic function of the dataset config.

struct DatasetConfig {
    synth::SceneConfig scene;
    int n_samples = 240;
    int n_iters = 2;
    double val_frac = 0.10;
    double test_frac = 0.15;
    std::vector<std::string> roster = synth::default_roster();

    void validate() const {
        scene.validate();
        if (n_samples < n_iters + 2) throw ConfigError("n_samples too small for the requested split");
        bool has_rgb = false;
        for (const auto& name : roster) {
            (void)synth::task_by_name(name, scene.class_count, scene.normals_two_channel);
            if (name == "rgb") has_rgb = true;
        }
        if (!has_rgb) throw ConfigError("task roster must include rgb");
        if (roster.size() < 2) throw ConfigError("task roster needs at least 2 tasks");
    }

    std::vector<TaskSpec> tasks() const {
        std::vector<TaskSpec> out;
        for (const auto& name : roster)
            out.push_back(synth::task_by_name(name, scene.class_count, scene.normals_two_channel));
        validate_roster(out);
        return out;
    }
};

// All ground-truth views of one sample, for every roster task.
inline std::map<std::string, PredictionMap> ground_truth_views(const DatasetConfig& cfg, SampleId id) {
    const synth::SceneViews scene = synth::generate_scene(cfg.scene, id);
    std::map<std::string, PredictionMap> views;
    for (const auto& name : cfg.roster) {
        if (name == "rgb") views.emplace(name, scene.rgb);
        else if (name == "depth") views.emplace(name, scene.depth);
        else if (name == "normals") views.emplace(name, scene.normals);
        else if (name == "seg") views.emplace(name, scene.seg);
        else
            views.emplace(name, synth::derive_view(scene.rgb, synth::task_by_name(
                                                                  name, cfg.scene.class_count,
                                                                  cfg.scene.normals_two_channel)));
    }
    return views;
}

inline std::string split_dir_name(const DatasetSplit& split, SampleId id) {
    for (size_t k = 0; k < split.parts.size(); ++k)
        for (SampleId s : split.parts[k])
            if (s == id) return "part" + std::to_string(k + 1);
    for (SampleId s : split.val)
        if (s == id) return "val";
    for (SampleId s : split.test)
        if (s == id) return "test";
    throw ConfigError("sample id " + std::to_string(id) + " not found in split");
}

// Handle to a generated dataset.
class Dataset {
public:
    Dataset(DatasetConfig cfg, std::filesystem::path root)
        : cfg_(std::move(cfg)), root_(std::move(root)), tasks_(cfg_.tasks()),
          split_(make_splits(cfg_.n_samples, cfg_.n_iters, cfg_.val_frac, cfg_.test_frac,
                             cfg_.scene.seed)) {
        for (size_t k = 0; k < split_.parts.size(); ++k)
            for (SampleId id : split_.parts[k]) dir_of_[id] = "part" + std::to_string(k + 1);
        for (SampleId id : split_.val) dir_of_[id] = "val";
        for (SampleId id : split_.test) dir_of_[id] = "test";
    }

    const DatasetConfig& config() const { return cfg_; }
    const std::filesystem::path& root() const { return root_; }
    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    const DatasetSplit& split() const { return split_; }

    const TaskSpec& task(const std::string& name) const {
        for (const auto& t : tasks_)
            if (t.name == name) return t;
        throw ConfigError("task '" + name + "' not in roster");
    }

    std::filesystem::path map_path(SampleId id, const std::string& task) const {
        const auto it = dir_of_.find(id);
        if (it == dir_of_.end()) throw ConfigError("unknown sample id " + std::to_string(id));
        return root_ / it->second / std::to_string(id) / (task + ".csmap");
    }

    PredictionMap load(SampleId id, const std::string& task_name) const {
        return read_map(map_path(id, task_name), task(task_name));
    }

    nlohmann::json manifest() const {
        nlohmann::json j;
        j["h"] = cfg_.scene.h;
        j["w"] = cfg_.scene.w;
        j["seed"] = cfg_.scene.seed;
        j["n_samples"] = cfg_.n_samples;
        j["tasks"] = cfg_.roster;
        nlohmann::json splits;
        for (size_t k = 0; k < split_.parts.size(); ++k)
            splits["part" + std::to_string(k + 1)] = split_.parts[k];
        splits["val"] = split_.val;
        splits["test"] = split_.test;
        j["splits"] = splits;
        return j;
    }

    // Writes every sample's ground-truth views; optional rgb PNG export.
    void generate(int workers, bool export_png = false) const {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec) throw WriteError("cannot create dataset root: " + root_.string());

        std::vector<SampleId> ids = split_.all();
        parallel_for(ids.size(), workers, [&](size_t i) {
            const SampleId id = ids[i];
            const auto views = ground_truth_views(cfg_, id);
            const fs::path dir = root_ / dir_of_.at(id) / std::to_string(id);
            fs::create_directories(dir);
            for (const auto& [name, map] : views) write_map(map, dir / (name + ".csmap"));
            if (export_png) io::write_png_rgb(views.at("rgb").image, dir / "rgb.png");
        });

        std::ofstream mf(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!mf) throw WriteError("cannot write manifest");
        mf << manifest().dump(2) << "\n";
    }

    // Cheap existence/consistency check against a directory on disk.
    void verify_on_disk() const {
        if (!std::filesystem::exists(root_ / "manifest.json"))
            throw IoError("dataset not found (missing manifest): " + root_.string());
        std::ifstream mf(root_ / "manifest.json");
        nlohmann::json on_disk;
        mf >> on_disk;
        if (on_disk != manifest())
            throw ConfigError("dataset on disk does not match the configuration: " + root_.string());
    }

private:
    DatasetConfig cfg_;
    std::filesystem::path root_;
    std::vector<TaskSpec> tasks_;
    DatasetSplit split_;
    std::map<SampleId, std::string> dir_of_;
};

}  // namespace cshift
