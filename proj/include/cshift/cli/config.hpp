#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "cshift/graph/experiments.hpp"

namespace cshift::cli {

using nlohmann::json;

// Declarative run configuration. One JSON file drives dataset generation,
// the learning loop and the experiments; flags only override. Unknown keys
// anywhere in the tree are rejected up front.

struct ExperimentConfig {
    std::string node_sweep_dest = "depth";
    uint64_t node_order_seed = 3;
    int node_max_pool = 0;
    std::vector<float> weak_strengths = {0.30f, 0.20f, 0.10f};
    int weak_max_pool = 0;
    uint64_t mmd_other_seed = 99;
    int mmd_samples = 32;
    int mmd_stride = 4;
    int ablation_max_pool = 0;
};

struct RunConfig {
    DatasetConfig dataset;
    std::filesystem::path dataset_root = "data/bench";
    graph::ExpertMap experts;
    graph::IterationConfig iteration;
    ExperimentConfig experiments;
    std::filesystem::path output_root = "runs";
    std::string run_name = "run";
    int workers = 0;
};

namespace config_detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config section '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown config key '" + where + "." + key + "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

inline synth::ExpertSimulator parse_expert(const json& j, const TaskSpec& task, uint64_t base_seed,
                                           const std::string& where) {
    reject_unknown(j, {"sigma", "blur_radius", "bias_amplitude", "flip_rate"}, where);
    synth::ExpertSimulator ex;
    ex.task = task;
    ex.sigma = get_or<float>(j, "sigma", 0.0f);
    ex.blur_radius = get_or<int>(j, "blur_radius", 0);
    ex.bias_amplitude = get_or<float>(j, "bias_amplitude", 0.0f);
    ex.flip_rate = get_or<float>(j, "flip_rate", 0.0f);
    ex.seed = hash_seed({base_seed, fnv1a(task.name.c_str())});
    ex.validate();
    return ex;
}

}  // namespace config_detail

inline RunConfig parse_config(const json& root) {
    using namespace config_detail;
    reject_unknown(root, {"dataset", "tasks", "experts", "iteration", "experiments", "output_root",
                          "run_name", "workers"},
                   "<top>");
    RunConfig cfg;

    if (root.contains("dataset")) {
        const json& d = root.at("dataset");
        reject_unknown(d, {"h", "w", "n_shapes", "class_count", "seed", "n_samples", "n_iters",
                           "val_frac", "test_frac", "normals_two_channel", "root"},
                       "dataset");
        cfg.dataset.scene.h = get_or<int>(d, "h", 64);
        cfg.dataset.scene.w = get_or<int>(d, "w", 64);
        cfg.dataset.scene.n_shapes = get_or<int>(d, "n_shapes", 5);
        cfg.dataset.scene.class_count = get_or<int>(d, "class_count", 6);
        cfg.dataset.scene.seed = get_or<uint64_t>(d, "seed", 1);
        cfg.dataset.scene.normals_two_channel = get_or<bool>(d, "normals_two_channel", false);
        cfg.dataset.n_samples = get_or<int>(d, "n_samples", 240);
        cfg.dataset.n_iters = get_or<int>(d, "n_iters", 2);
        cfg.dataset.val_frac = get_or<double>(d, "val_frac", 0.10);
        cfg.dataset.test_frac = get_or<double>(d, "test_frac", 0.15);
        if (d.contains("root")) cfg.dataset_root = d.at("root").get<std::string>();
    }

    if (root.contains("tasks")) {
        cfg.dataset.roster = root.at("tasks").get<std::vector<std::string>>();
    }
    cfg.dataset.validate();

    uint64_t expert_seed = 7;
    json default_expert = json::object();
    json per_task = json::object();
    if (root.contains("experts")) {
        const json& e = root.at("experts");
        reject_unknown(e, {"seed", "default", "per_task"}, "experts");
        expert_seed = get_or<uint64_t>(e, "seed", 7);
        if (e.contains("default")) default_expert = e.at("default");
        if (e.contains("per_task")) per_task = e.at("per_task");
    }
    for (const auto& task : cfg.dataset.tasks()) {
        if (task.name == "rgb") continue;
        json spec = default_expert;
        if (per_task.contains(task.name)) spec = per_task.at(task.name);
        cfg.experts.emplace(task.name,
                            parse_expert(spec, task, expert_seed, "experts." + task.name));
    }
    for (const auto& [name, unused] : per_task.items()) {
        (void)unused;
        bool known = false;
        for (const auto& task : cfg.dataset.tasks()) known |= task.name == name;
        if (!known) throw ConfigError("experts.per_task names unknown task '" + name + "'");
    }

    if (root.contains("iteration")) {
        const json& it = root.at("iteration");
        reject_unknown(it, {"n_iters", "metric", "kernel", "kernel_input", "kernel_sigma", "arch",
                            "retrain_from_scratch", "epochs", "batch", "lr", "seed", "rgb_pinned",
                            "align_expert_depth", "record_variance"},
                       "iteration");
        cfg.iteration.n_iters = get_or<int>(it, "n_iters", cfg.dataset.n_iters);
        cfg.iteration.metric = consensus::metric_from_name(get_or<std::string>(it, "metric", "perc"));
        cfg.iteration.weights.kernel =
            consensus::kernel_from_name(get_or<std::string>(it, "kernel", "identity"));
        const std::string ki = get_or<std::string>(it, "kernel_input", "similarity");
        if (ki == "similarity") cfg.iteration.weights.input = consensus::KernelInput::Similarity;
        else if (ki == "distance") cfg.iteration.weights.input = consensus::KernelInput::Distance;
        else throw ConfigError("iteration.kernel_input must be similarity|distance");
        cfg.iteration.weights.gaussian_sigma = get_or<float>(it, "kernel_sigma", 0.25f);
        cfg.iteration.arch = graph::arch_policy_from_name(get_or<std::string>(it, "arch", "auto"));
        cfg.iteration.retrain_from_scratch = get_or<bool>(it, "retrain_from_scratch", true);
        cfg.iteration.epochs = get_or<int>(it, "epochs", 24);
        cfg.iteration.batch = get_or<int>(it, "batch", 4);
        cfg.iteration.lr = get_or<float>(it, "lr", 5e-2f);
        cfg.iteration.train_seed = get_or<uint64_t>(it, "seed", 11);
        cfg.iteration.rgb_pinned = get_or<bool>(it, "rgb_pinned", false);
        cfg.iteration.align_expert_depth = get_or<bool>(it, "align_expert_depth", false);
        cfg.iteration.record_variance = get_or<bool>(it, "record_variance", true);
    } else {
        cfg.iteration.n_iters = cfg.dataset.n_iters;
    }
    if (cfg.iteration.epochs < 0 || cfg.iteration.batch < 1)
        throw ConfigError("iteration.epochs must be >= 0 and iteration.batch >= 1");
    if (cfg.iteration.n_iters < 0 || cfg.iteration.n_iters > cfg.dataset.n_iters)
        throw ConfigError("iteration.n_iters must lie in [0, dataset.n_iters]");

    if (root.contains("experiments")) {
        const json& ex = root.at("experiments");
        reject_unknown(ex, {"node_sweep", "weak_expert", "mmd", "ablation"}, "experiments");
        if (ex.contains("node_sweep")) {
            const json& ns = ex.at("node_sweep");
            reject_unknown(ns, {"dest_task", "order_seed", "max_pool_samples"}, "experiments.node_sweep");
            cfg.experiments.node_sweep_dest = get_or<std::string>(ns, "dest_task", "depth");
            cfg.experiments.node_order_seed = get_or<uint64_t>(ns, "order_seed", 3);
            cfg.experiments.node_max_pool = get_or<int>(ns, "max_pool_samples", 0);
        }
        if (ex.contains("weak_expert")) {
            const json& we = ex.at("weak_expert");
            reject_unknown(we, {"strengths", "max_pool_samples"}, "experiments.weak_expert");
            if (we.contains("strengths"))
                cfg.experiments.weak_strengths = we.at("strengths").get<std::vector<float>>();
            cfg.experiments.weak_max_pool = get_or<int>(we, "max_pool_samples", 0);
        }
        if (ex.contains("mmd")) {
            const json& mm = ex.at("mmd");
            reject_unknown(mm, {"other_seed", "samples", "stride"}, "experiments.mmd");
            cfg.experiments.mmd_other_seed = get_or<uint64_t>(mm, "other_seed", 99);
            cfg.experiments.mmd_samples = get_or<int>(mm, "samples", 32);
            cfg.experiments.mmd_stride = get_or<int>(mm, "stride", 4);
        }
        if (ex.contains("ablation")) {
            const json& ab = ex.at("ablation");
            reject_unknown(ab, {"max_pool_samples"}, "experiments.ablation");
            cfg.experiments.ablation_max_pool = get_or<int>(ab, "max_pool_samples", 0);
        }
    }

    if (root.contains("output_root")) cfg.output_root = root.at("output_root").get<std::string>();
    if (root.contains("run_name")) cfg.run_name = root.at("run_name").get<std::string>();
    cfg.workers = config_detail::get_or<int>(root, "workers", 0);
    cfg.iteration.workers = cfg.workers;
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path.string());
    json root;
    try {
        f >> root;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(root);
}

}  // namespace cshift::cli
