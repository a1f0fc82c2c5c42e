#pragma once

#include "cshift/graph/loop.hpp"

namespace cshift::graph {

// Graph-level experiments: node-count sweeps, weak-expert sweeps, and the
// metric ablation harness. All of them run single-iteration pipelines on
// task subsets or modified expert rosters, so they share the banks loaded
// here and stay deterministic per seed.

enum class NodeOrdering { Random, PerformanceBased };

struct NodeSweepPoint {
    int n_nodes = 0;
    double cshift_l1 = 0.0;
    double mean_l1 = 0.0;
    double expert_l1 = 0.0;
};

struct SingleIterationResult {
    std::vector<eval::MetricRow> rows;  // iteration 1 rows
    double method_l1(const std::string& task, const std::string& method) const {
        for (const auto& r : rows)
            if (r.iteration == 1 && r.task == task && r.method == method) return r.l1_x100;
        throw ConfigError("missing metric row " + task + "/" + method);
    }
};

// Trains and evaluates exactly one iteration on an explicit task subset.
// The training part and evaluation banks are restrictions of the loaded
// full-roster banks.
inline SingleIterationResult run_single_iteration(const ViewBank& gt_pool_full,
                                                  const ViewBank& gt_test_full,
                                                  const std::vector<TaskSpec>& tasks,
                                                  const ExpertMap& experts,
                                                  const IterationConfig& cfg) {
    const ViewBank gt_pool = gt_pool_full.subset(tasks);
    const ViewBank gt_test = gt_test_full.subset(tasks);
    const ViewBank expert_test = expert_views(gt_test, experts, cfg.workers);

    PseudoLabelStore store = init_from_experts(gt_pool, experts, cfg.align_expert_depth, cfg.workers);
    TaskGraph graph(tasks, cfg.arch);
    IterationConfig one = cfg;
    one.record_variance = false;
    run_iteration(graph, store, gt_pool.ids, 1, one);

    SingleIterationResult out;
    out.rows = evaluate_iteration(graph, gt_test, expert_test, 1, one).rows;
    return out;
}

// Error of the destination task as the graph grows node by node. Ordering
// of the added nodes is either seeded-random or by expert quality (best
// experts join first). The two-node base graph is {rgb, destination}.
inline std::vector<NodeSweepPoint> node_addition_experiment(
    const Dataset& ds, const ExpertMap& experts, const IterationConfig& cfg,
    const std::string& dest_task, NodeOrdering ordering, uint64_t order_seed,
    int max_pool_samples = 0) {
    const std::vector<TaskSpec> all_tasks = ds.tasks();
    if (all_tasks.size() < 3) throw ConfigError("node sweep needs at least 3 tasks");

    std::vector<SampleId> pool = ds.split().parts.at(0);
    if (max_pool_samples > 0 && static_cast<int>(pool.size()) > max_pool_samples)
        pool.resize(max_pool_samples);
    const ViewBank gt_pool = ViewBank::load_gt(ds, pool, cfg.workers);
    const ViewBank gt_test = ViewBank::load_gt(ds, ds.split().test, cfg.workers);

    const TaskSpec rgb = ds.task("rgb");
    const TaskSpec dest = ds.task(dest_task);
    if (dest.name == "rgb") throw ConfigError("node sweep destination must not be rgb");

    std::vector<TaskSpec> others;
    for (const auto& t : all_tasks)
        if (t.name != "rgb" && t.name != dest.name) others.push_back(t);

    if (ordering == NodeOrdering::Random) {
        Rng rng(hash_seed({order_seed, 0x0bde5ull}));
        rng.shuffle(others);
    } else {
        // Expert quality on the test split, best first.
        const ViewBank expert_test = expert_views(gt_test, experts, cfg.workers);
        std::vector<std::pair<double, TaskSpec>> scored;
        for (const auto& t : others) {
            const int ti = gt_test.task_index(t.name);
            double l1 = 0.0;
            for (size_t i = 0; i < gt_test.ids.size(); ++i)
                l1 += eval::l1_x100(expert_test.views[i][ti], gt_test.views[i][ti]);
            scored.emplace_back(l1 / gt_test.ids.size(), t);
        }
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first < b.first : a.second.name < b.second.name;
                  });
        others.clear();
        for (const auto& [l1, t] : scored) others.push_back(t);
    }

    std::vector<NodeSweepPoint> curve;
    for (size_t extra = 0; extra + 2 <= all_tasks.size(); ++extra) {
        std::vector<TaskSpec> tasks = {rgb, dest};
        for (size_t i = 0; i < extra; ++i) tasks.push_back(others[i]);
        const auto res = run_single_iteration(gt_pool, gt_test, tasks, experts, cfg);
        NodeSweepPoint p;
        p.n_nodes = static_cast<int>(tasks.size());
        p.cshift_l1 = res.method_l1(dest.name, "cshift");
        p.mean_l1 = res.method_l1(dest.name, "mean_ensemble");
        p.expert_l1 = res.method_l1(dest.name, "expert");
        curve.push_back(p);
    }
    return curve;
}

struct WeakExpertPoint {
    float strength = 0.0f;  // corruption knob (flip rate for seg)
    double expert_l1 = 0.0;
    double mean_l1 = 0.0;
    double cshift_l1 = 0.0;
    double boost_pct = 0.0;  // (expert - cshift) / expert * 100
};

// One CShift iteration per expert strength on the seg task; all other
// experts stay at their configured corruption.
inline std::vector<WeakExpertPoint> weak_expert_sweep(const Dataset& ds, const ExpertMap& experts,
                                                      const IterationConfig& cfg,
                                                      const std::vector<float>& strengths,
                                                      int max_pool_samples = 0) {
    if (strengths.size() < 1) throw ConfigError("weak-expert sweep needs at least one strength");
    if (!experts.count("seg")) throw ConfigError("weak-expert sweep requires a seg expert");

    std::vector<SampleId> pool = ds.split().parts.at(0);
    if (max_pool_samples > 0 && static_cast<int>(pool.size()) > max_pool_samples)
        pool.resize(max_pool_samples);
    const ViewBank gt_pool = ViewBank::load_gt(ds, pool, cfg.workers);
    const ViewBank gt_test = ViewBank::load_gt(ds, ds.split().test, cfg.workers);

    std::vector<WeakExpertPoint> table;
    for (float strength : strengths) {
        ExpertMap modified = experts;
        modified.at("seg").flip_rate = strength;
        const auto res = run_single_iteration(gt_pool, gt_test, ds.tasks(), modified, cfg);
        WeakExpertPoint p;
        p.strength = strength;
        p.expert_l1 = res.method_l1("seg", "expert");
        p.mean_l1 = res.method_l1("seg", "mean_ensemble");
        p.cshift_l1 = res.method_l1("seg", "cshift");
        p.boost_pct = p.expert_l1 > 0.0 ? 100.0 * (p.expert_l1 - p.cshift_l1) / p.expert_l1 : 0.0;
        table.push_back(p);
    }
    return table;
}

struct AblationRow {
    consensus::MetricKind metric;
    std::string task;
    double expert_l1 = 0.0, mean_l1 = 0.0, cshift_l1 = 0.0;
};

// Metric ablation: edges are metric-independent, so they are trained once
// and only the selection ensemble is re-run per metric.
inline std::vector<AblationRow> metric_ablation(const Dataset& ds, const ExpertMap& experts,
                                                const IterationConfig& cfg,
                                                const std::vector<consensus::MetricKind>& metrics,
                                                int max_pool_samples = 0) {
    std::vector<SampleId> pool = ds.split().parts.at(0);
    if (max_pool_samples > 0 && static_cast<int>(pool.size()) > max_pool_samples)
        pool.resize(max_pool_samples);
    const ViewBank gt_pool = ViewBank::load_gt(ds, pool, cfg.workers);
    const ViewBank gt_test = ViewBank::load_gt(ds, ds.split().test, cfg.workers);
    const ViewBank expert_test = expert_views(gt_test, experts, cfg.workers);

    PseudoLabelStore store = init_from_experts(gt_pool, experts, cfg.align_expert_depth, cfg.workers);
    TaskGraph graph(ds.tasks(), cfg.arch);
    IterationConfig one = cfg;
    one.record_variance = false;
    const int diverged = train_all_edges(graph, store, gt_pool.ids, 1, one, nullptr);
    if (diverged * 4 > static_cast<int>(graph.edge_count()))
        throw NumericsError("metric ablation aborted: too many diverged edges");

    std::vector<AblationRow> rows;
    for (const auto metric : metrics) {
        IterationConfig mcfg = one;
        mcfg.metric = metric;
        const EvalResult ev = evaluate_iteration(graph, gt_test, expert_test, 1, mcfg);
        for (const auto& t : ds.tasks()) {
            AblationRow row;
            row.metric = metric;
            row.task = t.name;
            for (const auto& r : ev.rows) {
                if (r.task != t.name) continue;
                if (r.method == "expert") row.expert_l1 = r.l1_x100;
                if (r.method == "mean_ensemble") row.mean_l1 = r.l1_x100;
                if (r.method == "cshift") row.cshift_l1 = r.l1_x100;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace cshift::graph
