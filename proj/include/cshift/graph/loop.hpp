#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "cshift/consensus/ensemble.hpp"
#include "cshift/core/dataset.hpp"
#include "cshift/eval/histspec.hpp"
#include "cshift/eval/metrics.hpp"
#include "cshift/eval/report.hpp"
#include "cshift/graph/label_store.hpp"
#include "cshift/graph/task_graph.hpp"
#include "cshift/models/checkpoint.hpp"
#include "cshift/models/trainer.hpp"
#include "cshift/parallel.hpp"

namespace cshift::graph {

// The learning loop: initialize pseudo-labels from experts, then per
// iteration (a) freeze the views, (b) train every edge from the frozen
// views on that iteration's part, (c) replace every pseudo-label in the
// training pool with the selection-ensemble output of its in-edge
// candidates. Validation/test samples are never refreshed; they are
// evaluated against fixed expert-initialized views.

struct IterationConfig {
    int n_iters = 2;
    consensus::MetricKind metric = consensus::MetricKind::Perceptual;
    consensus::WeightOptions weights;
    ArchPolicy arch = ArchPolicy::Auto;
    bool retrain_from_scratch = true;
    int epochs = 24;
    int batch = 4;
    float lr = 5e-2f;
    uint64_t train_seed = 11;
    bool rgb_pinned = false;          // keep the input image as the rgb view
    bool align_expert_depth = false;  // histogram-align expert depth at init
    bool record_variance = true;
    int workers = 0;

    std::vector<int> snapshot_epochs() const {
        if (!record_variance || epochs < 1) return {};
        std::set<int> s = {1, std::max(1, epochs / 2), epochs};
        return {s.begin(), s.end()};
    }
};

using ExpertMap = std::map<std::string, synth::ExpertSimulator>;  // task -> expert, no rgb entry

// In-memory views for a fixed sample list and task roster.
struct ViewBank {
    std::vector<SampleId> ids;
    std::vector<TaskSpec> tasks;
    std::vector<std::vector<ImageF>> views;  // [sample_pos][task_idx]

    int task_index(const std::string& name) const {
        for (size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].name == name) return static_cast<int>(i);
        throw ConfigError("task '" + name + "' not in bank");
    }

    static ViewBank load_gt(const Dataset& ds, const std::vector<SampleId>& ids, int workers) {
        ViewBank bank;
        bank.ids = ids;
        bank.tasks = ds.tasks();
        bank.views.assign(ids.size(), {});
        parallel_for(ids.size(), workers, [&](size_t i) {
            std::vector<ImageF> per_task;
            per_task.reserve(bank.tasks.size());
            for (const auto& t : bank.tasks) per_task.push_back(ds.load(ids[i], t.name).image);
            bank.views[i] = std::move(per_task);
        });
        return bank;
    }

    // Restriction to a task subset (cheap: shares image buffers via copy).
    ViewBank subset(const std::vector<TaskSpec>& subset_tasks) const {
        ViewBank out;
        out.ids = ids;
        out.tasks = subset_tasks;
        out.views.assign(ids.size(), {});
        std::vector<int> idx;
        for (const auto& t : subset_tasks) idx.push_back(task_index(t.name));
        for (size_t i = 0; i < ids.size(); ++i) {
            out.views[i].reserve(idx.size());
            for (int j : idx) out.views[i].push_back(views[i][j]);
        }
        return out;
    }
};

// Applies the per-task experts to a ground-truth bank. The rgb view passes
// through untouched (the input image is its own "expert").
inline ViewBank expert_views(const ViewBank& gt, const ExpertMap& experts, int workers) {
    for (const auto& t : gt.tasks)
        if (t.name != "rgb" && !experts.count(t.name))
            throw ConfigError("no expert configured for task '" + t.name + "'");
    ViewBank out;
    out.ids = gt.ids;
    out.tasks = gt.tasks;
    out.views.assign(gt.ids.size(), {});
    parallel_for(gt.ids.size(), workers, [&](size_t i) {
        std::vector<ImageF> per_task;
        per_task.reserve(gt.tasks.size());
        for (size_t t = 0; t < gt.tasks.size(); ++t) {
            const TaskSpec& task = gt.tasks[t];
            if (task.name == "rgb") {
                per_task.push_back(gt.views[i][t]);
            } else {
                const auto& ex = experts.at(task.name);
                if (!(ex.task == task)) throw ConfigError("expert spec mismatch for '" + task.name + "'");
                per_task.push_back(
                    synth::expert_predict(ex, PredictionMap(task, gt.views[i][t]), gt.ids[i]).image);
            }
        }
        out.views[i] = std::move(per_task);
    });
    return out;
}

// Initial pseudo-label store over the training pool. Optionally aligns the
// expert depth distribution to the pool's ground-truth depth histogram.
inline PseudoLabelStore init_from_experts(const ViewBank& gt_pool, const ExpertMap& experts,
                                          bool align_depth, int workers) {
    ViewBank ex = expert_views(gt_pool, experts, workers);
    PseudoLabelStore store(ex.ids, ex.tasks);
    if (align_depth) {
        int depth_idx = -1;
        for (size_t t = 0; t < ex.tasks.size(); ++t)
            if (ex.tasks[t].name == "depth") depth_idx = static_cast<int>(t);
        if (depth_idx >= 0) {
            std::vector<float> reference;
            for (size_t i = 0; i < gt_pool.ids.size(); ++i) {
                const auto& img = gt_pool.views[i][depth_idx];
                reference.insert(reference.end(), img.data.begin(), img.data.end());
            }
            parallel_for(ex.ids.size(), workers, [&](size_t i) {
                ex.views[i][depth_idx] =
                    eval::histogram_specification_values(ex.views[i][depth_idx], reference, 256);
            });
        }
    }
    for (size_t i = 0; i < ex.ids.size(); ++i)
        for (size_t t = 0; t < ex.tasks.size(); ++t) store.view(i, static_cast<int>(t)) = ex.views[i][t];
    store.set_iteration_tag(0);
    return store;
}

struct IterationOutcome {
    int diverged_edges = 0;
    std::vector<eval::VariancePoint> variance;
};

namespace loop_detail {

inline uint64_t edge_seed(uint64_t train_seed, int iteration, const TaskSpec& s, const TaskSpec& d) {
    return hash_seed({train_seed, static_cast<uint64_t>(iteration), fnv1a(s.name.c_str()),
                      fnv1a(d.name.c_str())});
}

// Builds the candidate neighborhood of destination d for one sample:
// every in-edge prediction from the frozen views, plus the current view.
inline consensus::CandidateSet make_candidates(const TaskGraph& graph, int d,
                                               const std::vector<ImageF>& views,
                                               const ImageF& current) {
    consensus::CandidateSet cands;
    cands.dst = graph.tasks()[d];
    const int t = graph.task_count();
    cands.entries.reserve(t);
    for (int s = 0; s < t; ++s) {
        if (s == d) continue;
        cands.entries.push_back(
            {graph.tasks()[s].name, graph.edge(s, d).core.forward(views[s])});
    }
    cands.entries.push_back({"current", current});
    cands.current_index = static_cast<int>(cands.entries.size()) - 1;
    return cands;
}

// Population variance across candidates, averaged over pixels/channels.
inline double candidate_variance(const consensus::CandidateSet& cands) {
    const int n = static_cast<int>(cands.entries.size());
    const size_t m = cands.entries.front().map.data.size();
    double total = 0.0;
    for (size_t i = 0; i < m; ++i) {
        double mean = 0.0;
        for (int k = 0; k < n; ++k) mean += cands.entries[k].map.data[i];
        mean /= n;
        double var = 0.0;
        for (int k = 0; k < n; ++k) {
            const double d = cands.entries[k].map.data[i] - mean;
            var += d * d;
        }
        total += var / n;
    }
    return total / static_cast<double>(m);
}

}  // namespace loop_detail

// Trains every edge of the graph on the given part (inputs and targets both
// drawn from the frozen store views). Returns divergence count and, when
// snapshots are requested, per-edge parameter snapshots by epoch.
inline int train_all_edges(TaskGraph& graph, const PseudoLabelStore& store,
                           const std::vector<SampleId>& part, int iteration,
                           const IterationConfig& cfg,
                           std::vector<std::map<int, std::vector<float>>>* snapshots_out) {
    const int t = graph.task_count();
    std::vector<size_t> part_pos;
    part_pos.reserve(part.size());
    for (SampleId id : part) part_pos.push_back(store.sample_pos(id));

    const auto snapshot_epochs = cfg.snapshot_epochs();
    if (snapshots_out) snapshots_out->assign(graph.edge_count(), {});
    std::vector<uint8_t> diverged(graph.edge_count(), 0);

    struct Job {
        int s, d, slot;
    };
    std::vector<Job> jobs;
    for (int s = 0; s < t; ++s)
        for (int d = 0; d < t; ++d)
            if (s != d) jobs.push_back({s, d, graph.edge_slot(s, d)});

    const SsimEngine<float> ssim;
    parallel_for(jobs.size(), cfg.workers, [&](size_t ji) {
        const Job job = jobs[ji];
        EdgeModel& edge = graph.edge(job.s, job.d);
        std::vector<const ImageF*> inputs, targets;
        inputs.reserve(part_pos.size());
        targets.reserve(part_pos.size());
        for (size_t pos : part_pos) {
            inputs.push_back(&store.view(pos, job.s));
            targets.push_back(&store.view(pos, job.d));
        }
        TrainConfig tc;
        tc.epochs = cfg.epochs;
        tc.batch = cfg.batch;
        tc.lr = cfg.lr;
        tc.seed = loop_detail::edge_seed(cfg.train_seed, iteration, edge.src, edge.dst);
        tc.snapshot_epochs = snapshot_epochs;
        const uint64_t init_seed = hash_seed({tc.seed, 0x171ull});
        if (cfg.retrain_from_scratch || store.iteration_tag() == 0) edge.init(init_seed);
        try {
            TrainTrace trace = train_edge(edge, inputs, targets, tc, ssim);
            if (snapshots_out) (*snapshots_out)[job.slot] = std::move(trace.snapshots);
        } catch (const NumericsError&) {
            // One retry from scratch at a tenth of the learning rate.
            edge.init(init_seed);
            TrainConfig retry = tc;
            retry.lr = tc.lr / 10.0f;
            try {
                TrainTrace trace = train_edge(edge, inputs, targets, retry, ssim);
                if (snapshots_out) (*snapshots_out)[job.slot] = std::move(trace.snapshots);
            } catch (const NumericsError&) {
                diverged[job.slot] = 1;
                edge.init(init_seed);  // leave finite parameters in place
            }
        }
    });
    int count = 0;
    for (uint8_t d : diverged) count += d;
    return count;
}

// Ensemble phase: recomputes every pseudo-label in the pool from the frozen
// store and the (already trained) edges.
inline PseudoLabelStore ensemble_phase(const TaskGraph& graph, const PseudoLabelStore& store,
                                       const IterationConfig& cfg) {
    const int t = graph.task_count();
    PseudoLabelStore next(store.samples(), store.tasks());
    const SsimEngine<float> ssim;
    const int rgb_idx = [&] {
        for (int i = 0; i < t; ++i)
            if (graph.tasks()[i].name == "rgb") return i;
        return -1;
    }();
    parallel_for(store.samples().size(), cfg.workers, [&](size_t pos) {
        std::vector<ImageF> frozen;
        frozen.reserve(t);
        for (int ti = 0; ti < t; ++ti) frozen.push_back(store.view(pos, ti));
        for (int d = 0; d < t; ++d) {
            if (cfg.rgb_pinned && d == rgb_idx) {
                next.view(pos, d) = frozen[d];
                continue;
            }
            consensus::CandidateSet cands = loop_detail::make_candidates(graph, d, frozen, frozen[d]);
            const consensus::EnsembleWeights w = consensus::compute_weights(cands, cfg.metric, cfg.weights, ssim);
            next.view(pos, d) = consensus::cshift_select(cands, w).image;
        }
    });
    next.set_iteration_tag(store.iteration_tag() + 1);
    return next;
}

// One full iteration: train on part_k, then refresh the whole pool.
// Aborts (NumericsError) if more than a quarter of the edges diverge.
inline IterationOutcome run_iteration(TaskGraph& graph, PseudoLabelStore& store,
                                      const std::vector<SampleId>& part, int iteration,
                                      const IterationConfig& cfg) {
    if (!store.complete()) throw ConfigError("pseudo-label store incomplete at iteration start");
    IterationOutcome outcome;

    std::vector<std::map<int, std::vector<float>>> snapshots;
    outcome.diverged_edges = train_all_edges(graph, store, part, iteration, cfg,
                                             cfg.record_variance ? &snapshots : nullptr);
    if (outcome.diverged_edges * 4 > static_cast<int>(graph.edge_count()))
        throw NumericsError("iteration " + std::to_string(iteration) + " aborted: " +
                            std::to_string(outcome.diverged_edges) + " of " +
                            std::to_string(graph.edge_count()) + " edges diverged");

    if (cfg.record_variance) {
        // Inter-candidate variance at epoch checkpoints, on a small probe of
        // this part, using each edge's snapshotted parameters.
        const size_t probe_n = std::min<size_t>(8, part.size());
        TaskGraph probe_graph(graph.tasks(), cfg.arch);
        for (int epoch : cfg.snapshot_epochs()) {
            bool have_all = true;
            for (size_t slot = 0; slot < graph.edge_count(); ++slot)
                if (!snapshots[slot].count(epoch)) have_all = false;
            if (!have_all) continue;
            for (size_t slot = 0; slot < graph.edge_count(); ++slot)
                probe_graph.edges()[slot].core.params = snapshots[slot].at(epoch);
            double total = 0.0;
            size_t count = 0;
            for (size_t pi = 0; pi < probe_n; ++pi) {
                const size_t pos = store.sample_pos(part[pi]);
                std::vector<ImageF> frozen;
                for (int ti = 0; ti < graph.task_count(); ++ti) frozen.push_back(store.view(pos, ti));
                for (int d = 0; d < graph.task_count(); ++d) {
                    const auto cands = loop_detail::make_candidates(probe_graph, d, frozen, frozen[d]);
                    total += loop_detail::candidate_variance(cands);
                    ++count;
                }
            }
            outcome.variance.push_back({iteration, epoch, total / static_cast<double>(count)});
        }
    }

    store = ensemble_phase(graph, store, cfg);
    return outcome;
}

// Per-iteration test-set evaluation. Sources for the edges are the fixed
// expert-initialized views of the test samples; each method's output is
// scored against ground truth with L1 x100.
struct EvalResult {
    std::vector<eval::MetricRow> rows;
    std::map<std::pair<std::string, std::string>, double> edge_l1;
};

inline EvalResult evaluate_iteration(const TaskGraph& graph, const ViewBank& gt_test,
                                     const ViewBank& expert_test, int iteration,
                                     const IterationConfig& cfg) {
    const int t = graph.task_count();
    const size_t n = gt_test.ids.size();
    if (n == 0) throw ConfigError("empty test bank");
    const SsimEngine<float> ssim;

    enum Method { kExpert = 0, kDirect, kAvgDirect, kMean, kCshift, kMethodCount };
    // per-sample accumulators, reduced sequentially afterwards
    std::vector<std::vector<std::array<double, kMethodCount>>> acc(
        n, std::vector<std::array<double, kMethodCount>>(t, {0, 0, 0, 0, 0}));
    std::vector<std::vector<double>> edge_acc(n, std::vector<double>(graph.edge_count(), 0.0));

    std::vector<int> gt_idx(t), ex_idx(t);
    for (int d = 0; d < t; ++d) {
        gt_idx[d] = gt_test.task_index(graph.tasks()[d].name);
        ex_idx[d] = expert_test.task_index(graph.tasks()[d].name);
    }
    const int rgb_d = [&] {
        for (int i = 0; i < t; ++i)
            if (graph.tasks()[i].name == "rgb") return i;
        return -1;
    }();

    parallel_for(n, cfg.workers, [&](size_t i) {
        std::vector<ImageF> sources;
        sources.reserve(t);
        for (int s = 0; s < t; ++s) sources.push_back(expert_test.views[i][ex_idx[s]]);
        for (int d = 0; d < t; ++d) {
            const ImageF& gt = gt_test.views[i][gt_idx[d]];
            const TaskSpec& dst = graph.tasks()[d];
            acc[i][d][kExpert] = eval::l1_x100(sources[d], gt);

            consensus::CandidateSet cands;
            cands.dst = dst;
            ImageF avg_direct(gt.h, gt.w, gt.c);
            for (int s = 0; s < t; ++s) {
                if (s == d) continue;
                ImageF pred = graph.edge(s, d).core.forward(sources[s]);
                edge_acc[i][graph.edge_slot(s, d)] = eval::l1_x100(pred, gt);
                if (s == rgb_d) acc[i][d][kDirect] = eval::l1_x100(pred, gt);
                kernels::axpy(1.0f, pred.data.data(), avg_direct.data.data(), avg_direct.data.size());
                cands.entries.push_back({graph.tasks()[s].name, std::move(pred)});
            }
            kernels::scale(1.0f / static_cast<float>(t - 1), avg_direct.data.data(),
                           avg_direct.data.size());
            if (dst.kind == TaskKind::Classification) renormalize_simplex(avg_direct);
            acc[i][d][kAvgDirect] = eval::l1_x100(avg_direct, gt);

            cands.entries.push_back({"current", sources[d]});
            cands.current_index = static_cast<int>(cands.entries.size()) - 1;
            acc[i][d][kMean] = eval::l1_x100(consensus::mean_ensemble(cands).image, gt);
            const auto w = consensus::compute_weights(cands, cfg.metric, cfg.weights, ssim);
            acc[i][d][kCshift] = eval::l1_x100(consensus::cshift_select(cands, w).image, gt);
        }
    });

    EvalResult res;
    static const char* kNames[kMethodCount] = {"expert", "direct_edge", "avg_direct_edges",
                                               "mean_ensemble", "cshift"};
    for (int d = 0; d < t; ++d) {
        for (int m = 0; m < kMethodCount; ++m) {
            if (m == kDirect && d == rgb_d) continue;  // no rgb->rgb edge
            double mean = 0.0;
            for (size_t i = 0; i < n; ++i) mean += acc[i][d][m];
            mean /= static_cast<double>(n);
            res.rows.push_back({iteration, graph.tasks()[d].name, kNames[m], mean});
        }
    }
    for (int s = 0; s < t; ++s)
        for (int d = 0; d < t; ++d) {
            if (s == d) continue;
            double mean = 0.0;
            for (size_t i = 0; i < n; ++i) mean += edge_acc[i][graph.edge_slot(s, d)];
            mean /= static_cast<double>(n);
            res.edge_l1[{graph.tasks()[s].name, graph.tasks()[d].name}] = mean;
        }
    return res;
}

// Expert-only rows (iteration 0).
inline std::vector<eval::MetricRow> expert_rows(const ViewBank& gt_test, const ViewBank& expert_test) {
    std::vector<eval::MetricRow> rows;
    for (size_t ti = 0; ti < gt_test.tasks.size(); ++ti) {
        double mean = 0.0;
        for (size_t i = 0; i < gt_test.ids.size(); ++i)
            mean += eval::l1_x100(expert_test.views[i][ti], gt_test.views[i][ti]);
        mean /= static_cast<double>(gt_test.ids.size());
        rows.push_back({0, gt_test.tasks[ti].name, "expert", mean});
    }
    return rows;
}

struct RunResult {
    std::vector<eval::MetricRow> rows;
    std::vector<eval::VariancePoint> variance;
    // per iteration (1-based index 0 = iteration 1): per-edge test L1
    std::vector<std::map<std::pair<std::string, std::string>, double>> edge_l1;
    int diverged_edges = 0;
};

// Writes the combined artifacts of a run directory.
inline void emit_reports(const std::filesystem::path& out_dir, const RunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    eval::metrics_csv(result.rows).save(out_dir / "metrics.csv");
    if (!result.variance.empty())
        eval::variance_csv(result.variance).save(out_dir / "consensus_variance.csv");
    if (result.edge_l1.size() >= 2) {
        const auto report = eval::edge_improvement_report(result.edge_l1.front(), result.edge_l1.back());
        eval::edge_improvement_csv(report).save(out_dir / "edge_improvement.csv");
    }
    if (result.rows.empty()) return;  // header-only CSV, nothing to plot

    fs::create_directories(out_dir / "plots");
    // Per-task error-vs-iteration curves.
    std::set<std::string> tasks;
    int max_iter = 0;
    for (const auto& r : result.rows) {
        tasks.insert(r.task);
        max_iter = std::max(max_iter, r.iteration);
    }
    if (max_iter >= 1) {
        for (const auto& task : tasks) {
            std::vector<eval::Series> series;
            for (const char* method : {"expert", "mean_ensemble", "cshift"}) {
                eval::Series s;
                s.name = method;
                for (const auto& r : result.rows)
                    if (r.task == task && r.method == method && r.iteration >= 1) {
                        s.x.push_back(r.iteration);
                        s.y.push_back(r.l1_x100);
                    }
                if (!s.x.empty()) series.push_back(std::move(s));
            }
            if (!series.empty())
                eval::save_line_plot(out_dir / "plots" / (task + "_l1.svg"), task + ": L1 x100 by iteration",
                                     "iteration", "L1 x100", series);
        }
    }
    if (!result.variance.empty()) {
        std::map<int, eval::Series> per_iter;
        for (const auto& p : result.variance) {
            auto& s = per_iter[p.iteration];
            s.name = "iteration " + std::to_string(p.iteration);
            s.x.push_back(p.epoch);
            s.y.push_back(p.variance);
        }
        std::vector<eval::Series> series;
        for (auto& [iter, s] : per_iter) series.push_back(std::move(s));
        eval::save_line_plot(out_dir / "plots" / "consensus_variance.svg",
                             "mean inter-candidate variance", "epoch", "variance", series);
    }
}

// End-to-end driver (the outer loop over dataset parts).
inline RunResult run_cshift(const Dataset& ds, const ExpertMap& experts, const IterationConfig& cfg,
                            const std::optional<std::filesystem::path>& out_dir) {
    if (cfg.n_iters < 0 || cfg.n_iters > static_cast<int>(ds.split().parts.size()))
        throw ConfigError("n_iters exceeds the number of dataset parts");
    namespace fs = std::filesystem;

    const ViewBank gt_test = ViewBank::load_gt(ds, ds.split().test, cfg.workers);
    const ViewBank expert_test = expert_views(gt_test, experts, cfg.workers);

    RunResult result;
    auto rows0 = expert_rows(gt_test, expert_test);
    result.rows.insert(result.rows.end(), rows0.begin(), rows0.end());

    if (cfg.n_iters > 0) {
        std::vector<SampleId> pool;
        for (int k = 0; k < cfg.n_iters; ++k)
            pool.insert(pool.end(), ds.split().parts[k].begin(), ds.split().parts[k].end());
        std::sort(pool.begin(), pool.end());

        const ViewBank gt_pool = ViewBank::load_gt(ds, pool, cfg.workers);
        PseudoLabelStore store = init_from_experts(gt_pool, experts, cfg.align_expert_depth, cfg.workers);
        TaskGraph graph(ds.tasks(), cfg.arch);

        for (int k = 1; k <= cfg.n_iters; ++k) {
            const IterationOutcome outcome =
                run_iteration(graph, store, ds.split().parts[k - 1], k, cfg);
            result.diverged_edges += outcome.diverged_edges;
            result.variance.insert(result.variance.end(), outcome.variance.begin(),
                                   outcome.variance.end());

            EvalResult ev = evaluate_iteration(graph, gt_test, expert_test, k, cfg);
            result.rows.insert(result.rows.end(), ev.rows.begin(), ev.rows.end());
            result.edge_l1.push_back(std::move(ev.edge_l1));

            if (out_dir) {
                const fs::path iter_dir = *out_dir / ("iter" + std::to_string(k));
                fs::create_directories(iter_dir / "edges");
                store.save(iter_dir / "labels");
                for (const auto& e : graph.edges())
                    write_checkpoint(e, iter_dir / "edges" / (e.src.name + "__" + e.dst.name + ".csprm"));
                std::vector<eval::MetricRow> iter_rows;
                for (const auto& r : result.rows)
                    if (r.iteration == k) iter_rows.push_back(r);
                eval::metrics_csv(iter_rows).save(iter_dir / "metrics.csv");
            }
        }
    }

    if (out_dir) emit_reports(*out_dir, result);
    return result;
}

}  // namespace cshift::graph
