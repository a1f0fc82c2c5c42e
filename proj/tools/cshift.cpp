// cshift: consensus-shift multi-task graph engine.
//
// Subcommands:
//   gen-dataset  --config cfg.json [--out DIR] [--png]
//   run          --config cfg.json [--iters N] [--metric M] [--name NAME] [--out DIR]
//   experiment   {node-sweep|weak-expert|mmd|metric-ablation} --config cfg.json [--out DIR]
//
// Progress goes to stderr; machine-readable results go to files. Exit
// codes: 0 ok, 2 config error, 3 I/O or format error, 4 numeric failure.

#include <CLI11.hpp>

#include <iostream>

#include "cshift/cli/config.hpp"
#include "cshift/eval/mmd.hpp"

namespace {

using namespace cshift;

int cmd_gen_dataset(const cli::RunConfig& cfg, const std::string& out_override, bool png, int workers) {
    const std::filesystem::path root =
        out_override.empty() ? cfg.dataset_root : std::filesystem::path(out_override);
    Dataset ds(cfg.dataset, root);
    ds.generate(workers, png);
    std::cerr << "dataset written to " << root << " (" << cfg.dataset.n_samples << " samples, "
              << cfg.dataset.roster.size() << " tasks)\n";
    return 0;
}

int cmd_run(const cli::RunConfig& cfg_in, int iters_override, const std::string& metric_override,
            const std::string& name_override, const std::string& out_override) {
    cli::RunConfig cfg = cfg_in;
    if (iters_override >= 0) cfg.iteration.n_iters = iters_override;
    if (!metric_override.empty()) cfg.iteration.metric = consensus::metric_from_name(metric_override);
    const std::string name = name_override.empty() ? cfg.run_name : name_override;
    const std::filesystem::path out =
        (out_override.empty() ? cfg.output_root : std::filesystem::path(out_override)) / name;

    Dataset ds(cfg.dataset, cfg.dataset_root);
    ds.verify_on_disk();
    const graph::RunResult result = graph::run_cshift(ds, cfg.experts, cfg.iteration, out);
    std::cerr << "run '" << name << "' finished: " << result.rows.size() << " metric rows, "
              << result.diverged_edges << " diverged edges -> " << out << "\n";
    for (const auto& r : result.rows)
        if (r.method == "cshift")
            std::cerr << "  iter " << r.iteration << " " << r.task << " cshift l1x100 "
                      << format_fixed(r.l1_x100, 3) << "\n";
    return 0;
}

int cmd_experiment(const cli::RunConfig& cfg, const std::string& which, const std::string& out_override) {
    namespace fs = std::filesystem;
    const fs::path out =
        (out_override.empty() ? cfg.output_root : fs::path(out_override)) / (cfg.run_name + "_" + which);
    fs::create_directories(out);
    Dataset ds(cfg.dataset, cfg.dataset_root);
    ds.verify_on_disk();

    if (which == "node-sweep") {
        for (const auto ordering : {graph::NodeOrdering::Random, graph::NodeOrdering::PerformanceBased}) {
            const bool random = ordering == graph::NodeOrdering::Random;
            const auto curve = graph::node_addition_experiment(
                ds, cfg.experts, cfg.iteration, cfg.experiments.node_sweep_dest, ordering,
                cfg.experiments.node_order_seed, cfg.experiments.node_max_pool);
            eval::CsvWriter csv({"n_nodes", "cshift_l1_x100", "mean_l1_x100", "expert_l1_x100"});
            eval::Series s_cshift{"cshift", {}, {}}, s_mean{"mean_ensemble", {}, {}};
            for (const auto& p : curve) {
                csv.add_row({std::to_string(p.n_nodes), format_fixed(p.cshift_l1, 6),
                             format_fixed(p.mean_l1, 6), format_fixed(p.expert_l1, 6)});
                s_cshift.x.push_back(p.n_nodes);
                s_cshift.y.push_back(p.cshift_l1);
                s_mean.x.push_back(p.n_nodes);
                s_mean.y.push_back(p.mean_l1);
            }
            const std::string tag = random ? "random" : "performance";
            csv.save(out / ("node_sweep_" + tag + ".csv"));
            eval::save_line_plot(out / ("node_sweep_" + tag + ".svg"),
                                 cfg.experiments.node_sweep_dest + " error vs graph size (" + tag + ")",
                                 "nodes", "L1 x100", {s_cshift, s_mean});
        }
        std::cerr << "node sweep written to " << out << "\n";
        return 0;
    }

    if (which == "weak-expert") {
        const auto table = graph::weak_expert_sweep(ds, cfg.experts, cfg.iteration,
                                                    cfg.experiments.weak_strengths,
                                                    cfg.experiments.weak_max_pool);
        eval::CsvWriter csv({"strength", "expert_l1_x100", "mean_l1_x100", "cshift_l1_x100", "boost_pct"});
        for (const auto& p : table)
            csv.add_row({format_fixed(p.strength, 4), format_fixed(p.expert_l1, 6),
                         format_fixed(p.mean_l1, 6), format_fixed(p.cshift_l1, 6),
                         format_fixed(p.boost_pct, 6)});
        csv.save(out / "weak_expert.csv");
        eval::Series se{"expert", {}, {}}, sc{"cshift", {}, {}};
        for (const auto& p : table) {
            se.x.push_back(p.strength);
            se.y.push_back(p.expert_l1);
            sc.x.push_back(p.strength);
            sc.y.push_back(p.cshift_l1);
        }
        eval::save_line_plot(out / "weak_expert.svg", "seg error vs expert strength", "flip rate",
                             "L1 x100", {se, sc});
        std::cerr << "weak-expert sweep written to " << out << "\n";
        return 0;
    }

    if (which == "metric-ablation") {
        const std::vector<consensus::MetricKind> metrics = {
            consensus::MetricKind::L1,  consensus::MetricKind::L2,   consensus::MetricKind::Psnr,
            consensus::MetricKind::Ssim, consensus::MetricKind::Variance,
            consensus::MetricKind::Perceptual};
        const auto rows = graph::metric_ablation(ds, cfg.experts, cfg.iteration, metrics,
                                                 cfg.experiments.ablation_max_pool);
        eval::CsvWriter csv({"metric", "task", "expert_l1_x100", "mean_l1_x100", "cshift_l1_x100"});
        for (const auto& r : rows)
            csv.add_row({consensus::metric_name(r.metric), r.task, format_fixed(r.expert_l1, 6),
                         format_fixed(r.mean_l1, 6), format_fixed(r.cshift_l1, 6)});
        csv.save(out / "metric_ablation.csv");
        std::cerr << "metric ablation written to " << out << "\n";
        return 0;
    }

    if (which == "mmd") {
        // Domain gap table: two splits of this dataset (within-domain) vs a
        // differently seeded world (cross-domain), at raw-pixel level and
        // through a trained edge's penultimate features.
        const int n = cfg.experiments.mmd_samples;
        const int stride = cfg.experiments.mmd_stride;
        auto take = [&](const std::vector<SampleId>& ids) {
            std::vector<SampleId> out(ids.begin(), ids.begin() + std::min<size_t>(n, ids.size()));
            return out;
        };
        const graph::ViewBank a1 = graph::ViewBank::load_gt(ds, take(ds.split().parts.at(0)), cfg.workers);
        const graph::ViewBank a2 = graph::ViewBank::load_gt(ds, take(ds.split().parts.size() > 1
                                                                         ? ds.split().parts.at(1)
                                                                         : ds.split().val),
                                                            cfg.workers);
        DatasetConfig other_cfg = cfg.dataset;
        other_cfg.scene.seed = cfg.experiments.mmd_other_seed;
        std::vector<std::vector<ImageF>> other_rgb(static_cast<size_t>(n));
        parallel_for(other_rgb.size(), cfg.workers, [&](size_t i) {
            other_rgb[i] = {synth::generate_scene(other_cfg.scene, static_cast<int>(i)).rgb.image};
        });

        // A small distilled edge supplies the feature embedding.
        const int rgb_idx = a1.task_index("rgb");
        EdgeModel probe(ds.task("rgb"), ds.task("grayscale"), ArchKind::PatchLinear);
        probe.init(hash_seed({cfg.iteration.train_seed, 0xfeedull}));
        {
            std::vector<ImageF> gray;
            std::vector<const ImageF*> ins, outs;
            gray.reserve(a1.ids.size());
            for (size_t i = 0; i < a1.ids.size(); ++i)
                gray.push_back(synth::rgb_to_grayscale(a1.views[i][rgb_idx]));
            for (size_t i = 0; i < a1.ids.size(); ++i) {
                ins.push_back(&a1.views[i][rgb_idx]);
                outs.push_back(&gray[i]);
            }
            TrainConfig tc;
            tc.epochs = 8;
            tc.seed = hash_seed({cfg.iteration.train_seed, 0x33dull});
            const SsimEngine<float> ssim;
            train_edge(probe, ins, outs, tc, ssim);
        }

        auto raw_embed = [&](const std::vector<ImageF>& rgbs) {
            std::vector<eval::SampleEmbedding> out;
            for (const auto& img : rgbs) out.push_back(eval::embed_image(img, stride));
            return out;
        };
        auto feat_embed = [&](const std::vector<ImageF>& rgbs) {
            std::vector<eval::SampleEmbedding> out;
            for (const auto& img : rgbs) out.push_back(eval::embed_image(probe.features(img), stride));
            return out;
        };
        auto collect = [&](const graph::ViewBank& bank) {
            std::vector<ImageF> out;
            for (const auto& v : bank.views) out.push_back(v[rgb_idx]);
            return out;
        };
        const std::vector<ImageF> ra1 = collect(a1), ra2 = collect(a2);
        std::vector<ImageF> rb;
        for (const auto& v : other_rgb) rb.push_back(v[0]);

        eval::CsvWriter csv({"domain_a", "domain_b", "representation", "mmd2_x100"});
        auto add = [&](const std::string& da, const std::string& db, const std::string& rep,
                       const std::vector<eval::SampleEmbedding>& X,
                       const std::vector<eval::SampleEmbedding>& Y) {
            csv.add_row({da, db, rep, format_fixed(100.0 * eval::mmd2_unbiased(X, Y), 6)});
        };
        add("self_part1", "self_part2", "raw", raw_embed(ra1), raw_embed(ra2));
        add("self_part1", "other_world", "raw", raw_embed(ra1), raw_embed(rb));
        add("self_part1", "self_part2", "features", feat_embed(ra1), feat_embed(ra2));
        add("self_part1", "other_world", "features", feat_embed(ra1), feat_embed(rb));
        csv.save(out / "mmd.csv");
        std::cerr << "mmd table written to " << out << "\n";
        return 0;
    }

    throw ConfigError("unknown experiment '" + which + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"consensus-shift multi-task graph engine"};
    app.require_subcommand(1);

    std::string config_path, out_dir, metric, run_name, experiment_kind;
    int iters = -1, workers = 0;
    bool png = false;

    auto* gen = app.add_subcommand("gen-dataset", "generate the synthetic dataset");
    gen->add_option("--config", config_path, "config file")->required();
    gen->add_option("--out", out_dir, "output directory (default: dataset.root)");
    gen->add_flag("--png", png, "also export rgb previews as PNG");
    gen->add_option("--workers", workers, "worker threads (0 = auto)");

    auto* run = app.add_subcommand("run", "run the consensus-shift loop");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--iters", iters, "override iteration count");
    run->add_option("--metric", metric, "override selection metric (l1|l2|psnr|ssim|var|perc)");
    run->add_option("--name", run_name, "run name (default from config)");
    run->add_option("--out", out_dir, "output root (default from config)");
    run->add_option("--workers", workers, "worker threads (0 = auto)");

    auto* exp = app.add_subcommand("experiment", "run a named experiment");
    exp->add_option("kind", experiment_kind, "node-sweep|weak-expert|mmd|metric-ablation")->required();
    exp->add_option("--config", config_path, "config file")->required();
    exp->add_option("--out", out_dir, "output root (default from config)");
    exp->add_option("--workers", workers, "worker threads (0 = auto)");

    CLI11_PARSE(app, argc, argv);

    try {
        cshift::cli::RunConfig cfg = cshift::cli::load_config(config_path);
        if (workers > 0) {
            cfg.workers = workers;
            cfg.iteration.workers = workers;
        }
        if (gen->parsed()) return cmd_gen_dataset(cfg, out_dir, png, cfg.workers);
        if (run->parsed()) return cmd_run(cfg, iters, metric, run_name, out_dir);
        if (exp->parsed()) return cmd_experiment(cfg, experiment_kind, out_dir);
        return 2;
    } catch (const cshift::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cshift::NumericsError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const cshift::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
