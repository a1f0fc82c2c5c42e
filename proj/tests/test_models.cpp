#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cshift/models/checkpoint.hpp"
#include "cshift/models/edge_model.hpp"
#include "cshift/models/optimizer.hpp"
#include "cshift/models/trainer.hpp"
#include "cshift/synth/scene.hpp"
#include "cshift/synth/views.hpp"
#include "oracles.hpp"

using namespace cshift;

namespace {

TaskSpec rgb_task() { return {"rgb", 3, TaskKind::Regression}; }
TaskSpec gray_task() { return {"grayscale", 1, TaskKind::Regression}; }
TaskSpec seg_task(int c = 4) { return {"seg", c, TaskKind::Classification}; }

ImageF random_rgb(int h, int w, uint64_t seed) {
    Rng rng(seed);
    ImageF img(h, w, 3);
    for (auto& v : img.data) v = rng.uniform_range(0.1f, 0.9f);
    return img;
}

}  // namespace

TEST_CASE("patch linear with zero parameters outputs the sigmoid midpoint") {
    EdgeModel edge(rgb_task(), gray_task(), ArchKind::PatchLinear);
    const PredictionMap out = edge.forward(PredictionMap(rgb_task(), random_rgb(9, 7, 1)));
    CHECK(out.image.h == 9);
    CHECK(out.image.w == 7);
    CHECK(out.image.c == 1);
    for (float v : out.image.data) CHECK(v == 0.5f);
}

TEST_CASE("shallow conv output has destination dims and satisfies invariants") {
    EdgeModel edge(rgb_task(), seg_task(5), ArchKind::ShallowConv);
    edge.init(42);
    const PredictionMap out = edge.forward(PredictionMap(rgb_task(), random_rgb(12, 10, 2)));
    CHECK(out.image.h == 12);
    CHECK(out.image.w == 10);
    CHECK(out.image.c == 5);
    CHECK(check_map(out).empty());

    EdgeModel other(gray_task(), seg_task(5), ArchKind::PatchLinear);
    CHECK_THROWS_AS(other.forward(PredictionMap(rgb_task(), random_rgb(4, 4, 3))), ShapeError);
}

TEST_CASE("parameter counts are fixed by architecture and channel counts") {
    CHECK(arch_param_count(ArchKind::PatchLinear, 3, 1) == 25 * 3 * 1 + 1);
    CHECK(arch_param_count(ArchKind::PatchLinear, 1, 4) == (25 * 1) * 4 + 4);
    CHECK(arch_param_count(ArchKind::ShallowConv, 3, 2) ==
          size_t(9 * 3 * 16 + 16) + (9 * 16 * 16 + 16) + (9 * 16 * 2 + 2));
}

TEST_CASE("sgd nesterov: forced examples") {
    SUBCASE("zero gradients leave parameters unchanged") {
        std::vector<float> p = {1.0f, -2.0f};
        OptimizerState opt(2, 0.1f, 0.9f, 0.0f);
        sgd_nesterov_step(p, {0.0f, 0.0f}, opt);
        CHECK(p == std::vector<float>{1.0f, -2.0f});
    }
    SUBCASE("hand-evaluated single step: p = 1 - 0.1*1.9 = 0.81") {
        std::vector<float> p = {1.0f};
        OptimizerState opt(1, 0.1f, 0.9f, 0.0f);
        sgd_nesterov_step(p, {1.0f}, opt);
        CHECK(opt.momentum[0] == 1.0f);
        CHECK(p[0] == doctest::Approx(0.81f));
    }
    SUBCASE("multi-step recursion matches the scalar oracle") {
        std::vector<float> p = {0.7f};
        OptimizerState opt(1, 5e-2f, 0.9f, 1e-3f);
        oracle::ScalarNesterov ref{0.7, 0.0, 5e-2, 0.9, 1e-3};
        for (int i = 0; i < 10; ++i) {
            const float g = 0.3f - 0.01f * i;
            sgd_nesterov_step(p, {g}, opt);
            ref.step(g);
            REQUIRE(p[0] == doctest::Approx(ref.p).epsilon(1e-5));
        }
    }
    SUBCASE("non-finite gradients raise NumericsError") {
        std::vector<float> p = {1.0f};
        OptimizerState opt(1);
        CHECK_THROWS_AS(sgd_nesterov_step(p, {std::nanf("")}, opt), NumericsError);
    }
}

TEST_CASE("plateau scheduler: forced walks") {
    SUBCASE("strictly improving losses never reduce the lr") {
        OptimizerState opt(1, 5e-2f);
        SchedulerState sched;
        float loss = 1.0f;
        for (int i = 0; i < 40; ++i) {
            plateau_step(sched, loss, opt);
            loss *= 0.9f;
        }
        CHECK(opt.lr == 5e-2f);
    }
    SUBCASE("11 identical losses after a best trigger exactly one halving") {
        OptimizerState opt(1, 5e-2f);
        SchedulerState sched;
        plateau_step(sched, 1.0f, opt);  // becomes best
        for (int i = 0; i < 11; ++i) plateau_step(sched, 1.0f, opt);
        CHECK(opt.lr == doctest::Approx(2.5e-2f));
        plateau_step(sched, 1.0f, opt);  // counter restarted, no second cut yet
        CHECK(opt.lr == doctest::Approx(2.5e-2f));
    }
    SUBCASE("lr floor holds at 5e-5") {
        OptimizerState opt(1, 6e-5f);
        SchedulerState sched;
        plateau_step(sched, 1.0f, opt);
        for (int i = 0; i < 12; ++i) plateau_step(sched, 1.0f, opt);
        CHECK(opt.lr == 5e-5f);
        for (int i = 0; i < 12; ++i) plateau_step(sched, 1.0f, opt);
        CHECK(opt.lr == 5e-5f);
    }
    SUBCASE("sub-threshold improvement still counts as plateau") {
        OptimizerState opt(1, 4e-2f);
        SchedulerState sched;
        plateau_step(sched, 1.0f, opt);
        for (int i = 0; i < 11; ++i) plateau_step(sched, 0.995f, opt);  // < 1% better
        CHECK(opt.lr == doctest::Approx(2e-2f));
    }
}

TEST_CASE("training: epochs=0 leaves the model untouched with an empty trace") {
    EdgeModel edge(rgb_task(), gray_task(), ArchKind::PatchLinear);
    edge.init(7);
    const std::vector<float> before = edge.core.params;
    const ImageF in = random_rgb(8, 8, 3);
    const ImageF out = synth::rgb_to_grayscale(in);
    TrainConfig cfg;
    cfg.epochs = 0;
    const SsimEngine<float> ssim;
    const TrainTrace trace = train_edge(edge, {&in}, {&out}, cfg, ssim);
    CHECK(trace.epoch_loss.empty());
    CHECK(edge.core.params == before);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    std::vector<ImageF> ins, outs;
    for (int i = 0; i < 6; ++i) {
        ins.push_back(random_rgb(10, 10, 100 + i));
        outs.push_back(synth::rgb_to_grayscale(ins.back()));
    }
    std::vector<const ImageF*> pin, pout;
    for (size_t i = 0; i < ins.size(); ++i) {
        pin.push_back(&ins[i]);
        pout.push_back(&outs[i]);
    }
    const SsimEngine<float> ssim;
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch = 4;
    cfg.seed = 99;

    EdgeModel a(rgb_task(), gray_task(), ArchKind::PatchLinear);
    a.init(1);
    EdgeModel b(rgb_task(), gray_task(), ArchKind::PatchLinear);
    b.init(1);
    const TrainTrace ta = train_edge(a, pin, pout, cfg, ssim);
    const TrainTrace tb = train_edge(b, pin, pout, cfg, ssim);
    CHECK(a.core.params == b.core.params);
    CHECK(ta.epoch_loss == tb.epoch_loss);

    EdgeModel c(rgb_task(), gray_task(), ArchKind::PatchLinear);
    c.init(1);
    TrainConfig cfg2 = cfg;
    cfg2.seed = 100;
    train_edge(c, pin, pout, cfg2, ssim);
    CHECK(a.core.params != c.core.params);
}

TEST_CASE("rgb->grayscale patch linear converges on the linear task") {
    synth::SceneConfig scfg;
    scfg.h = 24;
    scfg.w = 24;
    scfg.seed = 5;
    std::vector<ImageF> ins, outs;
    for (int i = 0; i < 24; ++i) {
        ins.push_back(synth::generate_scene(scfg, i).rgb.image);
        outs.push_back(synth::rgb_to_grayscale(ins.back()));
    }
    std::vector<const ImageF*> pin, pout;
    for (size_t i = 0; i < ins.size(); ++i) {
        pin.push_back(&ins[i]);
        pout.push_back(&outs[i]);
    }
    EdgeModel edge(rgb_task(), gray_task(), ArchKind::PatchLinear);
    edge.init(3);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch = 4;
    cfg.seed = 11;
    const SsimEngine<float> ssim;
    const TrainTrace trace = train_edge(edge, pin, pout, cfg, ssim);
    REQUIRE(trace.epoch_loss.size() == 30);
    CHECK(trace.epoch_loss.back() < 1e-3f);

    const ImageF test_in = synth::generate_scene(scfg, 1000).rgb.image;
    const ImageF test_gt = synth::rgb_to_grayscale(test_in);
    const ImageF pred = edge.core.forward(test_in);
    CHECK(oracle::l1_x100(pred, test_gt) < 1.0);
}

TEST_CASE("parameter gradients match finite differences (both archs, both losses)") {
    const SsimEngine<double> engine;
    Rng pick(2024);
    int checked = 0;
    for (const ArchKind arch : {ArchKind::PatchLinear, ArchKind::ShallowConv}) {
        for (const bool classification : {false, true}) {
            for (uint64_t seed = 0; seed < 3; ++seed) {
                const int c_in = 1 + int(pick.uniform_index(3));
                const int c_out = classification ? 2 + int(pick.uniform_index(3)) : 1 + int(pick.uniform_index(2));
                ModelCore<double> core(arch, c_in, c_out,
                                       classification ? TaskKind::Classification : TaskKind::Regression);
                core.init(hash_seed({seed, uint64_t(c_in), uint64_t(c_out)}));

                Rng rng(hash_seed({seed, 0xda7aull}));
                Image<double> in(7, 7, c_in);
                for (auto& v : in.data) v = 0.1 + 0.8 * rng.uniform_double();
                Image<double> target(7, 7, c_out);
                if (classification) {
                    for (int y = 0; y < 7; ++y)
                        for (int x = 0; x < 7; ++x) {
                            double s = 0;
                            for (int ch = 0; ch < c_out; ++ch) {
                                target.at(y, x, ch) = 0.05 + rng.uniform_double();
                                s += target.at(y, x, ch);
                            }
                            for (int ch = 0; ch < c_out; ++ch) target.at(y, x, ch) /= s;
                        }
                } else {
                    for (auto& v : target.data) v = 0.1 + 0.8 * rng.uniform_double();
                }
                const LossKind kind = classification ? LossKind::CrossEntropy : LossKind::RegressionL2Ssim;

                ForwardCache<double> cache;
                core.run_forward(in, cache, true);
                const auto loss = composite_loss_images<double>(cache.output, target, kind, engine);
                const std::vector<double> grads = core.backward(in, cache, loss.grad);

                auto eval_loss = [&]() {
                    return composite_loss_images<double>(core.forward(in), target, kind, engine, nullptr,
                                                         false)
                        .value;
                };
                const double step = 1e-6;
                double max_rel = 0;
                for (int probe = 0; probe < 24; ++probe) {
                    const size_t i = pick.uniform_index(core.params.size());
                    const double keep = core.params[i];
                    core.params[i] = keep + step;
                    const double up = eval_loss();
                    core.params[i] = keep - step;
                    const double dn = eval_loss();
                    core.params[i] = keep;
                    const double fd = (up - dn) / (2 * step);
                    const double denom = std::max({std::fabs(fd), std::fabs(grads[i]), 1e-6});
                    max_rel = std::max(max_rel, std::fabs(fd - grads[i]) / denom);
                }
                CHECK(max_rel < 1e-4);
                ++checked;
            }
        }
    }
    CHECK(checked == 12);
}

TEST_CASE("float and double forward paths agree closely") {
    ModelCore<float> mf(ArchKind::ShallowConv, 3, 2, TaskKind::Regression);
    mf.init(5);
    ModelCore<double> md(ArchKind::ShallowConv, 3, 2, TaskKind::Regression);
    md.init(5);
    for (size_t i = 0; i < mf.params.size(); ++i) md.params[i] = mf.params[i];

    const ImageF in = random_rgb(10, 10, 8);
    ImageD ind(10, 10, 3);
    for (size_t i = 0; i < in.data.size(); ++i) ind.data[i] = in.data[i];
    const ImageF of = mf.forward(in);
    const ImageD od = md.forward(ind);
    for (size_t i = 0; i < of.data.size(); ++i)
        REQUIRE(double(of.data[i]) == doctest::Approx(od.data[i]).epsilon(1e-4));
}

TEST_CASE("checkpoints round-trip parameters bit-exactly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cshift_ckpt";
    fs::create_directories(dir);
    EdgeModel edge(rgb_task(), seg_task(3), ArchKind::ShallowConv);
    edge.init(77);
    write_checkpoint(edge, dir / "e.csprm");
    const EdgeModel back = read_checkpoint(dir / "e.csprm", rgb_task(), seg_task(3));
    CHECK(back.core.params == edge.core.params);
    CHECK(back.core.arch == ArchKind::ShallowConv);
    CHECK_THROWS_AS(read_checkpoint(dir / "e.csprm", gray_task(), seg_task(3)), FormatError);
}

TEST_CASE("init spreads weights and zeroes biases") {
    ModelCore<float> core(ArchKind::PatchLinear, 3, 2, TaskKind::Regression);
    core.init(8);
    const auto layers = arch_layers(ArchKind::PatchLinear, 3, 2);
    const size_t wc = layers[0].weight_count();
    bool any_nonzero = false;
    for (size_t i = 0; i < wc; ++i) any_nonzero |= core.params[i] != 0.0f;
    CHECK(any_nonzero);
    for (size_t i = wc; i < core.params.size(); ++i) CHECK(core.params[i] == 0.0f);
}
