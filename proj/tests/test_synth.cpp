#include <doctest.h>

#include <cmath>

#include "cshift/synth/expert.hpp"
#include "cshift/synth/scene.hpp"
#include "cshift/synth/views.hpp"
#include "oracles.hpp"

using namespace cshift;
using namespace cshift::synth;

namespace {

SceneConfig small_cfg(uint64_t seed = 3) {
    SceneConfig cfg;
    cfg.h = 32;
    cfg.w = 32;
    cfg.n_shapes = 4;
    cfg.class_count = 6;
    cfg.seed = seed;
    return cfg;
}

ImageF random_rgb(int h, int w, uint64_t seed) {
    Rng rng(seed);
    ImageF img(h, w, 3);
    for (auto& v : img.data) v = rng.uniform_float();
    return img;
}

}  // namespace

TEST_CASE("scene generation is deterministic and valid") {
    const SceneConfig cfg = small_cfg();
    const SceneViews a = generate_scene(cfg, 5);
    const SceneViews b = generate_scene(cfg, 5);
    CHECK(a.rgb.image == b.rgb.image);
    CHECK(a.depth.image == b.depth.image);
    CHECK(a.normals.image == b.normals.image);
    CHECK(a.seg.image == b.seg.image);

    const SceneViews c = generate_scene(cfg, 6);
    CHECK(a.rgb.image.data != c.rgb.image.data);

    for (const PredictionMap* m : {&a.rgb, &a.depth, &a.normals, &a.seg})
        CHECK(check_map(*m).empty());

    SceneConfig bad = cfg;
    bad.n_shapes = 0;
    CHECK_THROWS_AS(generate_scene(bad, 0), ConfigError);
    bad = cfg;
    bad.h = 8;
    CHECK_THROWS_AS(generate_scene(bad, 0), ConfigError);
}

TEST_CASE("decoded normals have unit euclidean norm everywhere") {
    const SceneViews v = generate_scene(small_cfg(9), 2);
    for (int y = 0; y < v.normals.image.h; ++y)
        for (int x = 0; x < v.normals.image.w; ++x) {
            double n2 = 0;
            for (int ch = 0; ch < 3; ++ch) {
                const double n = decode_normal(v.normals.image.at(y, x, ch));
                n2 += n * n;
            }
            REQUIRE(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-5));
        }
}

TEST_CASE("flat depth yields constant (0,0,1) normals") {
    ImageF depth(16, 16, 1, 0.4f);
    const ImageF n = normals_from_depth(depth, 8.0f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(n.at(y, x, 0) == 0.0f);
            CHECK(n.at(y, x, 1) == 0.0f);
            CHECK(n.at(y, x, 2) == 1.0f);
        }
}

TEST_CASE("derived views: forced values") {
    SUBCASE("pure red rgb -> grayscale constant 0.299") {
        ImageF rgb(8, 8, 3);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) rgb.at(y, x, 0) = 1.0f;
        const ImageF g = rgb_to_grayscale(rgb);
        for (float v : g.data) CHECK(v == doctest::Approx(0.299f));
    }
    SUBCASE("constant rgb -> all edge scales are zero") {
        ImageF rgb(16, 16, 3, 0.37f);
        for (int r : {0, 2, 4}) {
            const ImageF e = edges_view(rgb, r);
            for (float v : e.data) CHECK(v == 0.0f);
        }
    }
    SUBCASE("halftone is exact 2-class one-hot") {
        const ImageF rgb = random_rgb(16, 16, 77);
        const ImageF ht = halftone_view(rgb);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                const float a = ht.at(y, x, 0), b = ht.at(y, x, 1);
                CHECK(a + b == 1.0f);
                CHECK((a == 0.0f || a == 1.0f));
            }
    }
    SUBCASE("unsupported task rejected") {
        TaskSpec bogus{"depth", 1, TaskKind::Regression};
        const PredictionMap rgb(TaskSpec{"rgb", 3, TaskKind::Regression}, random_rgb(8, 8, 1));
        CHECK_THROWS_AS(derive_view(rgb, bogus), ConfigError);
    }
}

TEST_CASE("hsv round-trips through an independent inverse within 1e-5") {
    const ImageF rgb = random_rgb(16, 16, 123);
    const ImageF hsv = rgb_to_hsv(rgb);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            double r, g, b;
            oracle::hsv_to_rgb(hsv.at(y, x, 0), hsv.at(y, x, 1), hsv.at(y, x, 2), r, g, b);
            REQUIRE(r == doctest::Approx(rgb.at(y, x, 0)).epsilon(1e-5));
            REQUIRE(g == doctest::Approx(rgb.at(y, x, 1)).epsilon(1e-5));
            REQUIRE(b == doctest::Approx(rgb.at(y, x, 2)).epsilon(1e-5));
        }
}

TEST_CASE("expert: zero corruption is the identity") {
    const SceneViews v = generate_scene(small_cfg(), 0);
    ExpertSimulator ex;
    ex.task = v.depth.task;
    ex.seed = 3;
    const PredictionMap out = expert_predict(ex, v.depth, 0);
    CHECK(out.image == v.depth.image);

    ExpertSimulator seg_ex;
    seg_ex.task = v.seg.task;
    seg_ex.seed = 3;
    CHECK(expert_predict(seg_ex, v.seg, 0).image == v.seg.image);
}

TEST_CASE("expert: gaussian noise has folded-normal mean error") {
    TaskSpec depth{"depth", 1, TaskKind::Regression};
    PredictionMap gt(depth, 64, 64);
    for (auto& v : gt.image.data) v = 0.5f;
    ExpertSimulator ex;
    ex.task = depth;
    ex.sigma = 0.1f;
    ex.seed = 17;
    const PredictionMap out = expert_predict(ex, gt, 4);
    // E|N(0, 0.1)| = 0.1*sqrt(2/pi) ~ 0.0798
    const double mean_err = oracle::l1_x100(out.image, gt.image) / 100.0;
    CHECK(mean_err > 0.06);
    CHECK(mean_err < 0.10);
    CHECK(check_map(out).empty());
}

TEST_CASE("expert: determinism per (seed, sample), variation across samples") {
    const SceneViews v = generate_scene(small_cfg(), 1);
    ExpertSimulator ex;
    ex.task = v.depth.task;
    ex.sigma = 0.08f;
    ex.bias_amplitude = 0.05f;
    ex.blur_radius = 1;
    ex.seed = 5;
    CHECK(expert_predict(ex, v.depth, 3).image == expert_predict(ex, v.depth, 3).image);
    CHECK(expert_predict(ex, v.depth, 3).image.data != expert_predict(ex, v.depth, 4).image.data);
}

TEST_CASE("expert: error is monotone in sigma for a fixed noise field") {
    const SceneViews v = generate_scene(small_cfg(11), 2);
    double prev = -1.0;
    for (float sigma : {0.0f, 0.05f, 0.1f, 0.2f, 0.4f}) {
        ExpertSimulator ex;
        ex.task = v.depth.task;
        ex.sigma = sigma;
        ex.seed = 9;  // same seed => same unit noise field, scaled
        const double err = oracle::l1_x100(expert_predict(ex, v.depth, 7).image, v.depth.image);
        CHECK(err >= prev);
        prev = err;
    }
}

TEST_CASE("expert: classification flips") {
    const SceneViews v = generate_scene(small_cfg(13), 3);

    SUBCASE("flip rate 0 keeps the argmax map unchanged") {
        ExpertSimulator ex;
        ex.task = v.seg.task;
        ex.flip_rate = 0.0f;
        ex.seed = 21;
        CHECK(expert_predict(ex, v.seg, 1).image == v.seg.image);
    }
    SUBCASE("flip rate perturbs roughly that fraction of pixels, simplex holds") {
        ExpertSimulator ex;
        ex.task = v.seg.task;
        ex.flip_rate = 0.25f;
        ex.seed = 21;
        const PredictionMap out = expert_predict(ex, v.seg, 1);
        CHECK(check_map(out).empty());
        int flipped = 0;
        for (int y = 0; y < out.image.h; ++y)
            for (int x = 0; x < out.image.w; ++x) {
                int gt_best = 0, out_best = 0;
                for (int c = 1; c < out.image.c; ++c) {
                    if (v.seg.image.at(y, x, c) > v.seg.image.at(y, x, gt_best)) gt_best = c;
                    if (out.image.at(y, x, c) > out.image.at(y, x, out_best)) out_best = c;
                }
                flipped += gt_best != out_best;
            }
        const double rate = double(flipped) / (out.image.h * out.image.w);
        CHECK(rate > 0.17);
        CHECK(rate < 0.33);
    }
    SUBCASE("error monotone in flip rate") {
        double prev = -1.0;
        for (float rate : {0.0f, 0.1f, 0.3f, 0.6f}) {
            ExpertSimulator ex;
            ex.task = v.seg.task;
            ex.flip_rate = rate;
            ex.seed = 33;
            const double err = oracle::l1_x100(expert_predict(ex, v.seg, 5).image, v.seg.image);
            CHECK(err >= prev);
            prev = err;
        }
    }
}

TEST_CASE("expert: corrupted outputs always satisfy map invariants") {
    const SceneViews v = generate_scene(small_cfg(17), 8);
    ExpertSimulator ex;
    ex.task = v.depth.task;
    ex.sigma = 0.5f;
    ex.bias_amplitude = 0.3f;
    ex.blur_radius = 2;
    ex.seed = 2;
    CHECK(check_map(expert_predict(ex, v.depth, 0)).empty());

    ExpertSimulator bad;
    bad.task = v.depth.task;
    bad.flip_rate = 1.0f;
    CHECK_THROWS_AS(expert_predict(bad, v.depth, 0), ConfigError);

    ExpertSimulator mismatch;
    mismatch.task = v.seg.task;
    CHECK_THROWS_AS(expert_predict(mismatch, v.depth, 0), ConfigError);
}
