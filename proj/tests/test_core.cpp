#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cshift/core/dataset.hpp"
#include "cshift/core/map_io.hpp"
#include "cshift/core/splits.hpp"

using namespace cshift;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("cshift_core_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

TaskSpec reg1() { return {"depth", 1, TaskKind::Regression}; }

std::string read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("csmap: header layout and payload bytes are exact") {
    const fs::path dir = temp_dir("fmt");
    PredictionMap m(reg1(), 1, 1);
    m.image.at(0, 0, 0) = 0.5f;
    write_map(m, dir / "one.csmap");

    const std::string bytes = read_bytes(dir / "one.csmap");
    REQUIRE(bytes.size() == 20 + 4);  // magic 6 + version 2 + dims 12, then one float
    CHECK(bytes.substr(0, 6) == std::string("CSMAP\0", 6));
    CHECK(static_cast<unsigned char>(bytes[6]) == 1);  // version u16le
    CHECK(static_cast<unsigned char>(bytes[7]) == 0);
    // h = w = c = 1, little endian
    for (int field = 0; field < 3; ++field) {
        CHECK(static_cast<unsigned char>(bytes[8 + 4 * field]) == 1);
        CHECK(static_cast<unsigned char>(bytes[9 + 4 * field]) == 0);
    }
    // 0.5f little-endian = 00 00 00 3F
    CHECK(static_cast<unsigned char>(bytes[20]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[21]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[22]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[23]) == 0x3F);

    const PredictionMap back = read_map(dir / "one.csmap", reg1());
    CHECK(back.image.h == 1);
    CHECK(back.image.data[0] == 0.5f);
}

TEST_CASE("csmap: 2x2x3 zero map has 20 + 48 bytes") {
    const fs::path dir = temp_dir("size");
    TaskSpec rgb{"rgb", 3, TaskKind::Regression};
    PredictionMap m(rgb, 2, 2);
    write_map(m, dir / "z.csmap");
    CHECK(fs::file_size(dir / "z.csmap") == 20 + 48);
}

TEST_CASE("csmap: write/read round trip is bit exact") {
    const fs::path dir = temp_dir("rt");
    Rng rng(42);
    TaskSpec rgb{"rgb", 3, TaskKind::Regression};
    PredictionMap m(rgb, 7, 5);
    for (auto& v : m.image.data) v = rng.uniform_float();
    write_map(m, dir / "a.csmap");
    const PredictionMap back = read_map(dir / "a.csmap", rgb);
    CHECK(back.image.data == m.image.data);

    write_map(back, dir / "b.csmap");
    CHECK(read_bytes(dir / "a.csmap") == read_bytes(dir / "b.csmap"));
}

TEST_CASE("csmap: malformed files are rejected") {
    const fs::path dir = temp_dir("bad");
    PredictionMap m(reg1(), 2, 2);
    write_map(m, dir / "ok.csmap");
    std::string bytes = read_bytes(dir / "ok.csmap");

    SUBCASE("bad magic") {
        std::string corrupted = bytes;
        corrupted.replace(0, 6, std::string("XXXXX\0", 6));
        std::ofstream(dir / "bad.csmap", std::ios::binary) << corrupted;
        CHECK_THROWS_AS(read_map(dir / "bad.csmap", reg1()), FormatError);
    }
    SUBCASE("bad version") {
        std::string corrupted = bytes;
        corrupted[6] = 9;
        std::ofstream(dir / "bad.csmap", std::ios::binary) << corrupted;
        CHECK_THROWS_AS(read_map(dir / "bad.csmap", reg1()), FormatError);
    }
    SUBCASE("truncated payload") {
        std::ofstream(dir / "bad.csmap", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
        CHECK_THROWS_AS(read_map(dir / "bad.csmap", reg1()), FormatError);
    }
    SUBCASE("trailing bytes") {
        std::ofstream(dir / "bad.csmap", std::ios::binary) << (bytes + "x");
        CHECK_THROWS_AS(read_map(dir / "bad.csmap", reg1()), FormatError);
    }
    SUBCASE("nan payload") {
        std::string corrupted = bytes;
        const uint32_t nan_bits = 0x7fc00000u;
        corrupted.replace(20, 4, reinterpret_cast<const char*>(&nan_bits), 4);
        std::ofstream(dir / "bad.csmap", std::ios::binary) << corrupted;
        CHECK_THROWS_AS(read_map(dir / "bad.csmap", reg1()), InvalidMap);
    }
    SUBCASE("missing parent directory on write") {
        CHECK_THROWS_AS(write_map(m, dir / "nodir" / "x.csmap"), WriteError);
    }
    SUBCASE("out-of-range regression payload rejected on write") {
        PredictionMap bad = m;
        bad.image.at(0, 0, 0) = 1.5f;
        CHECK_THROWS_AS(write_map(bad, dir / "bad2.csmap"), InvalidMap);
    }
}

TEST_CASE("classification maps: simplex validation and load renormalization") {
    const fs::path dir = temp_dir("simplex");
    TaskSpec seg{"seg", 3, TaskKind::Classification};
    PredictionMap m(seg, 2, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            m.image.at(y, x, 0) = 0.2f;
            m.image.at(y, x, 1) = 0.3f;
            m.image.at(y, x, 2) = 0.5f;
        }
    CHECK(check_map(m).empty());

    // Drift within the 1e-5 tolerance: accepted as-is, data untouched.
    write_map(m, dir / "a.csmap");  // write the valid one, then poke the file
    std::string bytes = read_bytes(dir / "a.csmap");
    const float drifted = 0.2f + 5e-6f;
    std::memcpy(bytes.data() + 20, &drifted, 4);
    std::ofstream(dir / "drift.csmap", std::ios::binary) << bytes;
    const PredictionMap loaded = read_map(dir / "drift.csmap", seg);
    CHECK(loaded.image.at(0, 0, 0) == drifted);

    // Outside tolerance: rejected on read and on write.
    const float broken_v = 0.25f;
    std::memcpy(bytes.data() + 20, &broken_v, 4);
    std::ofstream(dir / "broken.csmap", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_map(dir / "broken.csmap", seg), InvalidMap);
    PredictionMap broken = m;
    broken.image.at(0, 0, 0) = 0.9f;
    CHECK_THROWS_AS(write_map(broken, dir / "broken2.csmap"), InvalidMap);
}

TEST_CASE("make_splits: forced sizes and determinism") {
    const DatasetSplit s = make_splits(10, 2, 0.1, 0.1, 0);
    REQUIRE(s.parts.size() == 2);
    CHECK(s.parts[0].size() == 4);
    CHECK(s.parts[1].size() == 4);
    CHECK(s.val.size() == 1);
    CHECK(s.test.size() == 1);

    const DatasetSplit again = make_splits(10, 2, 0.1, 0.1, 0);
    CHECK(s.parts == again.parts);
    CHECK(s.val == again.val);
    CHECK(s.test == again.test);

    const DatasetSplit other = make_splits(10, 2, 0.1, 0.1, 1);
    CHECK((other.parts != s.parts || other.val != s.val || other.test != s.test));
}

TEST_CASE("make_splits: exhaustive membership, disjointness, near-equal parts") {
    const DatasetSplit s = make_splits(100, 2, 0.1, 0.1, 7);
    std::set<SampleId> seen;
    size_t total = 0;
    auto absorb = [&](const std::vector<SampleId>& ids) {
        for (SampleId id : ids) {
            CHECK(id >= 0);
            CHECK(id < 100);
            CHECK(!seen.count(id));
            seen.insert(id);
        }
        total += ids.size();
    };
    for (const auto& part : s.parts) absorb(part);
    absorb(s.val);
    absorb(s.test);
    CHECK(total == 100);
    CHECK(seen.size() == 100);

    // Parts within one of each other for a non-divisible pool.
    const DatasetSplit odd = make_splits(102, 4, 0.1, 0.1, 3);
    size_t mn = 1e9, mx = 0;
    for (const auto& part : odd.parts) {
        mn = std::min(mn, part.size());
        mx = std::max(mx, part.size());
    }
    CHECK(mx - mn <= 1);
}

TEST_CASE("make_splits: infeasible configurations raise ConfigError") {
    CHECK_THROWS_AS(make_splits(3, 2, 0.1, 0.1, 0), ConfigError);
    CHECK_THROWS_AS(make_splits(100, 2, 0.0, 0.1, 0), ConfigError);
    CHECK_THROWS_AS(make_splits(100, 2, 0.6, 0.5, 0), ConfigError);
    CHECK_THROWS_AS(make_splits(10, 9, 0.1, 0.1, 0), ConfigError);
}

TEST_CASE("dataset: generate, verify, reload") {
    const fs::path dir = temp_dir("ds");
    DatasetConfig cfg;
    cfg.scene.h = 16;
    cfg.scene.w = 16;
    cfg.scene.seed = 5;
    cfg.n_samples = 8;
    cfg.n_iters = 2;
    cfg.val_frac = 0.13;
    cfg.test_frac = 0.13;
    cfg.roster = {"rgb", "grayscale", "depth", "seg"};

    Dataset ds(cfg, dir / "data");
    ds.generate(2);
    ds.verify_on_disk();

    for (SampleId id : ds.split().all()) {
        for (const auto& t : ds.tasks()) {
            const PredictionMap m = ds.load(id, t.name);
            CHECK(m.image.h == 16);
            CHECK(check_map(m).empty());
        }
    }

    // Regenerating produces byte-identical files.
    Dataset ds2(cfg, dir / "data2");
    ds2.generate(1);
    for (SampleId id : ds.split().all())
        for (const auto& t : ds.tasks())
            CHECK(read_bytes(ds.map_path(id, t.name)) == read_bytes(ds2.map_path(id, t.name)));
}
