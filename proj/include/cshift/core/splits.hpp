#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "cshift/common.hpp"
#include "cshift/rng.hpp"

namespace cshift {

using SampleId = int;

// Disjoint partition of sample ids: n_iters training parts (one consumed per
// learning iteration), plus validation and test sets. The training pool P is
// the union of the parts.
struct DatasetSplit {
    std::vector<std::vector<SampleId>> parts;
    std::vector<SampleId> val;
    std::vector<SampleId> test;

    std::vector<SampleId> pool() const {
        std::vector<SampleId> p;
        for (const auto& part : parts) p.insert(p.end(), part.begin(), part.end());
        std::sort(p.begin(), p.end());
        return p;
    }

    std::vector<SampleId> all() const {
        std::vector<SampleId> a = pool();
        a.insert(a.end(), val.begin(), val.end());
        a.insert(a.end(), test.begin(), test.end());
        std::sort(a.begin(), a.end());
        return a;
    }
};

// Deterministic split: val/test sizes are floor(frac*n) but at least 1; the
// remaining pool is divided into n_iters parts whose sizes differ by <= 1.
inline DatasetSplit make_splits(int n_samples, int n_iters, double val_frac, double test_frac, uint64_t seed) {
    if (n_iters < 1) throw ConfigError("n_iters must be >= 1");
    if (!(val_frac > 0.0 && val_frac < 1.0 && test_frac > 0.0 && test_frac < 1.0 &&
          val_frac + test_frac < 1.0))
        throw ConfigError("val/test fractions must lie in (0,1) and sum below 1");
    if (n_samples < n_iters + 2) throw ConfigError("need at least n_iters + 2 samples");

    const int n_val = std::max(1, static_cast<int>(val_frac * n_samples));
    const int n_test = std::max(1, static_cast<int>(test_frac * n_samples));
    const int n_train = n_samples - n_val - n_test;
    if (n_train < n_iters) throw ConfigError("split leaves fewer training samples than parts");

    std::vector<SampleId> ids(n_samples);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(hash_seed({seed, 0x5b115u}));
    rng.shuffle(ids);

    DatasetSplit split;
    auto take = [&](int count, int& cursor) {
        std::vector<SampleId> out(ids.begin() + cursor, ids.begin() + cursor + count);
        cursor += count;
        std::sort(out.begin(), out.end());
        return out;
    };
    int cursor = 0;
    split.test = take(n_test, cursor);
    split.val = take(n_val, cursor);
    const int base = n_train / n_iters;
    const int extra = n_train % n_iters;
    for (int k = 0; k < n_iters; ++k) split.parts.push_back(take(base + (k < extra ? 1 : 0), cursor));
    return split;
}

}  // namespace cshift
