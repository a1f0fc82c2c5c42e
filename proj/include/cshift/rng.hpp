#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace cshift {

// Deterministic RNG stack. Everything that draws randomness in the pipeline
// goes through these primitives instead of <random> distributions, whose
// output is implementation-defined. Results are reproducible bit-for-bit
// for a given seed across platforms and worker counts.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// FNV-1a over bytes; handy for folding names into seeds.
inline uint64_t fnv1a(const char* s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (; *s; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Mixes an arbitrary list of integers into one stream seed. Used to derive
// independent substreams, e.g. hash_seed(run_seed, sample_id, tag).
inline uint64_t hash_seed(std::initializer_list<uint64_t> parts) {
    uint64_t s = 0x243f6a8885a308d3ull;
    for (uint64_t p : parts) {
        s ^= p + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
        (void)splitmix64(s);
    }
    return splitmix64(s);
}

// xoshiro256++ (Blackman & Vigna), seeded via splitmix64.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 24 bits of mantissa (exact in float).
    float uniform_float() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

    // Uniform in [0,1) with 53 bits.
    double uniform_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    float uniform_range(float lo, float hi) { return lo + (hi - lo) * uniform_float(); }

    // Unbiased integer in [0, n) by rejection.
    uint64_t uniform_index(uint64_t n) {
        const uint64_t limit = ~uint64_t(0) - ~uint64_t(0) % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via polar Box-Muller (caches the second draw).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform_double() - 1.0;
            v = 2.0 * uniform_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    float normal_float() { return static_cast<float>(normal()); }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cshift
