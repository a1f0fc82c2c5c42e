#pragma once

#include <algorithm>
#include <vector>

#include "cshift/common.hpp"

namespace cshift::consensus {

// Weighted median: the smallest value whose cumulative normalized weight
// reaches one half. The output is always a member of the input values.
// Pairs are ordered by (value, weight) so that permuting the inputs cannot
// change the accumulation order, hence ties resolve by value, never by
// source position.
inline float weighted_median(const float* values, const float* weights, int n) {
    if (n < 1) throw ConfigError("weighted_median: empty input");
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (weights[i] < 0.0f) throw ConfigError("weighted_median: negative weight");
        total += weights[i];
    }
    if (total <= 0.0) throw ConfigError("weighted_median: zero weight mass");

    // Candidate counts are small (|tasks|+1); insertion sort on the stack.
    constexpr int kStackMax = 32;
    std::pair<float, float> stack_buf[kStackMax];
    std::vector<std::pair<float, float>> heap_buf;
    std::pair<float, float>* buf = stack_buf;
    if (n > kStackMax) {
        heap_buf.resize(n);
        buf = heap_buf.data();
    }
    for (int i = 0; i < n; ++i) buf[i] = {values[i], weights[i]};
    std::sort(buf, buf + n);

    const double half = 0.5 * total;
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
        cum += buf[i].second;
        if (cum >= half) return buf[i].first;
    }
    return buf[n - 1].first;  // rounding slack
}

inline float weighted_median(const std::vector<float>& values, const std::vector<float>& weights) {
    if (values.size() != weights.size()) throw ConfigError("weighted_median: length mismatch");
    return weighted_median(values.data(), weights.data(), static_cast<int>(values.size()));
}

}  // namespace cshift::consensus
