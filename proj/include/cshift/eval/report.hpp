#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cshift/eval/csv.hpp"
#include "cshift/eval/svg.hpp"

namespace cshift::eval {

// metrics.csv schema: iteration, task, method, l1_x100.
// Methods: expert, direct_edge, avg_direct_edges, mean_ensemble, cshift.
struct MetricRow {
    int iteration = 0;
    std::string task;
    std::string method;
    double l1_x100 = 0.0;
};

inline CsvWriter metrics_csv(const std::vector<MetricRow>& rows) {
    CsvWriter csv({"iteration", "task", "method", "l1_x100"});
    for (const auto& r : rows)
        csv.add_row({std::to_string(r.iteration), r.task, r.method, format_fixed(r.l1_x100, 6)});
    return csv;
}

inline std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
    const auto cells = read_csv(path);
    std::vector<MetricRow> rows;
    for (size_t i = 1; i < cells.size(); ++i) {
        if (cells[i].size() != 4) throw FormatError("bad metrics row in " + path.string());
        rows.push_back({std::stoi(cells[i][0]), cells[i][1], cells[i][2], std::stod(cells[i][3])});
    }
    return rows;
}

// Per-edge relative L1 change between two iterations, in percent
// (positive = second iteration improved). Sorted descending.
struct EdgeImprovement {
    std::string src, dst;
    double l1_iter1 = 0.0, l1_iter2 = 0.0;
    double improvement_pct = 0.0;
};

inline std::vector<EdgeImprovement> edge_improvement_report(
    const std::map<std::pair<std::string, std::string>, double>& iter1,
    const std::map<std::pair<std::string, std::string>, double>& iter2) {
    std::vector<EdgeImprovement> out;
    for (const auto& [edge, l1_a] : iter1) {
        const auto it = iter2.find(edge);
        if (it == iter2.end())
            throw ConfigError("edge " + edge.first + "->" + edge.second + " missing from second run");
        EdgeImprovement e;
        e.src = edge.first;
        e.dst = edge.second;
        e.l1_iter1 = l1_a;
        e.l1_iter2 = it->second;
        e.improvement_pct = l1_a != 0.0 ? 100.0 * (l1_a - it->second) / l1_a : 0.0;
        out.push_back(e);
    }
    for (const auto& [edge, unused] : iter2) {
        (void)unused;
        if (!iter1.count(edge))
            throw ConfigError("edge " + edge.first + "->" + edge.second + " missing from first run");
    }
    std::sort(out.begin(), out.end(), [](const EdgeImprovement& a, const EdgeImprovement& b) {
        if (a.improvement_pct != b.improvement_pct) return a.improvement_pct > b.improvement_pct;
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    return out;
}

inline CsvWriter edge_improvement_csv(const std::vector<EdgeImprovement>& rows) {
    CsvWriter csv({"src", "dst", "l1_x100_iter1", "l1_x100_iter2", "improvement_pct"});
    for (const auto& r : rows)
        csv.add_row({r.src, r.dst, format_fixed(r.l1_iter1, 6), format_fixed(r.l1_iter2, 6),
                     format_fixed(r.improvement_pct, 6)});
    return csv;
}

// Consensus diagnostics: mean inter-candidate variance recorded at epoch
// checkpoints while edges train.
struct VariancePoint {
    int iteration = 0;
    int epoch = 0;
    double variance = 0.0;
};

inline CsvWriter variance_csv(const std::vector<VariancePoint>& points) {
    CsvWriter csv({"iteration", "epoch", "variance"});
    for (const auto& p : points)
        csv.add_row({std::to_string(p.iteration), std::to_string(p.epoch), format_fixed(p.variance, 9)});
    return csv;
}

inline std::vector<VariancePoint> read_variance_csv(const std::filesystem::path& path) {
    const auto cells = read_csv(path);
    std::vector<VariancePoint> points;
    for (size_t i = 1; i < cells.size(); ++i) {
        if (cells[i].size() != 3) throw FormatError("bad variance row in " + path.string());
        points.push_back({std::stoi(cells[i][0]), std::stoi(cells[i][1]), std::stod(cells[i][2])});
    }
    return points;
}

}  // namespace cshift::eval
