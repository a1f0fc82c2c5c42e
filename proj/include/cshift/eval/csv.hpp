#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cshift/common.hpp"

namespace cshift::eval {

// Minimal deterministic CSV writer: fixed column order, '\n' line ends,
// numeric cells pre-formatted with format_fixed.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw ShapeError("csv row width mismatch");
        rows_.push_back(std::move(cells));
    }

    std::string str() const {
        std::ostringstream out;
        out << join(header_) << '\n';
        for (const auto& r : rows_) out << join(r) << '\n';
        return out.str();
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw WriteError("cannot open for writing: " + path.string());
        const std::string s = str();
        f.write(s.data(), static_cast<std::streamsize>(s.size()));
        if (!f) throw WriteError("short write: " + path.string());
    }

    size_t row_count() const { return rows_.size(); }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string out;
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        return out;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Tiny reader for our own files (headers + unquoted cells).
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace cshift::eval
