#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cshift/common.hpp"

namespace cshift::eval {

// Self-contained SVG line plots. Text output keeps the plots byte-stable,
// which makes them regression-testable; no external assets or fonts beyond
// generic families.

struct Series {
    std::string name;
    std::vector<double> x, y;
};

inline std::string render_line_plot(const std::string& title, const std::string& x_label,
                                    const std::string& y_label, const std::vector<Series>& series) {
    const int W = 640, H = 400, ml = 60, mr = 20, mt = 40, mb = 45;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double xr = xmax - xmin, yr = ymax - ymin;
    auto px = [&](double v) { return format_fixed(ml + (v - xmin) / xr * (W - ml - mr), 2); };
    auto py = [&](double v) { return format_fixed(H - mb - (v - ymin) / yr * (H - mt - mb), 2); };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" << title << "</text>\n";
    // Axes.
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n";
    out << "<text x=\"15\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 "
           "15 " << (mt + H - mb) / 2 << ")\">" << y_label << "</text>\n";
    // Range labels.
    out << "<text x=\"" << ml << "\" y=\"" << H - mb + 15
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << format_fixed(xmin, 3) << "</text>\n";
    out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 15
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_fixed(xmax, 3)
        << "</text>\n";
    out << "<text x=\"" << ml - 5 << "\" y=\"" << H - mb
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_fixed(ymin, 3)
        << "</text>\n";
    out << "<text x=\"" << ml - 5 << "\" y=\"" << mt + 10
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_fixed(ymax, 3)
        << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (i) out << ' ';
            out << px(s.x[i]) << ',' << py(s.y[i]);
        }
        out << "\"/>\n";
        for (size_t i = 0; i < s.x.size(); ++i)
            out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\""
                << color << "\"/>\n";
        out << "<text x=\"" << W - mr - 5 << "\" y=\"" << mt + 15 + 14 * si
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
            << "\">" << s.name << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void save_line_plot(const std::filesystem::path& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WriteError("cannot open for writing: " + path.string());
    const std::string s = render_line_plot(title, x_label, y_label, series);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw WriteError("short write: " + path.string());
}

}  // namespace cshift::eval
