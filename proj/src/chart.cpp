#include "setmem/chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "setmem/csv.hpp"
#include "setmem/errors.hpp"

namespace setmem {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void widen() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo <= 0.0) {
            const double pad = lo == 0.0 ? 1.0 : 0.5 * std::fabs(lo);
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

std::size_t Table::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("chart: unknown column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

Chart render_chart(const Table& table, const ChartSpec& spec) {
    if (table.rows.empty()) throw ConfigError("chart: empty table");
    if (spec.y_columns.empty()) throw ConfigError("chart: no y columns");
    const std::size_t xi = table.column_index(spec.x_column);
    std::vector<std::size_t> yi;
    for (const auto& c : spec.y_columns) yi.push_back(table.column_index(c));

    Chart chart;
    bool clamped = false;
    auto y_value = [&](double v) {
        if (!spec.log_y) return v;
        if (!(v > kLogFloor)) {
            clamped = true;
            v = kLogFloor;
        }
        return std::log10(v);
    };

    Range xr, yr;
    for (const auto& row : table.rows) {
        if (!std::isfinite(row.at(xi))) continue;
        for (std::size_t c : yi) {
            if (std::isnan(row.at(c))) continue;
            xr.add(row[xi]);
            yr.add(y_value(row[c]));
        }
    }
    if (clamped) {
        chart.warnings.push_back("chart '" + spec.title + "': non-positive values clamped to " + fmt(kLogFloor) +
                                 " on the log axis");
    }
    xr.widen();
    yr.widen();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
        << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Ticks: five evenly spaced on each axis; decades on a log axis.
    for (int k = 0; k <= 4; ++k) {
        const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << fmt(xv)
            << "</text>\n";
        const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        const std::string label = spec.log_y ? "1e" + fmt(yv) : fmt(yv);
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << label
            << "</text>\n";
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(yv) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << py(yv)
            << "\" stroke=\"#dddddd\"/>\n";
    }
    const std::string xlabel = spec.x_label.empty() ? spec.x_column : spec.x_label;
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
        << escape(xlabel) << "</text>\n";
    if (!spec.y_label.empty()) {
        svg << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << kTop + ph / 2 << ")\">" << escape(spec.y_label) << "</text>\n";
    }

    for (std::size_t s = 0; s < yi.size(); ++s) {
        const char* colour = kPalette[s % kPalette.size()];
        svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& row : table.rows) {
            const double xv = row[xi];
            const double yv = row[yi[s]];
            if (!std::isfinite(xv) || std::isnan(yv)) continue;
            if (!first) svg << ' ';
            svg << fmt(px(xv)) << ',' << fmt(py(y_value(yv)));
            first = false;
        }
        svg << "\"/>\n";
        const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
        svg << "<g class=\"legend-entry\"><line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\""
            << kLeft + pw + 32 << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/><text x=\""
            << kLeft + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(spec.y_columns[s]) << "</text></g>\n";
    }
    svg << "</svg>\n";
    chart.svg = svg.str();
    return chart;
}

std::vector<std::string> emit_chart(const Table& table, const ChartSpec& spec, const std::filesystem::path& path) {
    Chart chart = render_chart(table, spec);
    csv::write_file(path, chart.svg);
    for (const auto& w : chart.warnings) std::cerr << "warning: " << w << '\n';
    return chart.warnings;
}

}  // namespace setmem
