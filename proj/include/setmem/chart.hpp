#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace setmem {

// Column-named numeric table; NaN marks a missing value.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    // Throws ConfigError for an unknown column.
    std::size_t column_index(const std::string& name) const;
};

struct ChartSpec {
    std::string title;
    std::string x_column;
    std::vector<std::string> y_columns;
    bool log_y = false;
    std::string x_label{};
    std::string y_label{};
};

// Values at or below this are drawn at this level on a log-10 axis.
inline constexpr double kLogFloor = 1e-12;

struct Chart {
    std::string svg;
    std::vector<std::string> warnings;
};

// Standalone SVG line chart: one <polyline> per y column plus a legend.
// Throws ConfigError on an empty table or an unknown column.
Chart render_chart(const Table& table, const ChartSpec& spec);

// Renders, writes the file and echoes warnings to stderr.
std::vector<std::string> emit_chart(const Table& table, const ChartSpec& spec, const std::filesystem::path& path);

}  // namespace setmem
