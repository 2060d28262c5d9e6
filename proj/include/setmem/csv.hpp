#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace setmem::csv {

// Shortest text that parses back to the same double.
std::string format_double(double v);

std::vector<std::string> split_line(std::string_view line);

std::string join(const std::vector<std::string>& fields);

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace setmem::csv
