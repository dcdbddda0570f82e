#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rdp {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Minimal reader for the comma-separated files this tool writes (no quoting).
CsvTable read_csv(const std::filesystem::path& path);

/// Reads a numeric column (by name) or, with an empty name, a single-column
/// or headerless numeric file.
std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column = "");

}  // namespace rdp
