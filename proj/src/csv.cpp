#include "rdp/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rdp/types.hpp"

namespace rdp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), "io_error", "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    require(static_cast<bool>(out), "io_error", "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "missing_file", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      t.header = split(line);
      first = false;
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column) {
  const CsvTable t = read_csv(path);
  std::vector<double> out;
  double v = 0.0;
  if (column.empty()) {
    // Headerless single column, or a one-column file with a header.
    if (t.header.size() == 1 && parse_number(t.header[0], v)) out.push_back(v);
    for (const auto& row : t.rows) {
      require(row.size() == 1 && parse_number(row[0], v), "invalid_csv", path.string() + ": expected one number per row");
      out.push_back(v);
    }
    return out;
  }
  std::size_t idx = t.header.size();
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == column) idx = i;
  require(idx < t.header.size(), "invalid_csv", path.string() + ": no column '" + column + "'");
  for (const auto& row : t.rows) {
    require(idx < row.size() && parse_number(row[idx], v), "invalid_csv", path.string() + ": bad value in column " + column);
    out.push_back(v);
  }
  return out;
}

}  // namespace rdp
