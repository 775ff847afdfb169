#pragma once

// Reports: a CSV table (plot-ready) plus one text report per run. The only
// non-deterministic content is the first line of the text report.

#include "banach/app/config.hpp"
#include "banach/error.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace banach::app {

inline std::uint64_t fnv1a(const std::string& bytes)
{
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a(c.document.dump())); }

inline std::string format_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable
{
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  // Cells are either numbers (17 significant digits) or plain strings.
  struct Cell
  {
    Cell(double v) : text(format_number(v)) {}  // NOLINT
    Cell(int v) : text(std::to_string(v)) {}  // NOLINT
    Cell(long v) : text(std::to_string(v)) {}  // NOLINT
    Cell(std::size_t v) : text(std::to_string(v)) {}  // NOLINT
    Cell(std::string s) : text(quote(std::move(s))) {}  // NOLINT
    Cell(const char* s) : text(quote(s)) {}  // NOLINT
    std::string text;
  };

  void add_row(std::vector<Cell> cells)
  {
    if (cells.size() != header_.size()) throw InvalidArgument("CSV row width does not match the header");
    std::vector<std::string> row;
    for (auto& c : cells) row.push_back(std::move(c.text));
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  std::string str() const
  {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

private:
  static std::string quote(std::string s)
  {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Report
{
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> values;  // label, formatted value
  std::vector<std::string> lines;                             // free-form detail
  CsvTable table{{"label", "value"}};
  std::string csv_name;  // file stem for the table
  double wall_seconds = 0.0;
  std::string timings;  // appended to the header line only
  bool passed = true;

  void value(const std::string& label, double v) { values.emplace_back(label, format_number(v)); }
  void value(const std::string& label, const std::string& v) { values.emplace_back(label, v); }

  std::string text_body() const
  {
    std::ostringstream out;
    out << "command: " << command << "\n";
    out << "config_hash: " << config_hash << "\n";
    out << "seed: " << seed << "\n";
    for (const auto& [k, v] : values) out << k << ": " << v << "\n";
    for (const auto& l : lines) out << l << "\n";
    out << "status: " << (passed ? "pass" : "fail") << "\n";
    return out.str();
  }

  std::string header_line() const
  {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", wall_seconds);
    return "# banach " + command + " generated " + stamp + "; wall " + wall + " s" +
           (timings.empty() ? "" : "; " + timings);
  }
};

// Writes <out>/<stem>.csv and <out>/<stem>_report.txt; returns the paths.
inline std::pair<std::string, std::string> write_report(const Report& r, const std::string& out_dir)
{
  std::filesystem::create_directories(out_dir);
  const std::string stem = r.csv_name.empty() ? r.command : r.csv_name;
  const auto csv_path = (std::filesystem::path(out_dir) / (stem + ".csv")).string();
  const auto txt_path = (std::filesystem::path(out_dir) / (stem + "_report.txt")).string();
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + csv_path + "'");
    f << r.table.str();
  }
  {
    std::ofstream f(txt_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + txt_path + "'");
    f << r.header_line() << "\n" << r.text_body();
  }
  return {csv_path, txt_path};
}

}  // namespace banach::app
