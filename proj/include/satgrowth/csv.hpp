#pragma once

// CSV ingestion and tabular output.  Data files carry a header row plus one
// row per observation; lines starting with '#' are comments.  Errors name
// the physical line of the offending cell.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "satgrowth/errors.hpp"
#include "satgrowth/timeseries.hpp"

namespace satgrowth {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

inline bool parse_double(std::string_view field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !field.empty();
}

// 17 significant digits: enough to reparse the exact same double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

struct CsvOptions {
  std::string t_column = "t";
  std::string value_column = "value";
  // Calendar year treated as t = 0; defaults to the first row's time.
  std::optional<double> t_origin;
  SeriesLabel label = SeriesLabel::Other;
  std::string units;
};

// FNV-1a 64-bit digest of a file's bytes, as a fixed-width hex string.
inline std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return std::string("fnv1a64:") + buf;
}

inline TimeSeries load_csv(const std::filesystem::path& path,
                           const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<double> t_raw;
  std::vector<double> values;
  std::vector<std::size_t> non_positive_rows;

  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  std::size_t t_index = 0, v_index = 0, column_count = 0;

  while (std::getline(in, line)) {
    ++line_number;
    std::string_view sv = line;
    if (line_number == 1 && sv.size() >= 3 && sv.substr(0, 3) == "\xEF\xBB\xBF") {
      sv.remove_prefix(3);  // UTF-8 byte order mark
    }
    sv = detail::trim(sv);
    if (sv.empty() || sv.front() == '#') continue;

    const std::vector<std::string_view> fields = detail::split_fields(sv);
    if (!have_header) {
      bool found_t = false, found_v = false;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == options.t_column) {
          t_index = i;
          found_t = true;
        } else if (fields[i] == options.value_column) {
          v_index = i;
          found_v = true;
        }
      }
      if (!found_t || !found_v) {
        throw DomainError(path.string() + ": header (line " + std::to_string(line_number) +
                          ") must contain columns '" + options.t_column + "' and '" +
                          options.value_column + "'");
      }
      column_count = fields.size();
      have_header = true;
      continue;
    }

    if (fields.size() != column_count) {
      throw DomainError(path.string() + ": line " + std::to_string(line_number) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(column_count));
    }
    double t_val = 0.0, v_val = 0.0;
    if (!detail::parse_double(fields[t_index], t_val)) {
      throw DomainError(path.string() + ": line " + std::to_string(line_number) +
                        ": cannot parse '" + std::string(fields[t_index]) +
                        "' as a number in column '" + options.t_column + "'");
    }
    if (!detail::parse_double(fields[v_index], v_val)) {
      throw DomainError(path.string() + ": line " + std::to_string(line_number) +
                        ": cannot parse '" + std::string(fields[v_index]) +
                        "' as a number in column '" + options.value_column + "'");
    }
    if (!t_raw.empty() && t_val <= t_raw.back()) {
      throw DomainError(path.string() + ": line " + std::to_string(line_number) +
                        ": time " + detail::format_double(t_val) +
                        " does not increase over the previous row");
    }
    if (options.label != SeriesLabel::NetEarnings && v_val <= 0.0) {
      non_positive_rows.push_back(line_number);
    }
    t_raw.push_back(t_val);
    values.push_back(v_val);
  }

  if (!have_header) throw DomainError(path.string() + ": no header row found");
  if (t_raw.empty()) throw DomainError(path.string() + ": no data rows found");
  if (!non_positive_rows.empty()) {
    std::string rows;
    for (std::size_t i = 0; i < non_positive_rows.size() && i < 8; ++i) {
      if (!rows.empty()) rows += ", ";
      rows += std::to_string(non_positive_rows[i]);
    }
    if (non_positive_rows.size() > 8) {
      rows += ", +" + std::to_string(non_positive_rows.size() - 8) + " more";
    }
    throw DomainError(path.string() + ": non-positive values at lines " + rows +
                      " (only net-earnings series may cross zero)");
  }

  TimeSeries series;
  const double origin = options.t_origin.value_or(t_raw.front());
  series.t.resize(t_raw.size());
  for (std::size_t i = 0; i < t_raw.size(); ++i) series.t[i] = t_raw[i] - origin;
  series.values = std::move(values);
  series.label = options.label;
  series.t_origin = origin;
  series.units = options.units;
  series.validate();
  return series;
}

// Writes a series as CSV with absolute times (t_origin + t).  comments are
// emitted first, one '#' line each.
inline void save_csv(const std::filesystem::path& path, const TimeSeries& series,
                     std::span<const std::string> comments = {}) {
  series.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << "t,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << detail::format_double(series.t_origin + series.t[i]) << ","
        << detail::format_double(series.values[i]) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// Tab-separated table for plotting; empty cells for missing observations.
inline void write_plot_tsv(const std::filesystem::path& path,
                           std::span<const std::string> columns,
                           std::span<const std::vector<std::optional<double>>> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i == 0 ? "" : "\t") << columns[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw DomainError("write_plot_tsv: row width does not match the header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << "\t";
      if (row[i]) out << detail::format_double(*row[i]);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace satgrowth
