// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "noisereg/statistics.hpp"

namespace noisereg {

using json = nlohmann::ordered_json;

/// A CSV file held in memory: header plus rows of doubles.
struct Table {
  std::string name;  // file name, e.g. "paths.csv"
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for the rest.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return {buf, res.ptr};
}

inline std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += t.header[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw std::logic_error(t.name + ": row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Stable rendering: insertion-ordered keys, two-space indent, trailing LF.
/// Non-finite doubles are stored as strings so they survive the round trip.
inline json sanitize(const json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return format_double(v);
    return j;
  }
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = sanitize(*it);
    return out;
  }
  return j;
}

inline std::string render_json(const json& j) { return sanitize(j).dump(2) + "\n"; }

inline void write_csv(const std::filesystem::path& dir, const Table& t) { write_text(dir / t.name, render_csv(t)); }
inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, render_json(j)); }

//---------------------------------------------------------------------------//
// Summary fields. Every reported number travels with its tolerance or interval.
//---------------------------------------------------------------------------//
inline json measured(double value, double tolerance) {
  return json{{"value", value}, {"tolerance", tolerance}};
}

/// Exact quantities (counts, flags turned numeric) carry tolerance 0.
inline json exact(double value) { return measured(value, 0.0); }

inline json exact_count(std::size_t n) { return json{{"value", n}, {"tolerance", 0}}; }

inline json interval_json(const Interval& ci, double confidence = 0.95) {
  return json{{"estimate", ci.estimate}, {"ci_lo", ci.lo}, {"ci_hi", ci.hi}, {"confidence", confidence}};
}

}  // namespace noisereg
