//
// Copyright 2026 The dpsketch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

// Dataset ingestion and the sketch release file.
//
// Release file layout (all integers and floats little-endian):
//
//   offset  size   field
//   0       4      magic "DPSK"
//   4       2      version (u16), currently 1
//   6       4      JSON header length L (u32)
//   10      L      JSON header, UTF-8
//   10+L    8*r*(d+1)  sketch entries, f64, row-major
//   ...     8*r    weights, f64 (present iff header "has_weights" is true)
//
// The header carries method, shape, privacy parameters and method metadata.
// It never carries the seed or the sketching plan.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"

namespace dpsketch {

// ---------------------------------------------------------------- CSV input

enum class ClipMode { reject, scale };

struct DatasetOptions {
  char delimiter = ',';
  bool has_header = true;
  // Column name (needs a header) or zero-based index; defaults to the last.
  std::variant<std::monostate, std::string, std::size_t> response_column;
  ClipMode clip = ClipMode::scale;
};

struct IngestResult {
  DataMatrix data;
  std::size_t clipped_rows = 0;
  std::vector<std::string> feature_names;
  std::string response_name;
};

// Splits RFC 4180 records: quoted fields, doubled quotes, CRLF or LF line
// ends, delimiters and newlines inside quotes.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool any = false;
  char ch = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(ch)) {
    any = true;
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\n') {
      end_record();
      any = false;
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      end_record();
      any = false;
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("csv: unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string_view text = trim(cell);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("csv: row " + std::to_string(row) + " column " + std::to_string(col) +
                     ": cannot parse '" + cell + "' as a finite number");
  }
  return value;
}

}  // namespace detail

// Builds A = [X, y] (response moved to the last column) and certifies every
// row against `bound`. ClipMode::scale rescales offending rows to norm B;
// ClipMode::reject fails on the first one.
inline IngestResult ingest(std::istream& in, RowBound bound, const DatasetOptions& opt = {}) {
  auto records = parse_csv(in, opt.delimiter);
  std::vector<std::string> header;
  if (opt.has_header) {
    if (records.empty()) throw ParseError("csv: missing header row");
    header = std::move(records.front());
    records.erase(records.begin());
  }
  if (records.empty()) throw ParseError("csv: no data rows");
  const std::size_t width = records.front().size();
  if (width < 2) throw ParseError("csv: need at least one feature and a response column");
  if (opt.has_header && header.size() != width) {
    throw ParseError("csv: header has " + std::to_string(header.size()) + " fields, data has " +
                     std::to_string(width));
  }

  std::size_t response = width - 1;
  if (const auto* name = std::get_if<std::string>(&opt.response_column)) {
    if (!opt.has_header) throw UsageError("csv: response column by name needs a header");
    bool found = false;
    for (std::size_t j = 0; j < width; ++j) {
      if (detail::trim(header[j]) == *name) {
        response = j;
        found = true;
        break;
      }
    }
    if (!found) throw ParseError("csv: no column named '" + *name + "'");
  } else if (const auto* index = std::get_if<std::size_t>(&opt.response_column)) {
    if (*index >= width) throw ParseError("csv: response column index out of range");
    response = *index;
  }

  const std::size_t n = records.size();
  const std::size_t d = width - 1;
  if (n < d + 2) {
    throw ParseError("csv: need at least d + 2 = " + std::to_string(d + 2) + " rows, got " +
                     std::to_string(n));
  }
  Matrix a(static_cast<Index>(n), static_cast<Index>(width));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i];
    const std::size_t line = i + 1 + (opt.has_header ? 1 : 0);
    if (rec.size() != width) {
      throw ParseError("csv: row " + std::to_string(line) + " has " + std::to_string(rec.size()) +
                       " fields, expected " + std::to_string(width));
    }
    Index out_col = 0;
    for (std::size_t j = 0; j < width; ++j) {
      const double v = detail::parse_cell(rec[j], line, j + 1);
      if (j == response) {
        a(static_cast<Index>(i), static_cast<Index>(d)) = v;
      } else {
        a(static_cast<Index>(i), out_col++) = v;
      }
    }
  }

  std::size_t clipped = 0;
  if (opt.clip == ClipMode::scale) clipped = clip_rows(a, bound);

  std::vector<std::string> names;
  std::string response_name;
  if (opt.has_header) {
    for (std::size_t j = 0; j < width; ++j) {
      if (j == response) {
        response_name = std::string(detail::trim(header[j]));
      } else {
        names.emplace_back(detail::trim(header[j]));
      }
    }
  }
  return IngestResult{DataMatrix::certify(std::move(a), bound), clipped, std::move(names),
                      std::move(response_name)};
}

inline IngestResult ingest_file(const std::string& path, RowBound bound,
                                const DatasetOptions& opt = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return ingest(in, bound, opt);
}

// ------------------------------------------------------------- sketch file

enum class SketchMethod { jl, countsketch_l2, l1_multilevel, l1_illustration };

inline const char* to_string(SketchMethod m) {
  switch (m) {
    case SketchMethod::jl: return "jl";
    case SketchMethod::countsketch_l2: return "countsketch-l2";
    case SketchMethod::l1_multilevel: return "l1-multilevel";
    case SketchMethod::l1_illustration: return "l1-illustration";
  }
  return "?";
}

inline SketchMethod sketch_method_from(std::string_view name) {
  if (name == "jl") return SketchMethod::jl;
  if (name == "countsketch-l2") return SketchMethod::countsketch_l2;
  if (name == "l1-multilevel") return SketchMethod::l1_multilevel;
  if (name == "l1-illustration") return SketchMethod::l1_illustration;
  throw FormatError("unknown sketch method '" + std::string(name) + "'");
}

inline constexpr char kSketchMagic[4] = {'D', 'P', 'S', 'K'};
inline constexpr std::uint16_t kSketchVersion = 1;

struct SketchFile {
  SketchMethod method = SketchMethod::jl;
  double epsilon = 0.0;
  double delta = 0.0;
  double bound = 0.0;
  // Method-specific fields (branch, c, sigma, levels, ...).
  nlohmann::json metadata = nlohmann::json::object();
  Matrix sketch;
  std::optional<Vector> weights;

  Index rows() const { return sketch.rows(); }
  Index features() const { return sketch.cols() - 1; }
};

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  out.write(bytes, sizeof(U));
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw FormatError("sketch file truncated");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline void write_sketch(std::ostream& out, const SketchFile& file) {
  require_finite(file.sketch, "write_sketch");
  if (file.sketch.cols() < 2) throw DimensionError("write_sketch: sketch needs d + 1 >= 2 columns");
  if (file.weights && file.weights->size() != file.sketch.rows()) {
    throw DimensionError("write_sketch: weight vector length differs from row count");
  }
  nlohmann::json header = {
      {"format", "DPSK"},
      {"method", to_string(file.method)},
      {"r", file.sketch.rows()},
      {"d", file.sketch.cols() - 1},
      {"epsilon", file.epsilon},
      {"delta", file.delta},
      {"B", file.bound},
      {"has_weights", file.weights.has_value()},
      {"meta", file.metadata},
  };
  const std::string text = header.dump();
  out.write(kSketchMagic, 4);
  detail::put_le<std::uint16_t>(out, kSketchVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Index i = 0; i < file.sketch.rows(); ++i) {
    for (Index j = 0; j < file.sketch.cols(); ++j) detail::put_le<double>(out, file.sketch(i, j));
  }
  if (file.weights) {
    for (Index i = 0; i < file.weights->size(); ++i) detail::put_le<double>(out, (*file.weights)(i));
  }
  if (!out) throw IoError("write_sketch: stream write failed");
}

inline SketchFile read_sketch(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kSketchMagic, 4) != 0) {
    throw FormatError("not a DPSK sketch file");
  }
  const auto version = detail::get_le<std::uint16_t>(in);
  if (version != kSketchVersion) {
    throw FormatError("unsupported sketch file version " + std::to_string(version));
  }
  const auto length = detail::get_le<std::uint32_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), length)) throw FormatError("sketch file truncated in header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("sketch header is not valid JSON: ") + e.what());
  }
  SketchFile file;
  Index r = 0;
  Index d = 0;
  bool has_weights = false;
  try {
    file.method = sketch_method_from(header.at("method").get<std::string>());
    r = header.at("r").get<Index>();
    d = header.at("d").get<Index>();
    file.epsilon = header.at("epsilon").get<double>();
    file.delta = header.at("delta").get<double>();
    file.bound = header.at("B").get<double>();
    has_weights = header.at("has_weights").get<bool>();
    file.metadata = header.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("sketch header is missing a field: ") + e.what());
  }
  if (r < 1 || d < 1) throw FormatError("sketch header has an invalid shape");
  file.sketch.resize(r, d + 1);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j <= d; ++j) file.sketch(i, j) = detail::get_le<double>(in);
  }
  if (has_weights) {
    Vector w(r);
    for (Index i = 0; i < r; ++i) w(i) = detail::get_le<double>(in);
    file.weights = std::move(w);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("sketch file has trailing bytes");
  }
  return file;
}

inline void write_sketch_file(const std::string& path, const SketchFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_sketch(out, file);
}

inline SketchFile read_sketch_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sketch file '" + path + "'");
  return read_sketch(in);
}

}  // namespace dpsketch
