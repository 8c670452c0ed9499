// Copyright 2026 The adslot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace adslot::csv {

// Numeric CSV with '.' decimal separator.  Infinities round-trip as the
// literal "+inf" / "-inf".  An optional single header row is detected by its
// first cell failing numeric parse and is skipped on load.

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool parse_cell(const std::string& raw, double* out) {
  std::string cell = trim(raw);
  if (cell.empty()) return false;
  if (cell == "+inf" || cell == "inf" || cell == "+Inf" || cell == "Inf") {
    *out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (cell == "-inf" || cell == "-Inf") {
    *out = -std::numeric_limits<double>::infinity();
    return true;
  }
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

inline std::string format_cell(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[40];
  // max_digits10 so that values round-trip bit-exactly
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline std::vector<std::vector<double>> read_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    bool ok = true;
    for (const auto& c : cells) {
      double v;
      if (!parse_cell(c, &v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw std::invalid_argument("csv: non-numeric cell in data row: " + line);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<double>> read_rows_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("csv: cannot open " + path);
  return read_rows(in);
}

inline void write_rows(std::ostream& out,
                       const std::vector<std::vector<double>>& rows,
                       const std::string& header = "") {
  if (!header.empty()) out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_cell(row[j]);
    }
    out << '\n';
  }
}

}  // namespace adslot::csv
