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

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "adslot/csv.hpp"

namespace adslot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense row-major double matrix. Plain storage, no arithmetic.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> d)
      : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols)
      throw std::invalid_argument("Matrix: size mismatch");
  }
  static Matrix from_nested(const std::vector<std::vector<double>>& m) {
    if (m.empty()) throw std::invalid_argument("Matrix: empty");
    Matrix out(m.size(), m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i].size() != out.cols)
        throw std::invalid_argument("Matrix: ragged rows");
      for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) = m[i][j];
    }
    return out;
  }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Click-through rates: rows are bidders, columns are slots ordered from best
// to worst. Every row is nonincreasing and there are at least as many bidders
// as slots. Entries are finite and nonnegative (a zero CTR marks a slot that
// yields no clicks for that bidder).
class CtrMatrix {
 public:
  CtrMatrix(std::size_t bidders, std::size_t slots, std::vector<double> vals)
      : m_(bidders, slots, std::move(vals)) {
    validate();
  }
  explicit CtrMatrix(Matrix m) : m_(std::move(m)) { validate(); }
  static CtrMatrix from_nested(const std::vector<std::vector<double>>& m) {
    return CtrMatrix(Matrix::from_nested(m));
  }
  static CtrMatrix from_csv(const std::string& path) {
    auto rows = csv::read_rows_file(path);
    return CtrMatrix(Matrix::from_nested(rows));
  }

  std::size_t bidders() const { return m_.rows; }
  std::size_t slots() const { return m_.cols; }

  // c(i, j); the virtual column j == slots() reads as 0 so that sums over
  // "next worse slot" need no special casing at the boundary.
  double at(std::size_t i, std::size_t j) const {
    if (j == m_.cols) return 0.0;
    return m_.at(i, j);
  }

  const Matrix& matrix() const { return m_; }

  void to_csv(std::ostream& out) const {
    std::vector<std::vector<double>> rows(m_.rows);
    for (std::size_t i = 0; i < m_.rows; ++i)
      rows[i].assign(m_.data.begin() + i * m_.cols,
                     m_.data.begin() + (i + 1) * m_.cols);
    csv::write_rows(out, rows);
  }

 private:
  void validate() const {
    if (m_.rows == 0 || m_.cols == 0)
      throw std::invalid_argument("CtrMatrix: empty");
    if (m_.cols > m_.rows)
      throw std::invalid_argument("CtrMatrix: more slots than bidders");
    for (std::size_t i = 0; i < m_.rows; ++i) {
      for (std::size_t j = 0; j < m_.cols; ++j) {
        double c = m_.at(i, j);
        if (!std::isfinite(c) || c < 0.0)
          throw std::invalid_argument("CtrMatrix: entries must be finite, >= 0");
        if (j + 1 < m_.cols && m_.at(i, j + 1) > c)
          throw std::invalid_argument("CtrMatrix: rows must be nonincreasing");
      }
    }
  }

  Matrix m_;
};

// Assignment weights: rows are bidders, columns are slots. Entries may be
// negative. The optional mask marks bidder-slot pairs that may be used; an
// empty mask allows everything.
struct WeightMatrix {
  std::size_t bidders = 0;
  std::size_t slots = 0;
  std::vector<double> w;             // bidders x slots, row-major
  std::vector<std::uint8_t> allowed; // empty, or bidders x slots

  WeightMatrix() = default;
  WeightMatrix(std::size_t n, std::size_t m)
      : bidders(n), slots(m), w(n * m, 0.0) {}

  static WeightMatrix from_nested(const std::vector<std::vector<double>>& m) {
    Matrix t = Matrix::from_nested(m);
    WeightMatrix out(t.rows, t.cols);
    out.w = std::move(t.data);
    return out;
  }
  static WeightMatrix from_csv(const std::string& path) {
    return from_nested(csv::read_rows_file(path));
  }
  // w_ij = c_ij * z_i for per-bidder scores z.
  static WeightMatrix from_scores(const CtrMatrix& c,
                                  const std::vector<double>& z) {
    if (z.size() != c.bidders())
      throw std::invalid_argument("WeightMatrix: score length mismatch");
    WeightMatrix out(c.bidders(), c.slots());
    for (std::size_t i = 0; i < c.bidders(); ++i)
      for (std::size_t j = 0; j < c.slots(); ++j)
        out.w[i * c.slots() + j] = c.at(i, j) * z[i];
    return out;
  }

  double at(std::size_t i, std::size_t j) const { return w[i * slots + j]; }
  double& at(std::size_t i, std::size_t j) { return w[i * slots + j]; }
  bool ok(std::size_t i, std::size_t j) const {
    return allowed.empty() || allowed[i * slots + j] != 0;
  }
  void validate() const {
    if (bidders == 0 || slots == 0)
      throw std::invalid_argument("WeightMatrix: empty");
    if (w.size() != bidders * slots)
      throw std::invalid_argument("WeightMatrix: dimension mismatch");
    if (!allowed.empty() && allowed.size() != bidders * slots)
      throw std::invalid_argument("WeightMatrix: mask dimension mismatch");
    for (double x : w)
      if (!std::isfinite(x))
        throw std::invalid_argument("WeightMatrix: weights must be finite");
  }
};

// Slot assignment. slot_to_bidder[j] is the bidder on slot j, or -1 when the
// slot is left uncovered.
struct Matching {
  std::size_t bidders = 0;
  std::vector<int> slot_to_bidder;

  Matching() = default;
  Matching(std::size_t n, std::size_t m) : bidders(n), slot_to_bidder(m, -1) {}

  std::size_t slots() const { return slot_to_bidder.size(); }
  int bidder_at(std::size_t j) const { return slot_to_bidder[j]; }
  // Slot of a bidder, or -1.
  int slot_of(int bidder) const {
    for (std::size_t j = 0; j < slot_to_bidder.size(); ++j)
      if (slot_to_bidder[j] == bidder) return static_cast<int>(j);
    return -1;
  }
  std::size_t covered() const {
    std::size_t k = 0;
    for (int b : slot_to_bidder) k += (b >= 0);
    return k;
  }
  bool operator==(const Matching& o) const {
    return bidders == o.bidders && slot_to_bidder == o.slot_to_bidder;
  }
};

namespace detail {
inline void matrix_to_csv(std::ostream& out, const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    rows[i].assign(m.data.begin() + i * m.cols, m.data.begin() + (i + 1) * m.cols);
  csv::write_rows(out, rows);
}
inline Matrix matrix_from_csv(const std::string& path) {
  return Matrix::from_nested(csv::read_rows_file(path));
}
}  // namespace detail

// Per-bidder, per-slot value thresholds. Row i is nonincreasing left to
// right once valid: a(i, 0) >= a(i, 1) >= ... >= a(i, m-1) >= 0, with +inf
// marking a slot the bidder can never win.
struct ThresholdTable {
  Matrix a;

  ThresholdTable() = default;
  ThresholdTable(std::size_t n, std::size_t m) : a(n, m, 0.0) {}

  std::size_t bidders() const { return a.rows; }
  std::size_t slots() const { return a.cols; }
  double at(std::size_t i, std::size_t j) const { return a.at(i, j); }
  double& at(std::size_t i, std::size_t j) { return a.at(i, j); }

  // Threshold just below slot j for bidder i; the region above slot 0 is
  // unbounded and the region below the last slot ends at 0.
  double upper(std::size_t i, std::size_t j) const {
    return j == 0 ? kInf : a.at(i, j - 1);
  }

  void validate_ordering() const {
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j + 1 < a.cols; ++j)
        if (a.at(i, j) < a.at(i, j + 1))
          throw std::invalid_argument("ThresholdTable: ordering violated");
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j)
        if (std::isnan(a.at(i, j)) || a.at(i, j) < 0.0)
          throw std::invalid_argument("ThresholdTable: negative threshold");
  }

  void to_csv(std::ostream& out) const { detail::matrix_to_csv(out, a); }
  static ThresholdTable from_csv(const std::string& path) {
    ThresholdTable t;
    t.a = detail::matrix_from_csv(path);
    return t;
  }
};

// Per-click prices for every bidder-slot pair; +inf marks an unattainable
// slot. The outside option always costs 0 and is not stored.
struct PriceSchedule {
  Matrix p;

  PriceSchedule() = default;
  PriceSchedule(std::size_t n, std::size_t m) : p(n, m, 0.0) {}

  std::size_t bidders() const { return p.rows; }
  std::size_t slots() const { return p.cols; }
  double at(std::size_t i, std::size_t j) const { return p.at(i, j); }
  double& at(std::size_t i, std::size_t j) { return p.at(i, j); }

  void to_csv(std::ostream& out) const { detail::matrix_to_csv(out, p); }
  static PriceSchedule from_csv(const std::string& path) {
    PriceSchedule s;
    s.p = detail::matrix_from_csv(path);
    return s;
  }
};

// Total transfer per bidder, plus the per-click rate on the assigned slot
// (zero for unassigned bidders).
struct PaymentVector {
  std::vector<double> total;
  std::vector<double> per_click;

  PaymentVector() = default;
  explicit PaymentVector(std::size_t n) : total(n, 0.0), per_click(n, 0.0) {}
};

// A nondecreasing score transform with its generalized inverse
// inverse(y) = inf{v : forward(v) > y}, which is +inf when no such v exists.
struct ScoreMap {
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
};

inline ScoreMap identity_score_map() {
  return {[](double v) { return v; }, [](double y) { return y; }};
}

}  // namespace adslot
