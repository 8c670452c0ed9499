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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "adslot/types.hpp"

namespace adslot {

// Click rates that factor as ctr(i, j) = bidder(i) * slot(j): ranking by
// bidder-factor-weighted score is then optimal, and per-click charges
// telescope in closed form instead of needing a matching solver.
struct SeparableCtr {
  std::vector<double> bidder;  // > 0
  std::vector<double> slot;    // nonincreasing, >= 0

  SeparableCtr(std::vector<double> b, std::vector<double> s)
      : bidder(std::move(b)), slot(std::move(s)) {
    if (bidder.empty() || slot.empty())
      throw std::invalid_argument("SeparableCtr: empty factor");
    if (slot.size() > bidder.size())
      throw std::invalid_argument("SeparableCtr: more slots than bidders");
    for (double f : bidder)
      if (!(f > 0.0) || !std::isfinite(f))
        throw std::invalid_argument("SeparableCtr: bidder factors must be > 0");
    for (std::size_t j = 0; j < slot.size(); ++j) {
      if (!(slot[j] >= 0.0) || !std::isfinite(slot[j]))
        throw std::invalid_argument("SeparableCtr: slot factors must be >= 0");
      if (j > 0 && slot[j] > slot[j - 1])
        throw std::invalid_argument("SeparableCtr: slot factors must be nonincreasing");
    }
  }

  std::size_t bidders() const { return bidder.size(); }
  std::size_t slots() const { return slot.size(); }
  double at(std::size_t i, std::size_t j) const {
    return j >= slots() ? 0.0 : bidder[i] * slot[j];
  }
  CtrMatrix dense() const {
    std::vector<std::vector<double>> rows(bidders(), std::vector<double>(slots()));
    for (std::size_t i = 0; i < bidders(); ++i)
      for (std::size_t j = 0; j < slots(); ++j) rows[i][j] = at(i, j);
    return CtrMatrix::from_nested(rows);
  }
  double mu(std::size_t j) const { return j >= slots() ? 0.0 : slot[j]; }
};

struct SeparableOutcome {
  std::vector<int> order;  // bidder index by rank, best first
  Matching matching;
  std::vector<double> per_click;
  std::vector<double> total_charge;
};

namespace detail {

inline std::vector<int> rank_by_score(const std::vector<double>& s) {
  std::vector<int> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return s[static_cast<std::size_t>(x)] > s[static_cast<std::size_t>(y)];
  });
  return order;
}

}  // namespace detail

// Surplus-maximizing outcome with truth-inducing per-click charges:
//   p_[k] = sum_{j>=k} (mu_j - mu_{j+1}) * phi_[j+1] * v_[j+1] / (mu_k * phi_[k])
// Matches the general exclusion-payment route on the dense matrix.
inline SeparableOutcome separable_efficient_outcome(const SeparableCtr& c,
                                                    const std::vector<double>& v) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (v.size() != n) throw std::invalid_argument("separable_efficient_outcome: v length");
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) score[i] = c.bidder[i] * v[i];

  SeparableOutcome out;
  out.order = detail::rank_by_score(score);
  out.matching = Matching(n, m);
  out.per_click.assign(n, 0.0);
  out.total_charge.assign(n, 0.0);
  auto ranked_score = [&](std::size_t rank) {
    return rank >= n ? 0.0 : score[static_cast<std::size_t>(out.order[rank])];
  };
  for (std::size_t k = 0; k < m && k < n; ++k) {
    const std::size_t i = static_cast<std::size_t>(out.order[k]);
    out.matching.slot_to_bidder[k] = static_cast<int>(i);
    if (c.mu(k) <= 0.0) continue;
    double sum = 0.0;
    for (std::size_t j = k; j < m; ++j) sum += (c.mu(j) - c.mu(j + 1)) * ranked_score(j + 1);
    out.per_click[i] = sum / (c.mu(k) * c.bidder[i]);
    out.total_charge[i] = out.per_click[i] * c.at(i, k);
  }
  return out;
}

// Score-maximizing variant: rank on phi_i * psi_i(v_i), drop winners whose
// score is zero, and charge the telescoped score thresholds carried back to
// value space per band:
//   p_[k] = (1/mu_k) sum_{j>=k} (mu_j - mu_{j+1})
//           * psi_[k]^{-1}(phi_[j+1] * psi_[j+1](v_[j+1]) / phi_[k])
// Absent lower-ranked bidders contribute score zero, so the innermost bands
// charge each winner's reserve value psi^{-1}(0).
inline SeparableOutcome separable_optimal_outcome(const SeparableCtr& c,
                                                  const std::vector<double>& v,
                                                  const std::vector<ScoreMap>& maps) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (v.size() != n || maps.size() != n)
    throw std::invalid_argument("separable_optimal_outcome: length mismatch");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = maps[i].forward(v[i]);
    if (!(z[i] >= 0.0) || std::isnan(z[i]))
      throw std::invalid_argument("separable_optimal_outcome: scores must be >= 0");
  }
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) score[i] = c.bidder[i] * z[i];

  SeparableOutcome out;
  out.order = detail::rank_by_score(score);
  out.matching = Matching(n, m);
  out.per_click.assign(n, 0.0);
  out.total_charge.assign(n, 0.0);
  auto ranked_score = [&](std::size_t rank) {
    return rank >= n ? 0.0 : score[static_cast<std::size_t>(out.order[rank])];
  };
  for (std::size_t k = 0; k < m && k < n; ++k) {
    const std::size_t i = static_cast<std::size_t>(out.order[k]);
    if (z[i] == 0.0) continue;  // below reserve: slot goes unsold
    out.matching.slot_to_bidder[k] = static_cast<int>(i);
    if (c.mu(k) <= 0.0) continue;
    double sum = 0.0;
    for (std::size_t j = k; j < m; ++j)
      sum += (c.mu(j) - c.mu(j + 1)) * maps[i].inverse(ranked_score(j + 1) / c.bidder[i]);
    out.per_click[i] = sum / c.mu(k);
    out.total_charge[i] = out.per_click[i] * c.at(i, k);
  }
  return out;
}

}  // namespace adslot
