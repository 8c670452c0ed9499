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
#include <stdexcept>
#include <vector>

#include "adslot/assignment.hpp"
#include "adslot/types.hpp"

namespace adslot {

// Allocation plus per-click prices for the bidders that won a slot. Unmatched
// bidders carry zeros. total_charge[i] = per_click[i] * ctr of the won slot.
struct AuctionOutcome {
  Matching matching;
  double surplus = 0.0;
  std::vector<double> per_click;
  std::vector<double> total_charge;
};

inline WeightMatrix value_weights(const CtrMatrix& c, const std::vector<double>& v) {
  if (v.size() != c.bidders())
    throw std::invalid_argument("value_weights: value length mismatch");
  WeightMatrix W;
  W.bidders = c.bidders();
  W.slots = c.slots();
  W.w.resize(W.bidders * W.slots);
  for (std::size_t i = 0; i < W.bidders; ++i)
    for (std::size_t j = 0; j < W.slots; ++j) W.w[i * W.slots + j] = c.at(i, j) * v[i];
  return W;
}

inline double max_surplus(const CtrMatrix& c, const std::vector<double>& v) {
  return max_weight_matching_plain(value_weights(c, v)).total;
}

// Smallest slot premiums supporting a given optimal matching: the pointwise
// least vector nu with
//   nu_l >= 0,
//   nu_l >= w(i,l)                      for every unmatched bidder i,
//   nu_l >= nu_j + w(b_j,l) - w(b_j,j)  for every matched slot j != l,
// computed as a longest-path fixpoint. Matched bidders must weakly prefer
// their own slot at these premiums; if the fixpoint fails to settle or a
// matched bidder would go negative, the matching was not optimal.
inline std::vector<double> min_dual_slot_prices(const WeightMatrix& W, const Matching& x) {
  W.validate();
  if (x.slot_to_bidder.size() != W.slots || x.bidders != W.bidders)
    throw std::invalid_argument("min_dual_slot_prices: shape mismatch");
  const std::size_t m = W.slots;
  std::vector<char> matched_row(W.bidders, 0);
  for (std::size_t j = 0; j < m; ++j)
    if (x.bidder_at(j) >= 0) matched_row[static_cast<std::size_t>(x.bidder_at(j))] = 1;

  std::vector<double> nu(m, 0.0);
  bool changed = true;
  std::size_t pass = 0;
  for (; pass < m + 2 && changed; ++pass) {
    changed = false;
    for (std::size_t l = 0; l < m; ++l) {
      if (x.bidder_at(l) < 0) continue;
      double lo = 0.0;
      for (std::size_t i = 0; i < W.bidders; ++i) {
        if (matched_row[i] || !W.ok(i, l)) continue;
        lo = std::max(lo, W.at(i, l));
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (j == l || x.bidder_at(j) < 0) continue;
        const std::size_t b = static_cast<std::size_t>(x.bidder_at(j));
        if (!W.ok(b, l)) continue;
        lo = std::max(lo, nu[j] + W.at(b, l) - W.at(b, j));
      }
      if (lo > nu[l]) {
        nu[l] = lo;
        changed = true;
      }
    }
  }
  if (changed)
    throw std::invalid_argument("min_dual_slot_prices: matching not optimal");
  for (std::size_t j = 0; j < m; ++j) {
    if (x.bidder_at(j) < 0) continue;
    const std::size_t b = static_cast<std::size_t>(x.bidder_at(j));
    if (nu[j] > W.at(b, j) + 1e-9 * (1.0 + std::fabs(W.at(b, j))))
      throw std::invalid_argument("min_dual_slot_prices: matching not optimal");
  }
  return nu;
}

// Per-click prices from the minimal supporting premiums. This is the fast
// route: one assignment solve plus a small fixpoint.
inline AuctionOutcome vcg_outcome(const CtrMatrix& c, const std::vector<double>& v) {
  auto W = value_weights(c, v);
  auto r = max_weight_matching(W);
  auto nu = min_dual_slot_prices(W, r.matching);
  AuctionOutcome out;
  out.matching = r.matching;
  out.surplus = r.total;
  out.per_click.assign(c.bidders(), 0.0);
  out.total_charge.assign(c.bidders(), 0.0);
  for (std::size_t j = 0; j < c.slots(); ++j) {
    int b = r.matching.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    out.total_charge[i] = nu[j];
    out.per_click[i] = c.at(i, j) > 0.0 ? nu[j] / c.at(i, j) : 0.0;
  }
  return out;
}

// Per-click prices as the winner's externality, priced through two nested
// exclusions: remove the bidder, then additionally retire their slot.
inline std::vector<double> vcg_prices_from_exclusion(const CtrMatrix& c,
                                                     const std::vector<double>& v,
                                                     const Matching& x) {
  auto W = value_weights(c, v);
  std::vector<double> p(c.bidders(), 0.0);
  for (std::size_t j = 0; j < c.slots(); ++j) {
    int b = x.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    if (c.at(i, j) <= 0.0) continue;
    const double without_bidder = surplus_excluding_bidder(W, i);
    const double without_pair = surplus_excluding_pair(W, i, j);
    p[i] = (without_bidder - without_pair) / c.at(i, j);
  }
  return p;
}

// Per-click prices as own value minus the bidder's marginal contribution to
// the total, spread over their clicks.
inline std::vector<double> vcg_prices_from_contribution(const CtrMatrix& c,
                                                        const std::vector<double>& v,
                                                        const Matching& x,
                                                        double total) {
  auto W = value_weights(c, v);
  std::vector<double> p(c.bidders(), 0.0);
  for (std::size_t j = 0; j < c.slots(); ++j) {
    int b = x.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    if (c.at(i, j) <= 0.0) continue;
    const double without_bidder = surplus_excluding_bidder(W, i);
    p[i] = v[i] - (total - without_bidder) / c.at(i, j);
  }
  return p;
}

// Maximizer over matchings of sum_i bw_i * c_ij * v_i + boost_ij, with the
// charge that keeps truthful reporting dominant:
//   T_i = (1/bw_i) * [opt(v without i) - opt(v) + bw_i * c_ij * v_i].
// Boosts stay inside both optima. bw = 1, boost = 0 reproduces vcg_outcome.
inline AuctionOutcome affine_outcome(const CtrMatrix& c, const std::vector<double>& v,
                                     const std::vector<double>& bw,
                                     const Matrix* boost = nullptr) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (v.size() != n || bw.size() != n)
    throw std::invalid_argument("affine_outcome: length mismatch");
  for (double w : bw)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("affine_outcome: bidder weights must be positive");
  if (boost && (boost->rows != n || boost->cols != m))
    throw std::invalid_argument("affine_outcome: boost shape mismatch");

  WeightMatrix W;
  W.bidders = n;
  W.slots = m;
  W.w.resize(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      W.w[i * m + j] = bw[i] * c.at(i, j) * v[i] + (boost ? boost->at(i, j) : 0.0);

  auto r = max_weight_matching(W);
  AuctionOutcome out;
  out.matching = r.matching;
  out.surplus = 0.0;
  out.per_click.assign(n, 0.0);
  out.total_charge.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    int b = r.matching.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    out.surplus += c.at(i, j) * v[i];
    const double without_bidder = surplus_excluding_bidder(W, i);
    const double charge =
        (without_bidder - r.total + bw[i] * c.at(i, j) * v[i]) / bw[i];
    out.total_charge[i] = charge;
    out.per_click[i] = c.at(i, j) > 0.0 ? charge / c.at(i, j) : 0.0;
  }
  return out;
}

}  // namespace adslot
