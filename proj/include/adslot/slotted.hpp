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
#include <stdexcept>
#include <vector>

#include "adslot/assignment.hpp"
#include "adslot/rank.hpp"
#include "adslot/thresholds.hpp"
#include "adslot/types.hpp"

namespace adslot {

// Depth-capped auctions: every bidder reports a value and the deepest slot
// they care about; slots past the cap are worth nothing to them. Reporting a
// shallower cap than the truth can raise a bidder's surplus under the score
// maximizer, so the mechanism grants each bidder the difference against their
// best shallower report as a side payment, which makes total surplus
// nondecreasing in the reported depth and the depth report safe to make
// truthfully.
struct SlottedOutcome {
  Matching matching;  // sold slots only
  double score_total = 0.0;
  std::vector<double> per_click;
  std::vector<double> total_charge;  // threshold charges, before side payments
  std::vector<double> utility;       // clicks * (value - price) at the reports
  std::vector<double> side_payment;  // best shallower-cap utility minus utility
  std::vector<double> transfer;      // total_charge - side_payment, can be < 0
};

namespace detail {

// Utility of one bidder under the score maximizer, computing thresholds for
// that bidder alone. Mirrors score_mechanism_outcome's sold rules: a zero
// score or a berth past the own cap earns (and pays) nothing.
inline double capped_utility(const CtrMatrix& c, std::size_t bidder,
                             const std::vector<double>& bids, const std::vector<double>& z,
                             const std::vector<ScoreMap>& maps,
                             const std::vector<std::size_t>& caps) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (z[bidder] == 0.0) return 0.0;
  WeightMatrix W;
  W.bidders = n;
  W.slots = m;
  W.w.resize(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      W.w[i * m + j] = j < caps[i] ? c.at(i, j) * z[i] : 0.0;
  auto r = max_weight_matching(W);
  const int j = r.matching.slot_of(static_cast<int>(bidder));
  if (j < 0 || static_cast<std::size_t>(j) >= caps[bidder]) return 0.0;
  const auto ju = static_cast<std::size_t>(j);
  if (c.at(bidder, ju) <= 0.0) return 0.0;
  auto lam = score_thresholds(c, bidder, z, &caps);
  std::vector<double> av(m);
  for (std::size_t k = 0; k < m; ++k)
    av[k] = lam[k] == kInf ? kInf : maps[bidder].inverse(lam[k]);
  const double p = per_click_price_bands(c, bidder, ju, av);
  return c.at(bidder, ju) * (bids[bidder] - p);
}

// Fills utility/side_payment/transfer given a per-cap utility evaluator.
template <typename UtilityFn>
void settle_side_payments(SlottedOutcome* out, const std::vector<std::size_t>& caps,
                          std::size_t slots, UtilityFn&& utility_at_cap) {
  const std::size_t n = caps.size();
  out->side_payment.assign(n, 0.0);
  out->transfer = out->total_charge;
  for (std::size_t i = 0; i < n; ++i) {
    double best = out->utility[i];
    const std::size_t reported = std::min(caps[i], slots);
    for (std::size_t k = 1; k < reported; ++k)
      best = std::max(best, utility_at_cap(i, k));
    out->side_payment[i] = std::max(0.0, best - out->utility[i]);
    out->transfer[i] -= out->side_payment[i];
  }
}

}  // namespace detail

// Score-maximizing depth-capped auction with side payments.
inline SlottedOutcome slotted_pointwise_outcome(const CtrMatrix& c,
                                                const std::vector<double>& bids,
                                                const std::vector<ScoreMap>& maps,
                                                const std::vector<std::size_t>& caps) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (bids.size() != n || maps.size() != n || caps.size() != n)
    throw std::invalid_argument("slotted_pointwise_outcome: length mismatch");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = maps[i].forward(bids[i]);
    if (std::isnan(z[i]) || z[i] < 0.0)
      throw std::invalid_argument("slotted_pointwise_outcome: scores must be >= 0");
  }

  auto base = score_mechanism_outcome(c, bids, maps, &caps);
  SlottedOutcome out;
  out.matching = base.matching;
  out.score_total = base.score_total;
  out.per_click = base.per_click;
  out.total_charge = base.total_charge;
  out.utility.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    int b = out.matching.bidder_at(j);
    if (b < 0) continue;
    const auto i = static_cast<std::size_t>(b);
    out.utility[i] = c.at(i, j) * (bids[i] - out.per_click[i]);
  }
  detail::settle_side_payments(&out, caps, m, [&](std::size_t i, std::size_t k) {
    auto shallower = caps;
    shallower[i] = k;
    return detail::capped_utility(c, i, bids, z, maps, shallower);
  });
  return out;
}

// Greedy-ranking depth-capped auction with the same side-payment rule. The
// greedy allocation's surplus is already nondecreasing in the own cap, so the
// side payments stay at zero; they are computed anyway for uniformity.
inline SlottedOutcome slotted_greedy_outcome(const CtrMatrix& c,
                                             const std::vector<double>& bids,
                                             const std::vector<ScoreMap>& maps,
                                             const std::vector<std::size_t>& caps) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (bids.size() != n || maps.size() != n || caps.size() != n)
    throw std::invalid_argument("slotted_greedy_outcome: length mismatch");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = maps[i].forward(bids[i]);
    if (std::isnan(z[i]) || z[i] < 0.0)
      throw std::invalid_argument("slotted_greedy_outcome: scores must be >= 0");
  }

  auto utility_of = [&](const std::vector<std::size_t>& cc, std::size_t i) {
    auto g = greedy_rank_outcome(c, z, &maps, &cc);
    const int j = g.matching.slot_of(static_cast<int>(i));
    if (j < 0) return 0.0;
    return c.at(i, static_cast<std::size_t>(j)) * (bids[i] - g.per_click[i]);
  };

  auto base = greedy_rank_outcome(c, z, &maps, &caps);
  SlottedOutcome out;
  out.matching = base.matching;
  for (std::size_t j = 0; j < m; ++j) {
    int b = out.matching.bidder_at(j);
    if (b >= 0)
      out.score_total += c.at(static_cast<std::size_t>(b), j) * z[static_cast<std::size_t>(b)];
  }
  out.per_click = base.per_click;
  out.total_charge = base.total_charge;
  out.utility.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    int b = out.matching.bidder_at(j);
    if (b < 0) continue;
    const auto i = static_cast<std::size_t>(b);
    out.utility[i] = c.at(i, j) * (bids[i] - out.per_click[i]);
  }
  detail::settle_side_payments(&out, caps, m, [&](std::size_t i, std::size_t k) {
    auto shallower = caps;
    shallower[i] = k;
    return utility_of(shallower, i);
  });
  return out;
}

}  // namespace adslot
