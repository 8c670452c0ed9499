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
#include <functional>
#include <stdexcept>
#include <vector>

#include "adslot/assignment.hpp"
#include "adslot/types.hpp"

namespace adslot {

namespace detail {

struct EnvelopeLine {
  double slope = 0.0;      // click rate of the slot the bidder would hold
  double intercept = 0.0;  // best total the others achieve around that choice
  int slot = -1;           // -1: bidder unassigned
};

// Everyone-else's optimum over exactly `cols`, bidder `skip` removed. False
// when those slots cannot all be filled.
inline bool others_total(const WeightMatrix& W, std::size_t skip,
                         const std::vector<int>& cols, double* out) {
  thread_local std::vector<char> banned;
  banned.assign(W.bidders, 0);
  banned[skip] = 1;
  thread_local std::vector<int> col_to_row;
  if (!solve_cover(W, cols, banned, col_to_row)) return false;
  *out = cover_total(W, col_to_row);
  return true;
}

}  // namespace detail

// Score-space award thresholds for one bidder, everyone else's scores fixed.
// Entry j is the score at which the bidder moves up into slot j; slot j is
// held on scores in (a[j], a[j-1]] with a[-1] read as +inf. Slots the bidder
// never holds get the nearest better slot's threshold (an empty interval), or
// +inf when there is no attainable slot above them.
//
// Works by decomposing the parametric assignment total into one line per
// slot the bidder could hold: value lambda * ctr(i,j) + (others' best given
// slot j is taken), plus a flat line for staying unassigned. The bidder's
// award as a function of their score follows the upper envelope of those
// lines, so thresholds are the envelope's breakpoints, computed exactly.
//
// depth_caps, when given, restricts every bidder b to slots j < depth_caps[b].
inline std::vector<double> score_thresholds(
    const CtrMatrix& c, std::size_t bidder, const std::vector<double>& z,
    const std::vector<std::size_t>* depth_caps = nullptr) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (z.size() != n) throw std::invalid_argument("score_thresholds: z length");
  if (bidder >= n) throw std::invalid_argument("score_thresholds: bidder index");
  if (depth_caps && depth_caps->size() != n)
    throw std::invalid_argument("score_thresholds: caps length");
  for (std::size_t i = 0; i < n; ++i) {
    if (i == bidder) continue;
    if (!std::isfinite(z[i]) || z[i] < 0.0)
      throw std::invalid_argument("score_thresholds: scores must be finite, >= 0");
  }

  WeightMatrix W;
  W.bidders = n;
  W.slots = m;
  W.w.assign(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == bidder) continue;
    for (std::size_t j = 0; j < m; ++j) W.w[i * m + j] = c.at(i, j) * z[i];
  }
  if (depth_caps) {
    // A slot past a bidder's depth cap is worth nothing to them, but they can
    // still be parked there, so it zeroes the weight instead of banning it.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = (*depth_caps)[i]; j < m; ++j) W.w[i * m + j] = 0.0;
  }

  // Slots that get filled do not depend on anyone's score, only on counts and
  // eligibility, so the covered set is fixed across the whole parameter range.
  std::vector<char> no_rows(n, 0), no_cols(m, 0);
  const auto covered = detail::coverage_cols(W, no_rows, no_cols);

  std::vector<detail::EnvelopeLine> lines;
  for (int j : covered) {
    std::vector<int> rest_cols;
    for (int jj : covered)
      if (jj != j) rest_cols.push_back(jj);
    double rest;
    if (!detail::others_total(W, bidder, rest_cols, &rest)) continue;
    if (depth_caps && static_cast<std::size_t>(j) >= (*depth_caps)[bidder]) {
      // Past the own cap the bidder can still be parked at slot j, worth
      // nothing to them but freeing a rival; that is a flat line, not a win.
      lines.push_back({0.0, rest, -1});
    } else {
      lines.push_back({c.at(bidder, static_cast<std::size_t>(j)), rest, j});
    }
  }
  {
    double rest;
    if (detail::others_total(W, bidder, covered, &rest))
      lines.push_back({0.0, rest, -1});
  }

  std::vector<double> a(m, kInf);
  if (!lines.empty()) {
    // Canonical order: slope ascending; on slope ties the higher intercept
    // wins, then the better (lower-index) slot, unassigned last. Only the
    // first line of each slope group can touch the envelope.
    auto slot_key = [](int s) { return s < 0 ? std::numeric_limits<int>::max() : s; };
    std::sort(lines.begin(), lines.end(),
              [&](const detail::EnvelopeLine& x, const detail::EnvelopeLine& y) {
                if (x.slope != y.slope) return x.slope < y.slope;
                if (x.intercept != y.intercept) return x.intercept > y.intercept;
                return slot_key(x.slot) < slot_key(y.slot);
              });
    std::vector<detail::EnvelopeLine> uniq;
    for (const auto& l : lines)
      if (uniq.empty() || uniq.back().slope != l.slope) uniq.push_back(l);

    // Upper envelope over lambda >= 0 (standard convex hull of lines).
    // breaks[t] is where hull[t] takes over from hull[t-1].
    std::vector<detail::EnvelopeLine> hull;
    std::vector<double> breaks;
    auto cross = [](const detail::EnvelopeLine& lo, const detail::EnvelopeLine& hi) {
      return (lo.intercept - hi.intercept) / (hi.slope - lo.slope);
    };
    for (const auto& l : uniq) {
      while (!hull.empty()) {
        double x = cross(hull.back(), l);
        if (hull.size() >= 2 && x <= breaks.back()) {
          hull.pop_back();
          breaks.pop_back();
          continue;
        }
        if (hull.size() == 1 && l.intercept >= hull.back().intercept) {
          // New line dominates from the start of the domain.
          hull.pop_back();
          continue;
        }
        breaks.push_back(x);
        break;
      }
      hull.push_back(l);
    }

    // Walk the hull left of / across zero: the active segment at 0+ has
    // threshold 0; every later takeover is that slot's threshold.
    std::size_t t0 = 0;
    while (t0 + 1 < hull.size() && breaks[t0] <= 0.0) ++t0;
    if (hull[t0].slot >= 0) a[static_cast<std::size_t>(hull[t0].slot)] = 0.0;
    for (std::size_t t = t0 + 1; t < hull.size(); ++t)
      if (hull[t].slot >= 0) a[static_cast<std::size_t>(hull[t].slot)] = breaks[t - 1];
  }

  // Slots never held inherit the nearest attainable better slot's threshold,
  // leaving them an empty award interval.
  double best_above = kInf;
  for (std::size_t j = 0; j < m; ++j) {
    if (a[j] == kInf)
      a[j] = best_above;
    else
      best_above = a[j];
  }
  return a;
}

// Threshold rows for every bidder against the others' fixed scores.
inline ThresholdTable threshold_table(const CtrMatrix& c, const std::vector<double>& z,
                                      const std::vector<std::size_t>* depth_caps = nullptr) {
  ThresholdTable t;
  t.a.rows = c.bidders();
  t.a.cols = c.slots();
  t.a.data.resize(t.a.rows * t.a.cols);
  for (std::size_t i = 0; i < c.bidders(); ++i) {
    auto row = score_thresholds(c, i, z, depth_caps);
    for (std::size_t j = 0; j < c.slots(); ++j) t.a.data[i * t.a.cols + j] = row[j];
  }
  return t;
}

// Per-click price for a won slot, band form: each term is a threshold band
// times the click advantage of the won slot over the slot below that band.
// Terms whose click coefficient is zero are skipped before touching the
// thresholds, so +inf entries only surface for genuinely unattainable slots.
inline double per_click_price_bands(const CtrMatrix& c, std::size_t i, std::size_t j,
                                    const std::vector<double>& a) {
  const std::size_t m = c.slots();
  if (a.size() != m) throw std::invalid_argument("per_click_price_bands: row size");
  const double cij = c.at(i, j);
  if (cij <= 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = j; k < m; ++k) {
    const double coef = cij - c.at(i, k + 1);  // c.at(i, m) reads as 0
    if (coef == 0.0) continue;
    const double ak = a[k];
    if (ak == kInf) return kInf;
    const double ak1 = k + 1 < m ? a[k + 1] : 0.0;
    sum += (ak - ak1) * coef;
  }
  return sum / cij;
}

// Per-click price, step form: each term is a click-rate step times the
// threshold where it happens. Algebraically identical to the band form.
inline double per_click_price_steps(const CtrMatrix& c, std::size_t i, std::size_t j,
                                    const std::vector<double>& a) {
  const std::size_t m = c.slots();
  if (a.size() != m) throw std::invalid_argument("per_click_price_steps: row size");
  const double cij = c.at(i, j);
  if (cij <= 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = j; k < m; ++k) {
    const double coef = c.at(i, k) - c.at(i, k + 1);
    if (coef == 0.0) continue;
    if (a[k] == kInf) return kInf;
    sum += coef * a[k];
  }
  return sum / cij;
}

// Allocation and pricing for a score-based maximizer: bids map through the
// score transforms, the assignment maximizes total score-weighted clicks,
// winners whose score is zero are not sold their slot, and each sold slot is
// priced from the winner's value-space thresholds.
struct MechanismOutcome {
  Matching matching;
  double score_total = 0.0;
  std::vector<double> per_click;
  std::vector<double> total_charge;
};

inline MechanismOutcome score_mechanism_outcome(
    const CtrMatrix& c, const std::vector<double>& bids,
    const std::vector<ScoreMap>& maps,
    const std::vector<std::size_t>* depth_caps = nullptr) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (bids.size() != n || maps.size() != n)
    throw std::invalid_argument("score_mechanism_outcome: length mismatch");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = maps[i].forward(bids[i]);
    if (std::isnan(z[i]) || z[i] < 0.0)
      throw std::invalid_argument("score_mechanism_outcome: scores must be >= 0");
  }

  WeightMatrix W;
  W.bidders = n;
  W.slots = m;
  W.w.resize(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) W.w[i * m + j] = c.at(i, j) * z[i];
  if (depth_caps) {
    if (depth_caps->size() != n)
      throw std::invalid_argument("score_mechanism_outcome: caps length");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = (*depth_caps)[i]; j < m; ++j) W.w[i * m + j] = 0.0;
  }

  auto r = max_weight_matching(W);
  MechanismOutcome out;
  out.matching = r.matching;
  out.score_total = r.total;
  out.per_click.assign(n, 0.0);
  out.total_charge.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    int b = out.matching.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    if (z[i] == 0.0 || (depth_caps && j >= (*depth_caps)[i])) {
      // Matched only to fill the slot; not sold, not charged.
      out.matching.slot_to_bidder[j] = -1;
      continue;
    }
    if (c.at(i, j) <= 0.0) continue;
    auto lam = score_thresholds(c, i, z, depth_caps);
    std::vector<double> av(m);
    for (std::size_t k = 0; k < m; ++k)
      av[k] = lam[k] == kInf ? kInf : maps[i].inverse(lam[k]);
    const double p = per_click_price_bands(c, i, j, av);
    out.per_click[i] = p;
    out.total_charge[i] = p * c.at(i, j);
  }
  return out;
}

}  // namespace adslot
