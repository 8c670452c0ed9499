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
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "adslot/types.hpp"

namespace adslot {

// What one bid profile earns each bidder: click volume won and total charge.
struct ProfileOutcome {
  std::vector<double> clicks;
  std::vector<double> payment;
};
using ProfileMechanism = std::function<ProfileOutcome(const std::vector<double>&)>;

struct IcViolation {
  std::size_t bidder = 0;
  double report = 0.0;
  std::size_t cap_report = 0;  // self-selection audits only
  double truthful_utility = 0.0;
  double deviant_utility = 0.0;
};

struct IcReport {
  double max_gain = -kInf;  // most a deviation beat truth by; <= 0 is clean
  IcViolation worst;
  bool passed(double tol) const { return max_gain <= tol; }
};

// Candidate misreports for a truthful value: zero, a geometric ladder around
// the value (or around 1 when the value is 0), and any caller-supplied probe
// points, e.g. thresholds nudged by +-epsilon. Nonnegative, sorted, deduped.
inline std::vector<double> misreport_grid(double v, const std::vector<double>& probes = {}) {
  if (!(v >= 0.0)) throw std::invalid_argument("misreport_grid: value must be >= 0");
  std::vector<double> grid{0.0};
  const double center = v > 0.0 ? v : 1.0;
  for (int k = -10; k <= 10; ++k) grid.push_back(center * std::pow(2.0, 0.5 * k));
  for (double p : probes)
    if (p >= 0.0 && std::isfinite(p)) grid.push_back(p);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// One-dimensional deviation audit: every bidder tries every grid misreport
// while the rest stay truthful. The returned worst case is replayable by
// rerunning the mechanism at the recorded report.
inline IcReport audit_ic(const ProfileMechanism& mech, const std::vector<double>& values,
                         const std::vector<std::vector<double>>& probes = {}) {
  const std::size_t n = values.size();
  if (!probes.empty() && probes.size() != n)
    throw std::invalid_argument("audit_ic: probes length");
  auto truth = mech(values);
  if (truth.clicks.size() != n || truth.payment.size() != n)
    throw std::invalid_argument("audit_ic: mechanism output length");

  IcReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    const double u_truth = values[i] * truth.clicks[i] - truth.payment[i];
    const auto grid = misreport_grid(values[i], probes.empty() ? std::vector<double>{} : probes[i]);
    for (double r : grid) {
      auto bids = values;
      bids[i] = r;
      auto dev = mech(bids);
      const double u_dev = values[i] * dev.clicks[i] - dev.payment[i];
      if (u_dev - u_truth > rep.max_gain) {
        rep.max_gain = u_dev - u_truth;
        rep.worst = {i, r, 0, u_truth, u_dev};
      }
    }
  }
  return rep;
}

// What one (bids, depth caps) profile earns each bidder under a depth-capped
// mechanism: the slot won (-1 if none), its click volume, and the net
// transfer collected from the bidder (charge minus any side payment).
struct SlottedProfileOutcome {
  std::vector<int> slot;
  std::vector<double> clicks;
  std::vector<double> transfer;
};
using SlottedProfileMechanism = std::function<SlottedProfileOutcome(
    const std::vector<double>&, const std::vector<std::size_t>&)>;

// Depth-report audit: every bidder tries every shallower cap at their
// truthful value. Side payments that depend on the bidder's own value report
// rule out a joint (value, depth) audit here; the value dimension is audited
// against the capped core mechanism, which charges thresholds only.
inline IcReport audit_self_selection(const SlottedProfileMechanism& mech,
                                     const std::vector<double>& values,
                                     const std::vector<std::size_t>& caps) {
  const std::size_t n = values.size();
  if (caps.size() != n) throw std::invalid_argument("audit_self_selection: caps length");
  auto truth = mech(values, caps);

  IcReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    const double u_truth = values[i] * truth.clicks[i] - truth.transfer[i];
    for (std::size_t k = 1; k <= caps[i]; ++k) {
      auto cc = caps;
      cc[i] = k;
      auto dev = mech(values, cc);
      // Slots at or past the true cap are worthless to the bidder; shallower
      // reports can only win slots above it.
      const bool valued = dev.slot[i] >= 0 && static_cast<std::size_t>(dev.slot[i]) < caps[i];
      const double u_dev = (valued ? values[i] * dev.clicks[i] : 0.0) - dev.transfer[i];
      if (u_dev - u_truth > rep.max_gain) {
        rep.max_gain = u_dev - u_truth;
        rep.worst = {i, values[i], k, u_truth, u_dev};
      }
    }
  }
  return rep;
}

// Largest deviation of f from chord midpoints over all pairs of sample
// points. Zero (to rounding) for affine f; a certified positive gap shows
// curvature.
inline double midpoint_linearity_gap(const std::function<double(double)>& f,
                                     const std::vector<double>& xs) {
  double gap = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = a + 1; b < xs.size(); ++b) {
      const double mid = f(0.5 * (xs[a] + xs[b]));
      gap = std::max(gap, std::abs(mid - 0.5 * (f(xs[a]) + f(xs[b]))));
    }
  return gap;
}

inline double signed_power(double x, double p) {
  return x >= 0.0 ? std::pow(x, p) : -std::pow(-x, p);
}

// Two bidders, two unit-rate slots, and per-slot value pairs. The top slot
// goes to bidder 0 exactly when their value difference clears a curved
// function of the rival's difference; charges are half that curve, with the
// bottom slot charged its negative. Each bidder faces a two-item menu fixed
// by the rival, and taking the better item reproduces the allocation, so the
// rule is incentive compatible even though no weighting of bids makes it a
// score maximizer: the charges are visibly non-affine in the reports.
struct CurvedPairOutcome {
  std::array<int, 2> slot;      // 0 = top, 1 = bottom
  std::array<double, 2> charge; // negative means the slot is subsidized
};

inline CurvedPairOutcome curved_pair_outcome(const std::array<double, 2>& v0,
                                             const std::array<double, 2>& v1,
                                             double curvature) {
  if (!(curvature > -1.0)) throw std::invalid_argument("curved_pair_outcome: curvature > -1");
  const double d0 = v0[0] - v0[1], d1 = v1[0] - v1[1];
  const double bar0 = signed_power(d1, 1.0 + curvature);   // what d0 must clear
  const double bar1 = signed_power(d0, 1.0 / (1.0 + curvature));
  CurvedPairOutcome out;
  const bool zero_top = d0 >= bar0;
  out.slot = {zero_top ? 0 : 1, zero_top ? 1 : 0};
  out.charge[0] = zero_top ? 0.5 * bar0 : -0.5 * bar0;
  out.charge[1] = zero_top ? -0.5 * bar1 : 0.5 * bar1;
  return out;
}

}  // namespace adslot
