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

#include "adslot/thresholds.hpp"
#include "adslot/types.hpp"

namespace adslot {

struct RankOutcome {
  std::vector<int> order;  // bidder index by rank, best first
  Matching matching;
  std::vector<double> per_click;
  std::vector<double> total_charge;
};

// Rank bidders by weight * bid, assign slots down the ranking, and charge
// each winner the telescoped weighted bids of those ranked below:
//   p_[k] = sum_{t>=k} (ctr_[k],t - ctr_[k],t+1) / ctr_[k],k * g_[t+1] / w_[k]
// where g is the ranked weight*bid list, zero past the last bidder. The
// charge never exceeds the winner's own bid.
inline RankOutcome rank_by_weighted_bid(const CtrMatrix& c, const std::vector<double>& bids,
                                        const std::vector<double>& w) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (bids.size() != n || w.size() != n)
    throw std::invalid_argument("rank_by_weighted_bid: length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(w[i] > 0.0) || !std::isfinite(w[i]) || !(bids[i] >= 0.0))
      throw std::invalid_argument("rank_by_weighted_bid: need w > 0, bids >= 0");

  RankOutcome out;
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int x, int y) {
    return w[static_cast<std::size_t>(x)] * bids[static_cast<std::size_t>(x)] >
           w[static_cast<std::size_t>(y)] * bids[static_cast<std::size_t>(y)];
  });

  auto g = [&](std::size_t rank) {
    if (rank >= n) return 0.0;
    const std::size_t i = static_cast<std::size_t>(out.order[rank]);
    return w[i] * bids[i];
  };

  out.matching = Matching(n, m);
  out.per_click.assign(n, 0.0);
  out.total_charge.assign(n, 0.0);
  for (std::size_t k = 0; k < m && k < n; ++k) {
    const std::size_t i = static_cast<std::size_t>(out.order[k]);
    out.matching.slot_to_bidder[k] = static_cast<int>(i);
    const double ckk = c.at(i, k);
    if (ckk <= 0.0) continue;
    double sum = 0.0;
    for (std::size_t t = k; t < m; ++t)
      sum += (c.at(i, t) - c.at(i, t + 1)) * g(t + 1);
    out.per_click[i] = sum / (ckk * w[i]);
    out.total_charge[i] = out.per_click[i] * ckk;
  }
  return out;
}

struct GreedyRankOutcome {
  Matching matching;
  ThresholdTable thresholds;  // score space, rows clipped nonincreasing
  std::vector<double> per_click;
  std::vector<double> total_charge;
};

namespace detail {

// Winner of one slot under the greedy rule among `pool`; ties to the lower
// bidder index. Returns -1 when the pool has nobody eligible.
inline int greedy_pick(const CtrMatrix& c, const std::vector<double>& z,
                       const std::vector<char>& in_pool, std::size_t j,
                       const std::vector<std::size_t>* caps) {
  int best = -1;
  double bw = -1.0;
  for (std::size_t i = 0; i < c.bidders(); ++i) {
    if (!in_pool[i]) continue;
    if (caps && j >= (*caps)[i]) continue;
    const double wij = c.at(i, j) * z[i];
    if (wij > bw) {
      bw = wij;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace detail

// Greedy slot-by-slot assignment on scores with threshold-based pricing: each
// winner pays for the marginal score they had to beat, not the next bid
// itself. Thresholds come from replaying the greedy without the bidder; rows
// are clipped nonincreasing so empty award intervals price as zero-width
// bands. `maps`, when given, carries thresholds back to value space before
// pricing (maps[i].inverse), with scores z[i] = maps[i].forward(bids[i])
// expected from the caller.
inline GreedyRankOutcome greedy_rank_outcome(const CtrMatrix& c, const std::vector<double>& z,
                                             const std::vector<ScoreMap>* maps = nullptr,
                                             const std::vector<std::size_t>* caps = nullptr) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (z.size() != n) throw std::invalid_argument("greedy_rank_outcome: z length");
  if (caps && caps->size() != n)
    throw std::invalid_argument("greedy_rank_outcome: caps length");
  for (double zi : z)
    if (!(zi >= 0.0) || !std::isfinite(zi))
      throw std::invalid_argument("greedy_rank_outcome: scores must be finite, >= 0");

  GreedyRankOutcome out;
  out.matching = Matching(n, m);
  std::vector<char> pool(n, 1);
  for (std::size_t j = 0; j < m; ++j) {
    int win = detail::greedy_pick(c, z, pool, j, caps);
    if (win < 0) continue;
    out.matching.slot_to_bidder[j] = win;
    pool[static_cast<std::size_t>(win)] = 0;
  }

  out.thresholds.a.rows = n;
  out.thresholds.a.cols = m;
  out.thresholds.a.data.assign(n * m, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> rivals(n, 1);
    rivals[i] = 0;
    for (std::size_t j = 0; j < m; ++j) {
      int r = detail::greedy_pick(c, z, rivals, j, caps);
      const bool eligible = (!caps || j < (*caps)[i]) && c.at(i, j) > 0.0;
      if (eligible) {
        out.thresholds.a.data[i * m + j] =
            r < 0 ? 0.0 : c.at(static_cast<std::size_t>(r), j) * z[static_cast<std::size_t>(r)] / c.at(i, j);
      }
      if (r >= 0) rivals[static_cast<std::size_t>(r)] = 0;
    }
    // Clip so the table is nonincreasing: a slot that would need more than a
    // better slot can only be awarded through the better slot's interval.
    for (std::size_t j = 1; j < m; ++j)
      out.thresholds.a.data[i * m + j] =
          std::min(out.thresholds.a.data[i * m + j], out.thresholds.a.data[i * m + j - 1]);
  }

  out.per_click.assign(n, 0.0);
  out.total_charge.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    int b = out.matching.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    if (z[i] == 0.0) {
      out.matching.slot_to_bidder[j] = -1;  // filled but below reserve: not sold
      continue;
    }
    if (c.at(i, j) <= 0.0) continue;
    std::vector<double> row(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double ak = out.thresholds.at(i, k);
      row[k] = (maps && ak != kInf) ? (*maps)[i].inverse(ak) : ak;
    }
    const double p = per_click_price_bands(c, i, j, row);
    out.per_click[i] = p;
    out.total_charge[i] = p * c.at(i, j);
  }
  return out;
}

// Sample-average revenue or welfare of the rank mechanism at one weight
// vector, bids taken at face value.  The optimizer calls this thousands of
// times, so the ranking is inlined with reused scratch instead of going
// through rank_by_weighted_bid; revenue and ordering are identical to it.
inline double rank_objective(const CtrMatrix& c,
                             const std::vector<std::vector<double>>& profiles,
                             const std::vector<double>& w, bool welfare) {
  const std::size_t n = c.bidders(), m = c.slots();
  if (w.size() != n)
    throw std::invalid_argument("rank_objective: weight length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw std::invalid_argument("rank_objective: need w > 0");

  std::vector<int> order(n);
  std::vector<double> score(n);
  double acc = 0.0;
  for (const auto& v : profiles) {
    if (v.size() != n)
      throw std::invalid_argument("rank_objective: profile length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      score[i] = w[i] * v[i];
      order[i] = static_cast<int>(i);
    }
    // Insertion sort, descending, stable: same order rank_by_weighted_bid's
    // stable_sort produces.
    for (std::size_t i = 1; i < n; ++i) {
      const int id = order[i];
      const double s = score[static_cast<std::size_t>(id)];
      std::size_t j = i;
      while (j > 0 && score[static_cast<std::size_t>(order[j - 1])] < s) {
        order[j] = order[j - 1];
        --j;
      }
      order[j] = id;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < m && k < n; ++k) {
      const std::size_t i = static_cast<std::size_t>(order[k]);
      if (welfare) {
        s += c.at(i, k) * v[i];
        continue;
      }
      if (c.at(i, k) <= 0.0) continue;
      double sum = 0.0;
      for (std::size_t t = k; t < m; ++t) {
        const double g = t + 1 < n ? score[static_cast<std::size_t>(order[t + 1])] : 0.0;
        sum += (c.at(i, t) - c.at(i, t + 1)) * g;
      }
      s += sum / w[i];
    }
    acc += s;
  }
  return acc / static_cast<double>(profiles.size());
}

// Deterministic multi-start coordinate search over rank weights, first weight
// pinned at 1. Starts at uniform weights, top-slot click-rate ratios, and
// fixed perturbations of both; each start runs shrinking-step coordinate
// passes. Returns the best weight vector found on the given sample.
inline std::vector<double> optimize_rank_vector(
    const CtrMatrix& c, const std::vector<std::vector<double>>& profiles,
    bool welfare = false) {
  const std::size_t n = c.bidders();
  if (profiles.empty()) throw std::invalid_argument("optimize_rank_vector: no samples");

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, 1.0);
  {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = c.at(i, 0) / c.at(0, 0);
    starts.push_back(g);
  }
  for (double f : {0.8, 1.25}) {
    for (std::size_t base = 0; base < 2; ++base) {
      auto s = starts[base];
      for (std::size_t i = 1; i < n; ++i) s[i] = std::max(1e-3, s[i] * f);
      starts.push_back(s);
    }
  }

  std::vector<double> best;
  double best_val = -kInf;
  for (auto w : starts) {
    w[0] = 1.0;
    double cur = rank_objective(c, profiles, w, welfare);
    for (double step = 0.5; step >= 1e-3; step *= 0.5) {
      bool improved = true;
      int guard = 0;
      while (improved && guard++ < 40) {
        improved = false;
        for (std::size_t i = 1; i < n; ++i) {
          for (double cand : {w[i] + step, w[i] - step, w[i] * (1.0 + step),
                              w[i] / (1.0 + step)}) {
            if (!(cand > 1e-6)) continue;
            auto trial = w;
            trial[i] = cand;
            const double val = rank_objective(c, profiles, trial, welfare);
            if (val > cur) {
              cur = val;
              w = trial;
              improved = true;
            }
          }
        }
      }
    }
    if (cur > best_val) {
      best_val = cur;
      best = w;
    }
  }
  return best;
}

// Closed forms for the two-bidder, two-slot rank mechanism with standard
// uniform values and ranking scores (v1, alpha * v2). A and B are the two
// click-rate drops between slots.
inline double two_bidder_rank_revenue(const CtrMatrix& c, double alpha) {
  if (c.bidders() != 2 || c.slots() != 2)
    throw std::invalid_argument("two_bidder_rank_revenue: need a 2x2 instance");
  if (!(alpha > 0.0)) throw std::invalid_argument("two_bidder_rank_revenue: alpha > 0");
  const double A = c.at(0, 0) - c.at(0, 1), B = c.at(1, 0) - c.at(1, 1);
  if (alpha >= 1.0)
    return A / (6.0 * alpha) + B * (1.0 / (2.0 * alpha) - 1.0 / (3.0 * alpha * alpha));
  return A * (alpha / 2.0 - alpha * alpha / 3.0) + B * alpha / 6.0;
}

inline double two_bidder_rank_welfare(const CtrMatrix& c, double alpha) {
  if (c.bidders() != 2 || c.slots() != 2)
    throw std::invalid_argument("two_bidder_rank_welfare: need a 2x2 instance");
  if (!(alpha > 0.0)) throw std::invalid_argument("two_bidder_rank_welfare: alpha > 0");
  const double A = c.at(0, 0) - c.at(0, 1), B = c.at(1, 0) - c.at(1, 1);
  if (alpha >= 1.0)
    return A / (3.0 * alpha) - B / (6.0 * alpha * alpha) + (c.at(1, 0) + c.at(0, 1)) / 2.0;
  return B * alpha / 3.0 - A * alpha * alpha / 6.0 + (c.at(1, 1) + c.at(0, 0)) / 2.0;
}

inline double two_bidder_revenue_best_alpha(const CtrMatrix& c) {
  if (c.bidders() != 2 || c.slots() != 2)
    throw std::invalid_argument("two_bidder_revenue_best_alpha: need a 2x2 instance");
  const double A = c.at(0, 0) - c.at(0, 1), B = c.at(1, 0) - c.at(1, 1);
  if (A >= B) return (3.0 * A + B) / (4.0 * A);
  return 4.0 * B / (A + 3.0 * B);
}

inline double two_bidder_welfare_best_alpha(const CtrMatrix& c) {
  if (c.bidders() != 2 || c.slots() != 2)
    throw std::invalid_argument("two_bidder_welfare_best_alpha: need a 2x2 instance");
  const double A = c.at(0, 0) - c.at(0, 1), B = c.at(1, 0) - c.at(1, 1);
  return B / A;
}

// Revenue of one value draw under the same parametrization; averaging this
// over draws reproduces two_bidder_rank_revenue.
inline double two_bidder_rank_revenue_sample(const CtrMatrix& c, double alpha,
                                             double v1, double v2) {
  const double A = c.at(0, 0) - c.at(0, 1), B = c.at(1, 0) - c.at(1, 1);
  return v1 >= alpha * v2 ? A * alpha * v2 : B * v1 / alpha;
}

}  // namespace adslot
