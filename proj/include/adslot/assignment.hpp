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
#include <stdexcept>
#include <vector>

#include "adslot/types.hpp"

namespace adslot {

struct MatchResult {
  Matching matching;
  double total = 0.0;
};

namespace detail {

// Sum of matched weights in ascending slot order. All optimality comparisons
// go through this one accumulation order so that equal assignments produce
// bit-identical totals.
inline double cover_total(const WeightMatrix& W, const std::vector<int>& col_to_row) {
  double t = 0.0;
  for (std::size_t j = 0; j < W.slots; ++j)
    if (col_to_row[j] >= 0) t += W.at(static_cast<std::size_t>(col_to_row[j]), j);
  return t;
}

// Kuhn's augmenting-path matching, feasibility only.
inline bool kuhn_try(const WeightMatrix& W, const std::vector<char>& row_banned,
                     int col, std::vector<char>& visited,
                     std::vector<int>& row_match) {
  for (std::size_t i = 0; i < W.bidders; ++i) {
    if (row_banned[i] || visited[i] || !W.ok(i, static_cast<std::size_t>(col)))
      continue;
    visited[i] = 1;
    if (row_match[i] < 0 ||
        kuhn_try(W, row_banned, row_match[i], visited, row_match)) {
      row_match[i] = col;
      return true;
    }
  }
  return false;
}

inline bool cover_feasible(const WeightMatrix& W, const std::vector<int>& cols,
                           const std::vector<char>& row_banned) {
  std::vector<int> row_match(W.bidders, -1);
  std::vector<char> visited(W.bidders);
  for (int j : cols) {
    std::fill(visited.begin(), visited.end(), 0);
    if (!kuhn_try(W, row_banned, j, visited, row_match)) return false;
  }
  return true;
}

// Slots that will actually be covered: all non-banned slots, dropping the
// worst (highest-index) ones until a full cover exists. Slots are ordered
// best-first, so an instance short on bidders keeps the most valuable slots.
inline std::vector<int> coverage_cols(const WeightMatrix& W,
                                      const std::vector<char>& row_banned,
                                      const std::vector<char>& col_banned) {
  std::vector<int> cols;
  for (std::size_t j = 0; j < W.slots; ++j)
    if (!col_banned[j]) cols.push_back(static_cast<int>(j));
  std::size_t avail_rows = 0;
  for (std::size_t i = 0; i < W.bidders; ++i) avail_rows += !row_banned[i];
  while (cols.size() > avail_rows) cols.pop_back();
  if (W.allowed.empty()) return cols;
  while (!cols.empty() && !cover_feasible(W, cols, row_banned)) cols.pop_back();
  return cols;
}

// Successive shortest augmenting paths with Bellman-Ford relaxation (weights
// may be negative). Covers exactly `cols`; returns false when no full cover
// exists. Exact: every intermediate matching is optimal for its cardinality.
inline bool solve_cover(const WeightMatrix& W, const std::vector<int>& cols,
                        const std::vector<char>& row_banned,
                        std::vector<int>& col_to_row) {
  const std::size_t n = W.bidders;
  col_to_row.assign(W.slots, -1);
  thread_local std::vector<double> dist;
  thread_local std::vector<int> pre_col, row_match;
  dist.assign(n, kInf);
  pre_col.assign(n, -1);
  row_match.assign(n, -1);

  for (int j0 : cols) {
    // dist[i]: cheapest alternating path from j0 ending at row i.
    for (std::size_t i = 0; i < n; ++i) {
      pre_col[i] = -1;
      if (row_banned[i] || !W.ok(i, static_cast<std::size_t>(j0))) {
        dist[i] = kInf;
      } else {
        dist[i] = -W.at(i, static_cast<std::size_t>(j0));
        pre_col[i] = j0;
      }
    }
    bool changed = true;
    for (std::size_t pass = 0; pass < n + 1 && changed; ++pass) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] == kInf || row_match[i] < 0) continue;
        const std::size_t j = static_cast<std::size_t>(row_match[i]);
        const double base = dist[i] + W.at(i, j);
        for (std::size_t i2 = 0; i2 < n; ++i2) {
          if (i2 == i || row_banned[i2] || !W.ok(i2, j)) continue;
          double nd = base - W.at(i2, j);
          if (nd < dist[i2]) {
            dist[i2] = nd;
            pre_col[i2] = static_cast<int>(j);
            changed = true;
          }
        }
      }
    }
    int best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (row_match[i] >= 0 || dist[i] == kInf) continue;
      if (best < 0 || dist[i] < dist[static_cast<std::size_t>(best)])
        best = static_cast<int>(i);
    }
    if (best < 0) return false;
    // Augment along recorded predecessor columns back to j0.
    int cur = best;
    for (;;) {
      int j = pre_col[static_cast<std::size_t>(cur)];
      int displaced = col_to_row[static_cast<std::size_t>(j)];
      col_to_row[static_cast<std::size_t>(j)] = cur;
      row_match[static_cast<std::size_t>(cur)] = j;
      if (j == j0) break;
      cur = displaced;
    }
  }
  return true;
}

inline Matching to_matching(const WeightMatrix& W, const std::vector<int>& col_to_row) {
  Matching x(W.bidders, W.slots);
  x.slot_to_bidder = col_to_row;
  return x;
}

}  // namespace detail

// Weight of a given matching, accumulated in ascending slot order.
inline double matching_weight(const WeightMatrix& W, const Matching& x) {
  if (x.slot_to_bidder.size() != W.slots)
    throw std::invalid_argument("matching_weight: dimension mismatch");
  return detail::cover_total(W, x.slot_to_bidder);
}

// Maximum-weight assignment covering as many slots as the instance allows
// (all of them when bidders >= slots and the mask permits; otherwise the
// worst slots are dropped). Any optimal matching may be returned; ties are
// resolved by whatever augmenting order the solver took. Use
// max_weight_matching for the deterministic tie-break.
inline MatchResult max_weight_matching_plain(const WeightMatrix& W) {
  W.validate();
  std::vector<char> row_banned(W.bidders, 0), col_banned(W.slots, 0);
  auto cols = detail::coverage_cols(W, row_banned, col_banned);
  std::vector<int> col_to_row;
  if (!detail::solve_cover(W, cols, row_banned, col_to_row))
    throw std::logic_error("max_weight_matching: cover infeasible");
  return {detail::to_matching(W, col_to_row), detail::cover_total(W, col_to_row)};
}

// Deterministic variant: among all maximum-weight matchings, returns the one
// whose slot-to-bidder vector is lexicographically smallest (slot 0's bidder
// index first, then slot 1's, ...). Implemented by fixing slots one at a time
// and accepting the smallest bidder that still attains the optimum exactly.
inline MatchResult max_weight_matching(const WeightMatrix& W) {
  W.validate();
  std::vector<char> row_banned(W.bidders, 0), col_banned(W.slots, 0);
  const auto cols = detail::coverage_cols(W, row_banned, col_banned);
  std::vector<int> ref;
  if (!detail::solve_cover(W, cols, row_banned, ref))
    throw std::logic_error("max_weight_matching: cover infeasible");
  const double best = detail::cover_total(W, ref);

  std::vector<char> fixed_row(W.bidders, 0), sub_banned(W.bidders, 0);
  std::vector<int> sub, cand;
  for (std::size_t idx = 0; idx < cols.size(); ++idx) {
    const int j = cols[idx];
    int cur = ref[static_cast<std::size_t>(j)];
    for (int i = 0; i < cur; ++i) {
      if (fixed_row[static_cast<std::size_t>(i)] ||
          !W.ok(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
        continue;
      sub_banned = fixed_row;
      sub_banned[static_cast<std::size_t>(i)] = 1;
      std::vector<int> rest(cols.begin() + static_cast<long>(idx) + 1, cols.end());
      if (!detail::solve_cover(W, rest, sub_banned, sub)) continue;
      cand = ref;
      for (std::size_t jj = 0; jj < W.slots; ++jj)
        if (sub[jj] >= 0) cand[jj] = sub[jj];
      cand[static_cast<std::size_t>(j)] = i;
      if (detail::cover_total(W, cand) == best) {
        ref = cand;
        cur = i;
        break;
      }
    }
    fixed_row[static_cast<std::size_t>(cur)] = 1;
  }
  return {detail::to_matching(W, ref), best};
}

// Optimal total weight when one bidder is removed. Slots that can no longer
// be covered are dropped worst-first.
inline double surplus_excluding_bidder(const WeightMatrix& W, std::size_t bidder) {
  W.validate();
  if (bidder >= W.bidders)
    throw std::invalid_argument("surplus_excluding_bidder: bidder out of range");
  std::vector<char> row_banned(W.bidders, 0), col_banned(W.slots, 0);
  row_banned[bidder] = 1;
  auto cols = detail::coverage_cols(W, row_banned, col_banned);
  std::vector<int> col_to_row;
  if (!detail::solve_cover(W, cols, row_banned, col_to_row))
    throw std::logic_error("surplus_excluding_bidder: cover infeasible");
  return detail::cover_total(W, col_to_row);
}

// Optimal total weight over everyone else when a bidder-slot pair is pinned:
// the bidder and the slot leave the instance and only the others' weight is
// counted.
inline double surplus_excluding_pair(const WeightMatrix& W, std::size_t bidder,
                                     std::size_t slot) {
  W.validate();
  if (bidder >= W.bidders || slot >= W.slots)
    throw std::invalid_argument("surplus_excluding_pair: index out of range");
  std::vector<char> row_banned(W.bidders, 0), col_banned(W.slots, 0);
  row_banned[bidder] = 1;
  col_banned[slot] = 1;
  auto cols = detail::coverage_cols(W, row_banned, col_banned);
  std::vector<int> col_to_row;
  if (!detail::solve_cover(W, cols, row_banned, col_to_row))
    throw std::logic_error("surplus_excluding_pair: cover infeasible");
  return detail::cover_total(W, col_to_row);
}

// Exhaustive reference. Enumerates injective slot-to-bidder maps in
// lexicographic order, keeping strict improvements only, so ties resolve to
// the lexicographically smallest map; totals accumulate in the same ascending
// slot order as the solver. Guarded to small instances.
inline MatchResult brute_force_matching(const WeightMatrix& W) {
  W.validate();
  if (W.bidders > 8 || W.slots > 8)
    throw std::invalid_argument("brute_force_matching: instance too large");
  std::vector<char> row_banned(W.bidders, 0), col_banned(W.slots, 0);
  const auto cols = detail::coverage_cols(W, row_banned, col_banned);

  std::vector<int> cur(W.slots, -1), best_map(W.slots, -1);
  double best = -kInf;
  bool found = false;
  std::vector<char> used(W.bidders, 0);
  auto rec = [&](auto&& self, std::size_t k, double acc) -> void {
    if (k == cols.size()) {
      if (!found || acc > best) {
        found = true;
        best = acc;
        best_map = cur;
      }
      return;
    }
    const std::size_t j = static_cast<std::size_t>(cols[k]);
    for (std::size_t i = 0; i < W.bidders; ++i) {
      if (used[i] || !W.ok(i, j)) continue;
      used[i] = 1;
      cur[j] = static_cast<int>(i);
      self(self, k + 1, acc + W.at(i, j));
      cur[j] = -1;
      used[i] = 0;
    }
  };
  rec(rec, 0, 0.0);
  if (!found && !cols.empty())
    throw std::logic_error("brute_force_matching: cover infeasible");
  if (!found) return {detail::to_matching(W, cur), 0.0};
  return {detail::to_matching(W, best_map), best};
}

}  // namespace adslot
