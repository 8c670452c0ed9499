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

// Monte Carlo comparison runner.  Every configured mechanism is evaluated on
// the same sample profiles (common random numbers): profile s is drawn from
// substream s of the master seed, values first, then depth caps.  Aggregation
// is an indexed reduction over fixed-size chunks, so results are bit-identical
// for any worker count.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adslot/config.hpp"
#include "adslot/csv.hpp"
#include "adslot/priors.hpp"
#include "adslot/rank.hpp"
#include "adslot/rng.hpp"
#include "adslot/slotted.hpp"
#include "adslot/thresholds.hpp"
#include "adslot/types.hpp"
#include "adslot/vcg.hpp"

namespace adslot {

struct Profile {
  std::vector<double> v;
  std::vector<std::size_t> k;  // empty when no slot prior is configured
};

inline Profile draw_profile(const ExperimentConfig& cfg, std::size_t index) {
  Substream rng(cfg.seed, static_cast<std::uint64_t>(index));
  Profile p;
  p.v.resize(cfg.priors.size());
  for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = cfg.priors[i]->sample(rng);
  if (cfg.slot_prior) {
    p.k.resize(p.v.size());
    for (std::size_t i = 0; i < p.k.size(); ++i)
      p.k[i] = static_cast<std::size_t>(
          rng.uniform_int(cfg.slot_prior->lo, cfg.slot_prior->hi));
  }
  return p;
}

struct MetricRow {
  std::string mechanism;
  std::string metric;
  // 0 is the scalar or the across-entities total; per-bidder and per-slot
  // rows are 1-based.
  long long index = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct ResultsTable {
  std::size_t samples = 0;
  std::vector<MetricRow> rows;

  const MetricRow* find(const std::string& mechanism, const std::string& metric,
                        long long index = 0) const {
    for (const auto& r : rows)
      if (r.mechanism == mechanism && r.metric == metric && r.index == index)
        return &r;
    return nullptr;
  }
  double mean_of(const std::string& mechanism, const std::string& metric,
                 long long index = 0) const {
    const MetricRow* r = find(mechanism, metric, index);
    if (!r) throw std::invalid_argument("results: no row " + mechanism + "/" + metric);
    return r->mean;
  }
};

namespace detail {

// Per-sample metric values for one mechanism, in the flat layout the
// accumulator uses: revenue, efficiency, surplus 0..n, price 1..m, then for
// depth-capped runs side payments 0..n, then the revenue bound if tracked.
struct MechanismPlan {
  std::string name;
  bool slotted = false;
  bool tracks_bound = false;
  std::vector<double> rank_weights;  // recorded once, not per sample
  std::function<void(const Profile&, double* out)> eval;  // writes width() values
  std::size_t bidders = 0, slots = 0;

  std::size_t width() const {
    return 2 + (bidders + 1) + slots + (slotted ? bidders + 1 : 0) +
           (tracks_bound ? 1 : 0);
  }
};

inline void fill_common(const CtrMatrix& c, const Matching& match,
                        const std::vector<double>& v,
                        const std::vector<double>& per_click,
                        const std::vector<double>& total_charge, double* out) {
  const std::size_t n = c.bidders(), m = c.slots();
  double revenue = 0.0, efficiency = 0.0, total_surplus = 0.0;
  for (std::size_t i = 0; i < n; ++i) revenue += total_charge[i];
  double* surplus = out + 3;
  double* price = out + 3 + n;
  for (std::size_t i = 0; i < n; ++i) surplus[i] = 0.0;
  for (std::size_t j = 0; j < m; ++j) price[j] = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const int b = match.bidder_at(j);
    if (b < 0) continue;
    const std::size_t i = static_cast<std::size_t>(b);
    efficiency += c.at(i, j) * v[i];
    surplus[i] = c.at(i, j) * v[i] - total_charge[i];
    price[j] = per_click[i];
  }
  for (std::size_t i = 0; i < n; ++i) total_surplus += surplus[i];
  out[0] = revenue;
  out[1] = efficiency;
  out[2] = total_surplus;
}

inline std::vector<ScoreMap> objective_maps(const ExperimentConfig& cfg) {
  std::vector<ScoreMap> maps;
  maps.reserve(cfg.priors.size());
  for (const auto& p : cfg.priors)
    maps.push_back(cfg.welfare_objective ? identity_score_map()
                                         : revenue_score_map(p));
  return maps;
}

inline std::vector<double> resolve_rank_weights(const ExperimentConfig& cfg,
                                                const std::string& spec) {
  const CtrMatrix& c = cfg.ctr;
  const std::size_t n = c.bidders();
  if (spec == "yahoo") return std::vector<double>(n, 1.0);
  if (spec == "google") {
    if (c.at(0, 0) <= 0.0)
      throw std::invalid_argument("rb:google needs a positive top-left rate");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c.at(i, 0) / c.at(0, 0);
    return w;
  }
  if (spec == "optimized") {
    const std::size_t t = std::min(cfg.training_samples, cfg.samples);
    std::vector<std::vector<double>> train;
    train.reserve(t);
    for (std::size_t s = 0; s < t; ++s) train.push_back(draw_profile(cfg, s).v);
    return optimize_rank_vector(c, train, cfg.welfare_objective);
  }
  if (spec.rfind("w=", 0) == 0) {
    std::vector<double> w;
    std::string cur;
    for (char ch : spec.substr(2)) {
      if (ch == ',') {
        w.push_back(std::stod(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) w.push_back(std::stod(cur));
    if (w.size() != n)
      throw std::invalid_argument("rb:w= needs one weight per bidder");
    return w;
  }
  throw std::invalid_argument("rb: unknown variant \"" + spec + "\"");
}

inline MechanismPlan resolve_mechanism(const ExperimentConfig& cfg,
                                       const std::string& name) {
  const CtrMatrix& c = cfg.ctr;
  MechanismPlan plan;
  plan.name = name;
  plan.bidders = c.bidders();
  plan.slots = c.slots();

  if (name == "vcg") {
    plan.eval = [&c](const Profile& p, double* out) {
      auto r = vcg_outcome(c, p.v);
      fill_common(c, r.matching, p.v, r.per_click, r.total_charge, out);
    };
    return plan;
  }
  if (name == "optimal") {
    auto maps = std::make_shared<std::vector<ScoreMap>>(objective_maps(cfg));
    plan.eval = [&c, maps](const Profile& p, double* out) {
      auto r = score_mechanism_outcome(c, p.v, *maps);
      fill_common(c, r.matching, p.v, r.per_click, r.total_charge, out);
    };
    return plan;
  }
  if (name.rfind("rb:", 0) == 0) {
    auto w = std::make_shared<std::vector<double>>(
        resolve_rank_weights(cfg, name.substr(3)));
    plan.rank_weights = *w;
    plan.eval = [&c, w](const Profile& p, double* out) {
      auto r = rank_by_weighted_bid(c, p.v, *w);
      fill_common(c, r.matching, p.v, r.per_click, r.total_charge, out);
    };
    return plan;
  }
  if (name == "crb:values" || name == "crb:virtual") {
    const bool virt = name == "crb:virtual";
    auto maps = std::make_shared<std::vector<ScoreMap>>(objective_maps(cfg));
    plan.eval = [&c, maps, virt](const Profile& p, double* out) {
      GreedyRankOutcome r;
      if (virt) {
        std::vector<double> z(p.v.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = (*maps)[i].forward(p.v[i]);
        r = greedy_rank_outcome(c, z, maps.get());
      } else {
        r = greedy_rank_outcome(c, p.v);
      }
      fill_common(c, r.matching, p.v, r.per_click, r.total_charge, out);
    };
    return plan;
  }
  if (name == "slotted_pointwise" || name == "slotted_crb") {
    if (!cfg.slot_prior)
      throw std::invalid_argument(name + " needs a slot_prior in the config");
    plan.slotted = true;
    plan.tracks_bound = name == "slotted_pointwise";
    const bool pointwise = plan.tracks_bound;
    auto maps = std::make_shared<std::vector<ScoreMap>>(objective_maps(cfg));
    plan.eval = [&c, maps, pointwise](const Profile& p, double* out) {
      SlottedOutcome r = pointwise
                             ? slotted_pointwise_outcome(c, p.v, *maps, p.k)
                             : slotted_greedy_outcome(c, p.v, *maps, p.k);
      const std::size_t n = c.bidders(), m = c.slots();
      // Transfers, not gross charges, are the mechanism's revenue.
      fill_common(c, r.matching, p.v, r.per_click, r.transfer, out);
      double* surplus = out + 3;
      double* side = out + 2 + (n + 1) + m;
      side[0] = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        side[1 + i] = r.side_payment[i];
        side[0] += r.side_payment[i];
        // The bidder's takeaway includes the granted side payment.
        surplus[1 + i] = r.utility[i] + r.side_payment[i];
      }
      surplus[0] = 0.0;
      for (std::size_t i = 0; i < n; ++i) surplus[0] += surplus[1 + i];
      if (pointwise) {
        double gross = 0.0;
        for (std::size_t i = 0; i < n; ++i) gross += r.total_charge[i];
        out[2 + (n + 1) + m + (n + 1)] = gross;
      }
    };
    return plan;
  }
  throw std::invalid_argument("mechanism: unknown name \"" + name + "\"");
}

}  // namespace detail

inline ResultsTable run_experiment(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.ctr.bidders(), m = cfg.ctr.slots();
  std::vector<detail::MechanismPlan> plans;
  plans.reserve(cfg.mechanisms.size());
  for (const auto& name : cfg.mechanisms)
    plans.push_back(detail::resolve_mechanism(cfg, name));

  std::vector<std::size_t> offset(plans.size() + 1, 0);
  for (std::size_t p = 0; p < plans.size(); ++p)
    offset[p + 1] = offset[p] + plans[p].width();
  const std::size_t width = offset.back();

  const std::size_t kChunk = 256;
  const std::size_t chunks = (cfg.samples + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial_sum(chunks),
      partial_sq(chunks);

  std::atomic<std::size_t> next_chunk{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;

  auto worker = [&]() {
    std::vector<double> row(width);
    for (;;) {
      const std::size_t chunk = next_chunk.fetch_add(1);
      if (chunk >= chunks || failed.load()) return;
      const std::size_t lo = chunk * kChunk;
      const std::size_t hi = std::min(cfg.samples, lo + kChunk);
      std::vector<double> sum(width, 0.0), sq(width, 0.0);
      try {
        for (std::size_t s = lo; s < hi; ++s) {
          const Profile prof = draw_profile(cfg, s);
          for (std::size_t p = 0; p < plans.size(); ++p)
            plans[p].eval(prof, row.data() + offset[p]);
          for (std::size_t t = 0; t < width; ++t) {
            sum[t] += row[t];
            sq[t] += row[t] * row[t];
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(error_mu);
        error = e.what();
        failed.store(true);
        return;
      }
      partial_sum[chunk] = std::move(sum);
      partial_sq[chunk] = std::move(sq);
    }
  };

  unsigned workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error("run_experiment: " + error);

  // Chunk-indexed reduction keeps the floating-point result independent of
  // the worker count.
  std::vector<double> sum(width, 0.0), sq(width, 0.0);
  for (std::size_t chunk = 0; chunk < chunks; ++chunk)
    for (std::size_t t = 0; t < width; ++t) {
      sum[t] += partial_sum[chunk][t];
      sq[t] += partial_sq[chunk][t];
    }

  const double N = static_cast<double>(cfg.samples);
  auto mean_of = [&](std::size_t t) { return sum[t] / N; };
  auto se_of = [&](std::size_t t) {
    if (cfg.samples < 2) return 0.0;
    const double mu = sum[t] / N;
    const double var = std::max(0.0, (sq[t] - N * mu * mu) / (N - 1.0));
    return std::sqrt(var / N);
  };

  ResultsTable table;
  table.samples = cfg.samples;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const auto& plan = plans[p];
    std::size_t t = offset[p];
    auto push = [&](const std::string& metric, long long index) {
      table.rows.push_back({plan.name, metric, index, mean_of(t), se_of(t)});
      ++t;
    };
    push("revenue", 0);
    push("efficiency", 0);
    for (std::size_t i = 0; i <= n; ++i) push("surplus", static_cast<long long>(i));
    for (std::size_t j = 1; j <= m; ++j) push("price", static_cast<long long>(j));
    if (plan.slotted)
      for (std::size_t i = 0; i <= n; ++i)
        push("side_payment", static_cast<long long>(i));
    if (plan.tracks_bound) push("bound", 0);
    for (std::size_t i = 0; i < plan.rank_weights.size(); ++i)
      table.rows.push_back({plan.name, "rank_weight",
                            static_cast<long long>(i + 1),
                            plan.rank_weights[i], 0.0});
  }
  return table;
}

inline void write_results_csv(std::ostream& out, const ResultsTable& table) {
  out << "mechanism,metric,index,mean,stderr\n";
  for (const auto& r : table.rows)
    out << r.mechanism << ',' << r.metric << ',' << r.index << ','
        << csv::format_cell(r.mean) << ',' << csv::format_cell(r.se) << '\n';
}

}  // namespace adslot
