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

// Command line front end.  Exit codes: 0 success, 1 an audit found a
// violation, 2 usage or input errors.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adslot/audit.hpp"
#include "adslot/config.hpp"
#include "adslot/csv.hpp"
#include "adslot/experiment.hpp"
#include "adslot/priors.hpp"
#include "adslot/rank.hpp"
#include "adslot/rng.hpp"
#include "adslot/slotted.hpp"
#include "adslot/thresholds.hpp"
#include "adslot/vcg.hpp"

namespace {

using namespace adslot;
using nlohmann::json;

// Either a file or stdout.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> load_bids(const std::string& path, std::size_t n) {
  auto rows = csv::read_rows_file(path);
  std::vector<double> bids;
  for (const auto& row : rows)
    for (double x : row) bids.push_back(x);
  if (bids.size() != n)
    throw std::invalid_argument("bids: expected " + std::to_string(n) +
                                " values, got " + std::to_string(bids.size()));
  return bids;
}

std::vector<ScoreMap> maps_from_config(const std::string& config_path,
                                       std::size_t n, bool revenue) {
  if (config_path.empty())
    throw std::invalid_argument(
        "this mechanism needs per-bidder priors; pass --config");
  auto cfg = load_experiment_config(config_path);
  if (cfg.priors.size() != n) {
    if (cfg.priors.size() == cfg.ctr.bidders() && !cfg.priors.empty()) {
      // Config priors were written for its own ctr; broadcast only if uniform
      // across bidders.
      for (std::size_t i = 1; i < cfg.priors.size(); ++i)
        if (cfg.priors[i] != cfg.priors[0])
          throw std::invalid_argument("config priors do not match this bidder count");
      return std::vector<ScoreMap>(
          n, revenue ? revenue_score_map(cfg.priors[0]) : identity_score_map());
    }
    throw std::invalid_argument("config priors do not match this bidder count");
  }
  std::vector<ScoreMap> maps;
  for (std::size_t i = 0; i < n; ++i)
    maps.push_back(revenue ? revenue_score_map(cfg.priors[i])
                           : identity_score_map());
  return maps;
}

struct PriceArgs {
  std::string ctr_path, bids_path, mechanism = "vcg", config_path, out_path;
};

int run_price(const PriceArgs& a) {
  const CtrMatrix c = CtrMatrix::from_csv(a.ctr_path);
  const std::size_t n = c.bidders(), m = c.slots();
  const auto bids = load_bids(a.bids_path, n);

  Matching match(n, m);
  std::vector<double> per_click(n, 0.0), charge(n, 0.0);

  if (a.mechanism == "vcg") {
    auto r = vcg_outcome(c, bids);
    match = r.matching;
    per_click = r.per_click;
    charge = r.total_charge;
  } else if (a.mechanism == "optimal") {
    auto maps = maps_from_config(a.config_path, n, true);
    auto r = score_mechanism_outcome(c, bids, maps);
    match = r.matching;
    per_click = r.per_click;
    charge = r.total_charge;
  } else if (a.mechanism == "crb:values" || a.mechanism == "crb") {
    auto r = greedy_rank_outcome(c, bids);
    match = r.matching;
    per_click = r.per_click;
    charge = r.total_charge;
  } else if (a.mechanism == "crb:virtual") {
    auto maps = maps_from_config(a.config_path, n, true);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = maps[i].forward(bids[i]);
    auto r = greedy_rank_outcome(c, z, &maps);
    match = r.matching;
    per_click = r.per_click;
    charge = r.total_charge;
  } else if (a.mechanism.rfind("rb:", 0) == 0) {
    ExperimentConfig cfg;
    cfg.ctr = c;
    std::vector<double> w = detail::resolve_rank_weights(cfg, a.mechanism.substr(3));
    auto r = rank_by_weighted_bid(c, bids, w);
    match = r.matching;
    per_click = r.per_click;
    charge = r.total_charge;
  } else {
    throw std::invalid_argument("price: unknown mechanism " + a.mechanism);
  }

  OutputSink sink(a.out_path);
  auto& os = sink.stream();
  os << "bidder,slot,clicks,per_click,charge\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int j = match.slot_of(static_cast<int>(i));
    const double clicks = j >= 0 ? c.at(i, static_cast<std::size_t>(j)) : 0.0;
    os << (i + 1) << ',' << (j + 1) << ',' << csv::format_cell(clicks) << ','
       << csv::format_cell(per_click[i]) << ',' << csv::format_cell(charge[i])
       << '\n';
  }
  return 0;
}

struct ThresholdArgs {
  std::string ctr_path, bids_path, config_path, out_path;
  int bidder = 0;  // 1-based; 0 = all
};

int run_thresholds(const ThresholdArgs& a) {
  const CtrMatrix c = CtrMatrix::from_csv(a.ctr_path);
  const std::size_t n = c.bidders(), m = c.slots();
  const auto bids = load_bids(a.bids_path, n);
  std::vector<ScoreMap> maps(n, identity_score_map());
  if (!a.config_path.empty()) maps = maps_from_config(a.config_path, n, true);

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = maps[i].forward(bids[i]);

  OutputSink sink(a.out_path);
  auto& os = sink.stream();
  os << "bidder,slot,threshold\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (a.bidder > 0 && static_cast<std::size_t>(a.bidder) != i + 1) continue;
    auto row = score_thresholds(c, i, z);
    for (std::size_t j = 0; j < m; ++j) {
      const double av = row[j] == kInf ? kInf : maps[i].inverse(row[j]);
      os << (i + 1) << ',' << (j + 1) << ',' << csv::format_cell(av) << '\n';
    }
  }
  return 0;
}

struct ExperimentArgs {
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<unsigned> threads;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  if (a.samples) cfg.samples = *a.samples;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.out_path.empty()) cfg.out = a.out_path;

  ResultsTable table = run_experiment(cfg);
  OutputSink sink(cfg.out);
  write_results_csv(sink.stream(), table);
  if (!cfg.out.empty() && cfg.out != "-") {
    std::cout << "wrote " << table.rows.size() << " rows for "
              << cfg.mechanisms.size() << " mechanisms ("
              << table.samples << " samples) to " << cfg.out << '\n';
    for (const auto& name : cfg.mechanisms)
      std::cout << "  " << name << ": revenue " << table.mean_of(name, "revenue")
                << ", efficiency " << table.mean_of(name, "efficiency") << '\n';
  }
  return 0;
}

struct AuditArgs {
  std::string mechanism = "crb", out_path;
  std::uint64_t seed = 1;
  int trials = 100;
};

CtrMatrix audit_ctr(Substream& rng, std::size_t n, std::size_t m) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    double cur = rng.uniform(5.0, 80.0);
    for (std::size_t j = 0; j < m; ++j) {
      rows[i][j] = cur;
      cur *= rng.uniform(0.2, 0.95);
    }
  }
  return CtrMatrix::from_nested(rows);
}

int run_audit(const AuditArgs& a) {
  json report;
  report["mechanism"] = a.mechanism;
  report["trials"] = a.trials;
  double max_gain = -kInf;
  json worst;
  const bool slotted = a.mechanism == "slotted_pointwise" || a.mechanism == "slotted_crb";

  for (int t = 0; t < a.trials; ++t) {
    Substream rng(a.seed, static_cast<std::uint64_t>(t));
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 2));
    const std::size_t m = 2 + (n > 2 ? static_cast<std::size_t>(rng.uniform_int(0, 1)) : 0);
    auto c = audit_ctr(rng, n, m);
    std::vector<ScoreMap> maps;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = rng.uniform(0.5, 2.0);
      maps.push_back(revenue_score_map(std::make_shared<UniformPrior>(0.0, hi)));
      v[i] = rng.uniform(0.0, hi);
    }

    double gain = -kInf;
    json record;
    if (slotted) {
      std::vector<std::size_t> caps(n);
      for (auto& k : caps)
        k = 1 + static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<long long>(m) - 1));
      const bool pointwise = a.mechanism == "slotted_pointwise";
      SlottedProfileMechanism mech = [&](const std::vector<double>& bids,
                                         const std::vector<std::size_t>& kk) {
        SlottedOutcome out = pointwise
                                 ? slotted_pointwise_outcome(c, bids, maps, kk)
                                 : slotted_greedy_outcome(c, bids, maps, kk);
        SlottedProfileOutcome po;
        po.slot.assign(n, -1);
        po.clicks.assign(n, 0.0);
        po.transfer = out.transfer;
        for (std::size_t i = 0; i < n; ++i) {
          po.slot[i] = out.matching.slot_of(static_cast<int>(i));
          if (po.slot[i] >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(po.slot[i]));
        }
        return po;
      };
      auto rep = audit_self_selection(mech, v, caps);
      gain = rep.max_gain;
      if (gain > max_gain) {
        record["bidder"] = rep.worst.bidder;
        record["cap_report"] = rep.worst.cap_report;
        record["truthful_utility"] = rep.worst.truthful_utility;
        record["deviant_utility"] = rep.worst.deviant_utility;
      }
    } else {
      ProfileMechanism mech;
      if (a.mechanism == "vcg") {
        mech = [&](const std::vector<double>& bids) {
          auto out = vcg_outcome(c, bids);
          ProfileOutcome po;
          po.clicks.assign(n, 0.0);
          po.payment = out.total_charge;
          for (std::size_t i = 0; i < n; ++i) {
            const int j = out.matching.slot_of(static_cast<int>(i));
            if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
          }
          return po;
        };
      } else if (a.mechanism == "optimal") {
        mech = [&](const std::vector<double>& bids) {
          auto out = score_mechanism_outcome(c, bids, maps);
          ProfileOutcome po;
          po.clicks.assign(n, 0.0);
          po.payment = out.total_charge;
          for (std::size_t i = 0; i < n; ++i) {
            const int j = out.matching.slot_of(static_cast<int>(i));
            if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
          }
          return po;
        };
      } else if (a.mechanism == "rb") {
        auto w = std::make_shared<std::vector<double>>(n, 1.0);
        mech = [&, w](const std::vector<double>& bids) {
          auto out = rank_by_weighted_bid(c, bids, *w);
          ProfileOutcome po;
          po.clicks.assign(n, 0.0);
          po.payment = out.total_charge;
          for (std::size_t i = 0; i < n; ++i) {
            const int j = out.matching.slot_of(static_cast<int>(i));
            if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
          }
          return po;
        };
      } else if (a.mechanism == "crb" || a.mechanism == "crb:values" ||
                 a.mechanism == "crb:virtual") {
        const bool virt = a.mechanism == "crb:virtual";
        mech = [&, virt](const std::vector<double>& bids) {
          GreedyRankOutcome out;
          if (virt) {
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) z[i] = maps[i].forward(bids[i]);
            out = greedy_rank_outcome(c, z, &maps);
          } else {
            out = greedy_rank_outcome(c, bids);
          }
          ProfileOutcome po;
          po.clicks.assign(n, 0.0);
          po.payment = out.total_charge;
          for (std::size_t i = 0; i < n; ++i) {
            const int j = out.matching.slot_of(static_cast<int>(i));
            if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
          }
          return po;
        };
      } else if (a.mechanism == "first_price") {
        mech = [&](const std::vector<double>& bids) {
          WeightMatrix W = WeightMatrix::from_scores(c, bids);
          auto r = max_weight_matching(W);
          ProfileOutcome po;
          po.clicks.assign(n, 0.0);
          po.payment.assign(n, 0.0);
          for (std::size_t i = 0; i < n; ++i) {
            const int j = r.matching.slot_of(static_cast<int>(i));
            if (j < 0) continue;
            po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
            po.payment[i] = bids[i] * po.clicks[i];
          }
          return po;
        };
      } else {
        throw std::invalid_argument("audit: unknown mechanism " + a.mechanism);
      }
      auto rep = audit_ic(mech, v);
      gain = rep.max_gain;
      if (gain > max_gain) {
        record["bidder"] = rep.worst.bidder;
        record["report"] = rep.worst.report;
        record["truthful_utility"] = rep.worst.truthful_utility;
        record["deviant_utility"] = rep.worst.deviant_utility;
      }
    }
    if (gain > max_gain) {
      max_gain = gain;
      record["trial"] = t;
      record["values"] = v;
      std::vector<std::vector<double>> rows(n, std::vector<double>(m));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) rows[i][j] = c.at(i, j);
      record["ctr"] = rows;
      worst = std::move(record);
    }
  }

  const bool passed = max_gain <= 1e-9;
  report["max_gain"] = max_gain;
  report["passed"] = passed;
  report["worst"] = worst;
  OutputSink sink(a.out_path);
  sink.stream() << report.dump(2) << '\n';
  return passed ? 0 : 1;
}

struct RankoptArgs {
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
};

int run_rankopt(const RankoptArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  if (a.samples) cfg.samples = *a.samples;
  cfg.training_samples = cfg.samples;

  std::vector<double> w = detail::resolve_rank_weights(cfg, "optimized");
  OutputSink sink(a.out_path);
  auto& os = sink.stream();
  os << "bidder,weight\n";
  for (std::size_t i = 0; i < w.size(); ++i)
    os << (i + 1) << ',' << csv::format_cell(w[i]) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"position auction toolkit"};
  app.require_subcommand(1);

  PriceArgs price;
  auto* price_cmd = app.add_subcommand(
      "price", "evaluate one mechanism on a bid profile");
  price_cmd->add_option("--ctr", price.ctr_path, "click-rate matrix CSV")->required();
  price_cmd->add_option("--bids", price.bids_path, "bid vector CSV")->required();
  price_cmd->add_option("--mechanism", price.mechanism,
                        "vcg | optimal | rb:<variant> | crb[:values|:virtual]");
  price_cmd->add_option("--config", price.config_path,
                        "experiment config supplying priors");
  price_cmd->add_option("--out", price.out_path, "output CSV (default stdout)");

  ThresholdArgs thr;
  auto* thr_cmd = app.add_subcommand(
      "thresholds", "emit per-bidder winning thresholds for each slot");
  thr_cmd->add_option("--ctr", thr.ctr_path, "click-rate matrix CSV")->required();
  thr_cmd->add_option("--bids", thr.bids_path, "bid vector CSV")->required();
  thr_cmd->add_option("--config", thr.config_path,
                      "experiment config supplying priors");
  thr_cmd->add_option("--bidder", thr.bidder, "restrict to one bidder (1-based)");
  thr_cmd->add_option("--out", thr.out_path, "output CSV (default stdout)");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand(
      "experiment", "Monte Carlo mechanism comparison from a JSON config");
  exp_cmd->add_option("--config", exp.config_path, "JSON config path")->required();
  exp_cmd->add_option("--seed", exp.seed, "override the master seed");
  exp_cmd->add_option("--samples", exp.samples, "override the sample count");
  exp_cmd->add_option("--threads", exp.threads, "override the worker count");
  exp_cmd->add_option("--out", exp.out_path, "output CSV (default from config)");

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand(
      "audit", "search random instances for profitable misreports");
  audit_cmd->add_option("--mechanism", audit.mechanism,
                        "vcg | optimal | rb | crb[:virtual] | first_price | "
                        "slotted_pointwise | slotted_crb");
  audit_cmd->add_option("--trials", audit.trials, "instances to try")
      ->check(CLI::PositiveNumber);
  audit_cmd->add_option("--seed", audit.seed, "instance stream seed");
  audit_cmd->add_option("--out", audit.out_path, "report path (default stdout)");

  RankoptArgs ro;
  auto* ro_cmd = app.add_subcommand(
      "rankopt", "fit a rank-weight vector to sampled profiles");
  ro_cmd->add_option("--config", ro.config_path, "JSON config path")->required();
  ro_cmd->add_option("--seed", ro.seed, "override the master seed");
  ro_cmd->add_option("--samples", ro.samples, "override the sample count");
  ro_cmd->add_option("--out", ro.out_path, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (price_cmd->parsed()) return run_price(price);
    if (thr_cmd->parsed()) return run_thresholds(thr);
    if (exp_cmd->parsed()) return run_experiment_cmd(exp);
    if (audit_cmd->parsed()) return run_audit(audit);
    if (ro_cmd->parsed()) return run_rankopt(ro);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
