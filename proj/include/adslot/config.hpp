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

// Experiment configuration: JSON in, a fully resolved plan out.  Needs the
// vendored single-header nlohmann json on the include path.

#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "adslot/csv.hpp"
#include "adslot/priors.hpp"
#include "adslot/types.hpp"

namespace adslot {

// Depth draws are uniform on {lo, ..., hi} slots.
struct SlotPriorSpec {
  long long lo = 1;
  long long hi = 1;
};

struct ExperimentConfig {
  // 1x1 placeholder; CtrMatrix has no empty state.
  CtrMatrix ctr = CtrMatrix::from_nested({{1.0}});
  // One prior per bidder.  A single spec in the JSON is broadcast to all.
  std::vector<std::shared_ptr<const Prior>> priors;
  std::optional<SlotPriorSpec> slot_prior;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> mechanisms;
  // false: revenue objective; true: efficiency.  Decides which score maps the
  // "optimal" mechanism and the rank-vector search use.
  bool welfare_objective = false;
  std::string out;
  // Profiles 0..training_samples-1 of the same stream feed rb:optimized.
  std::size_t training_samples = 2000;
  unsigned threads = 0;  // 0: one worker per hardware thread
};

inline std::shared_ptr<const Prior> prior_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("prior spec: expected an object with \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform")
    return std::make_shared<UniformPrior>(j.at("lo").get<double>(),
                                          j.at("hi").get<double>());
  if (kind == "exponential")
    return std::make_shared<ExponentialPrior>(j.at("rate").get<double>(),
                                              j.value("shift", 0.0));
  if (kind == "gamma")
    return std::make_shared<GammaPrior>(j.at("shape").get<double>(),
                                        j.at("scale").get<double>());
  if (kind == "empirical")
    return std::make_shared<EmpiricalPrior>(
        j.at("values").get<std::vector<double>>());
  if (kind == "mixture") {
    std::vector<std::shared_ptr<const Prior>> parts;
    for (const auto& part : j.at("components")) parts.push_back(prior_from_json(part));
    return std::make_shared<MixturePrior>(
        std::move(parts), j.at("weights").get<std::vector<double>>());
  }
  throw std::invalid_argument("prior spec: unknown kind \"" + kind + "\"");
}

inline CtrMatrix ctr_from_json(const nlohmann::json& j) {
  if (j.is_object() && j.contains("csv"))
    return CtrMatrix::from_nested(csv::read_rows_file(j.at("csv").get<std::string>()));
  if (j.is_object() && j.contains("matrix"))
    return CtrMatrix::from_nested(
        j.at("matrix").get<std::vector<std::vector<double>>>());
  if (j.is_array())
    return CtrMatrix::from_nested(j.get<std::vector<std::vector<double>>>());
  throw std::invalid_argument("ctr spec: expected {\"csv\": path}, {\"matrix\": rows} or rows");
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.ctr = ctr_from_json(j.at("ctr"));
  const std::size_t n = cfg.ctr.bidders();

  const auto& pj = j.at("priors");
  if (pj.is_array()) {
    if (pj.size() != n)
      throw std::invalid_argument("priors: need one spec per bidder");
    for (const auto& spec : pj) cfg.priors.push_back(prior_from_json(spec));
  } else {
    auto p = prior_from_json(pj);
    cfg.priors.assign(n, p);
  }

  if (j.contains("slot_prior")) {
    const auto& sj = j.at("slot_prior");
    if (sj.at("kind").get<std::string>() != "uniform_int")
      throw std::invalid_argument("slot_prior: only uniform_int is supported");
    SlotPriorSpec sp;
    sp.lo = sj.at("lo").get<long long>();
    sp.hi = sj.at("hi").get<long long>();
    if (sp.lo < 1 || sp.hi < sp.lo ||
        sp.hi > static_cast<long long>(cfg.ctr.slots()))
      throw std::invalid_argument("slot_prior: need 1 <= lo <= hi <= slots");
    cfg.slot_prior = sp;
  }

  cfg.samples = j.value("samples", std::size_t{1});
  if (cfg.samples < 1) throw std::invalid_argument("samples: need at least 1");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.mechanisms = j.at("mechanisms").get<std::vector<std::string>>();
  if (cfg.mechanisms.empty())
    throw std::invalid_argument("mechanisms: need at least one");

  const std::string obj = j.value("objective", std::string("revenue"));
  if (obj == "revenue")
    cfg.welfare_objective = false;
  else if (obj == "efficiency")
    cfg.welfare_objective = true;
  else
    throw std::invalid_argument("objective: expected revenue or efficiency");

  cfg.out = j.value("out", std::string());
  cfg.training_samples = j.value("training_samples", std::size_t{2000});
  cfg.threads = j.value("threads", 0u);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return parse_experiment_config(j);
}

}  // namespace adslot
