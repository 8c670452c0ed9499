#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "adslot/audit.hpp"
#include "adslot/priors.hpp"
#include "adslot/rank.hpp"
#include "adslot/rng.hpp"
#include "adslot/separable.hpp"
#include "adslot/slotted.hpp"
#include "adslot/thresholds.hpp"

using namespace adslot;

namespace {

CtrMatrix random_ctr(Substream& rng, std::size_t n, std::size_t m, double top = 100.0) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    double cur = rng.uniform(5.0, top);
    for (std::size_t j = 0; j < m; ++j) {
      rows[i][j] = cur;
      cur *= rng.uniform(0.2, 0.95);
    }
  }
  return CtrMatrix::from_nested(rows);
}

ProfileMechanism score_mech(const CtrMatrix& c, const std::vector<ScoreMap>& maps) {
  return [&c, maps](const std::vector<double>& bids) {
    auto out = score_mechanism_outcome(c, bids, maps);
    ProfileOutcome po;
    po.clicks.assign(bids.size(), 0.0);
    po.payment = out.total_charge;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      const int j = out.matching.slot_of(static_cast<int>(i));
      if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
    }
    return po;
  };
}

ProfileMechanism greedy_mech(const CtrMatrix& c, const std::vector<ScoreMap>& maps) {
  return [&c, maps](const std::vector<double>& bids) {
    std::vector<double> z(bids.size());
    for (std::size_t i = 0; i < bids.size(); ++i) z[i] = maps[i].forward(bids[i]);
    auto out = greedy_rank_outcome(c, z, &maps);
    ProfileOutcome po;
    po.clicks.assign(bids.size(), 0.0);
    po.payment = out.total_charge;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      const int j = out.matching.slot_of(static_cast<int>(i));
      if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
    }
    return po;
  };
}

// Value thresholds nudged both ways, as extra audit probes.
std::vector<std::vector<double>> threshold_probes(const CtrMatrix& c,
                                                  const std::vector<double>& bids,
                                                  const std::vector<ScoreMap>& maps) {
  std::vector<double> z(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) z[i] = maps[i].forward(bids[i]);
  std::vector<std::vector<double>> probes(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    auto lam = score_thresholds(c, i, z);
    for (double l : lam) {
      if (l == kInf) continue;
      const double av = maps[i].inverse(l);
      if (!std::isfinite(av)) continue;
      probes[i].push_back(std::max(0.0, av - 1e-6));
      probes[i].push_back(av + 1e-6);
    }
  }
  return probes;
}

}  // namespace

TEST_CASE("curved pair mechanism: fixture allocation and charges") {
  // Rival difference 1.0 puts the clearing bar at 1.0^1.5 = 1 and the top
  // charge at half of it.
  auto out = curved_pair_outcome({2.0, 0.5}, {1.44, 0.44}, 0.5);
  REQUIRE(out.slot == std::array<int, 2>{0, 1});
  REQUIRE(out.charge[0] == Catch::Approx(0.5).epsilon(1e-12));

  auto flip = curved_pair_outcome({1.0, 0.6}, {1.44, 0.44}, 0.5);
  REQUIRE(flip.slot == std::array<int, 2>{1, 0});
  REQUIRE(flip.charge[0] == Catch::Approx(-0.5).epsilon(1e-12));
  // Loser of the top slot pays along the inverse curve: 0.4^(2/3) / 2.
  REQUIRE(flip.charge[1] == Catch::Approx(0.5 * std::pow(0.4, 2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("curved pair mechanism is incentive compatible in both report dimensions") {
  Substream rng(20260822u, 40);
  for (int rep = 0; rep < 100; ++rep) {
    const double g = rng.uniform(0.1, 1.5);
    std::array<double, 2> v0{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    std::array<double, 2> v1{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
    auto truth = curved_pair_outcome(v0, v1, g);
    const double u0_truth = v0[static_cast<std::size_t>(truth.slot[0])] - truth.charge[0];
    const double u1_truth = v1[static_cast<std::size_t>(truth.slot[1])] - truth.charge[1];
    // Misreporting moves only the reporter's difference, so sweep it wide.
    for (int k = -21; k <= 21; ++k) {
      const double d = k == 0 ? 0.0 : (k > 0 ? 1.0 : -1.0) * std::pow(2.0, 0.5 * (std::abs(k) - 11));
      auto dev0 = curved_pair_outcome({d > 0 ? d : 0.0, d > 0 ? 0.0 : -d}, v1, g);
      const double u0 = v0[static_cast<std::size_t>(dev0.slot[0])] - dev0.charge[0];
      REQUIRE(u0 <= u0_truth + 1e-9);
      auto dev1 = curved_pair_outcome(v0, {d > 0 ? d : 0.0, d > 0 ? 0.0 : -d}, g);
      const double u1 = v1[static_cast<std::size_t>(dev1.slot[1])] - dev1.charge[1];
      REQUIRE(u1 <= u1_truth + 1e-9);
    }
  }
}

TEST_CASE("curved charges certify non-affine pricing; affine control stays flat") {
  auto price_curve = [](double rival_diff) {
    // Bidder 0 far ahead, so it holds the top slot across the sweep.
    auto out = curved_pair_outcome({10.0, 0.0}, {rival_diff, 0.0}, 0.5);
    REQUIRE(out.slot[0] == 0);
    return out.charge[0];
  };
  const double gap = midpoint_linearity_gap(price_curve, {0.25, 0.5, 1.0});
  REQUIRE(gap > 0.01);
  REQUIRE(gap == Catch::Approx(0.03419).margin(5e-4));

  const double flat = midpoint_linearity_gap([](double x) { return 0.3 * x + 0.1; },
                                             {0.25, 0.5, 1.0});
  REQUIRE(flat <= 1e-12);
}

TEST_CASE("first-price strawman fails the deviation audit replayably") {
  auto c = CtrMatrix::from_nested({{50, 10}, {50, 40}});
  ProfileMechanism first_price = [&c](const std::vector<double>& bids) {
    WeightMatrix W = WeightMatrix::from_scores(c, bids);
    auto r = max_weight_matching(W);
    ProfileOutcome po;
    po.clicks.assign(bids.size(), 0.0);
    po.payment.assign(bids.size(), 0.0);
    for (std::size_t i = 0; i < bids.size(); ++i) {
      const int j = r.matching.slot_of(static_cast<int>(i));
      if (j < 0) continue;
      po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
      po.payment[i] = bids[i] * po.clicks[i];
    }
    return po;
  };

  auto rep = audit_ic(first_price, {0.6, 0.5});
  REQUIRE_FALSE(rep.passed(1e-9));
  REQUIRE(rep.max_gain > 1e-3);

  // The recorded violation replays: rerunning the mechanism at the deviant
  // report reproduces the same deviant utility.
  auto bids = std::vector<double>{0.6, 0.5};
  const double v = bids[rep.worst.bidder];
  bids[rep.worst.bidder] = rep.worst.report;
  auto again = first_price(bids);
  REQUIRE(v * again.clicks[rep.worst.bidder] - again.payment[rep.worst.bidder] ==
          Catch::Approx(rep.worst.deviant_utility).margin(1e-12));
}

TEST_CASE("score maximizers pass the deviation audit") {
  Substream rng(20260822u, 41);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 2);
    const std::size_t m = 2 + (n > 2 ? rng.uniform_int(0, 1) : 0);
    auto c = random_ctr(rng, n, m);
    std::vector<double> v(n);

    std::vector<ScoreMap> ident(n, identity_score_map());
    for (auto& x : v) x = rng.uniform(0.0, 2.0);
    auto probes = threshold_probes(c, v, ident);
    REQUIRE(audit_ic(score_mech(c, ident), v, probes).passed(1e-9));

    std::vector<ScoreMap> reserve;
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = rng.uniform(0.5, 2.0);
      reserve.push_back(revenue_score_map(std::make_shared<UniformPrior>(0.0, hi)));
      v[i] = rng.uniform(0.0, hi);
    }
    probes = threshold_probes(c, v, reserve);
    REQUIRE(audit_ic(score_mech(c, reserve), v, probes).passed(1e-9));
  }
}

TEST_CASE("score maximizer passes the audit under a numeric-inverse transform") {
  Substream rng(20260822u, 42);
  auto prior = std::make_shared<GammaPrior>(5.0, 1.0);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 1);
    auto c = random_ctr(rng, n, 2, 20.0);
    std::vector<ScoreMap> maps(n, revenue_score_map(prior));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.gamma(5.0, 1.0);
    REQUIRE(audit_ic(score_mech(c, maps), v).passed(1e-9));
  }
}

TEST_CASE("greedy ranking passes the deviation audit in both score spaces") {
  Substream rng(20260822u, 43);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 2);
    const std::size_t m = 2 + (n > 2 ? rng.uniform_int(0, 1) : 0);
    auto c = random_ctr(rng, n, m);
    std::vector<double> v(n);

    std::vector<ScoreMap> ident(n, identity_score_map());
    for (auto& x : v) x = rng.uniform(0.0, 2.0);
    REQUIRE(audit_ic(greedy_mech(c, ident), v).passed(1e-9));

    std::vector<ScoreMap> reserve;
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = rng.uniform(0.5, 2.0);
      reserve.push_back(revenue_score_map(std::make_shared<UniformPrior>(0.0, hi)));
      v[i] = rng.uniform(0.0, hi);
    }
    REQUIRE(audit_ic(greedy_mech(c, reserve), v).passed(1e-9));
  }
}

TEST_CASE("weighted-bid ranking passes the deviation audit") {
  Substream rng(20260822u, 44);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 3);
    const std::size_t m = 2 + (n > 2 ? rng.uniform_int(0, 1) : 0);
    auto c = random_ctr(rng, n, m);
    std::vector<double> w(n), v(n);
    for (auto& x : w) x = rng.uniform(0.2, 3.0);
    for (auto& x : v) x = rng.uniform(0.0, 2.0);
    ProfileMechanism rb = [&c, w](const std::vector<double>& bids) {
      auto out = rank_by_weighted_bid(c, bids, w);
      ProfileOutcome po;
      po.clicks.assign(bids.size(), 0.0);
      po.payment = out.total_charge;
      for (std::size_t i = 0; i < bids.size(); ++i) {
        const int j = out.matching.slot_of(static_cast<int>(i));
        if (j >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(j));
      }
      return po;
    };
    REQUIRE(audit_ic(rb, v).passed(1e-9));
  }
}

TEST_CASE("factored-rate score mechanism passes the deviation audit") {
  Substream rng(20260822u, 45);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 2);
    const std::size_t m = 2;
    std::vector<double> phi(n), mu(m);
    for (auto& f : phi) f = rng.uniform(0.2, 3.0);
    mu[0] = rng.uniform(5.0, 50.0);
    mu[1] = mu[0] * rng.uniform(0.2, 0.95);
    SeparableCtr sep(phi, mu);
    std::vector<ScoreMap> maps;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = rng.uniform(0.5, 2.0);
      maps.push_back(revenue_score_map(std::make_shared<UniformPrior>(0.0, hi)));
      v[i] = rng.uniform(0.0, hi);
    }
    ProfileMechanism mech = [&sep, maps](const std::vector<double>& bids) {
      auto out = separable_optimal_outcome(sep, bids, maps);
      ProfileOutcome po;
      po.clicks.assign(bids.size(), 0.0);
      po.payment = out.total_charge;
      for (std::size_t i = 0; i < bids.size(); ++i) {
        const int j = out.matching.slot_of(static_cast<int>(i));
        if (j >= 0) po.clicks[i] = sep.at(i, static_cast<std::size_t>(j));
      }
      return po;
    };
    REQUIRE(audit_ic(mech, v).passed(1e-9));
  }
}

TEST_CASE("depth-capped mechanisms pass the depth-report audit") {
  Substream rng(20260822u, 46);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 2);
    const std::size_t m = 2 + (n > 2 ? rng.uniform_int(0, 1) : 0);
    auto c = random_ctr(rng, n, m);
    std::vector<ScoreMap> maps;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = rng.uniform(0.5, 2.0);
      maps.push_back(revenue_score_map(std::make_shared<UniformPrior>(0.0, hi)));
      v[i] = rng.uniform(0.0, hi);
    }
    std::vector<std::size_t> caps(n);
    for (auto& k : caps)
      k = 1 + static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(m) - 1));

    SlottedProfileMechanism pointwise = [&](const std::vector<double>& bids,
                                            const std::vector<std::size_t>& kk) {
      auto out = slotted_pointwise_outcome(c, bids, maps, kk);
      SlottedProfileOutcome po;
      po.slot.assign(bids.size(), -1);
      po.clicks.assign(bids.size(), 0.0);
      po.transfer = out.transfer;
      for (std::size_t i = 0; i < bids.size(); ++i) {
        po.slot[i] = out.matching.slot_of(static_cast<int>(i));
        if (po.slot[i] >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(po.slot[i]));
      }
      return po;
    };
    REQUIRE(audit_self_selection(pointwise, v, caps).passed(1e-9));

    SlottedProfileMechanism greedy = [&](const std::vector<double>& bids,
                                         const std::vector<std::size_t>& kk) {
      auto out = slotted_greedy_outcome(c, bids, maps, kk);
      SlottedProfileOutcome po;
      po.slot.assign(bids.size(), -1);
      po.clicks.assign(bids.size(), 0.0);
      po.transfer = out.transfer;
      for (std::size_t i = 0; i < bids.size(); ++i) {
        po.slot[i] = out.matching.slot_of(static_cast<int>(i));
        if (po.slot[i] >= 0) po.clicks[i] = c.at(i, static_cast<std::size_t>(po.slot[i]));
      }
      return po;
    };
    REQUIRE(audit_self_selection(greedy, v, caps).passed(1e-9));
  }
}
