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
#include <memory>
#include <stdexcept>
#include <vector>

#include "adslot/rng.hpp"
#include "adslot/types.hpp"

namespace adslot {

namespace detail {

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// continued fraction for the complement otherwise.
inline double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace detail

// A value distribution together with the transforms mechanisms need from it.
// virtual_value is v - (1 - F(v)) / f(v) with two boundary conventions: -inf
// where the density vanishes but mass remains above (the point never wins),
// and v itself where no mass remains above (monotone extension past the
// support, so out-of-support bids stay well defined).
class Prior {
 public:
  virtual ~Prior() = default;
  virtual double sample(Substream& rng) const = 0;
  virtual double cdf(double v) const = 0;
  virtual double pdf(double v) const = 0;
  virtual double lo() const = 0;
  virtual double hi() const = 0;  // +inf for unbounded support

  virtual double virtual_value(double v) const {
    const double tail = 1.0 - cdf(v);
    if (tail <= 0.0) return v;
    const double f = pdf(v);
    if (f <= 0.0) return -kInf;
    return v - tail / f;
  }

  // inf{v : virtual_value(v) > y}; +inf when never reached. The default is a
  // bracketed bisection and requires a nondecreasing virtual value.
  virtual double virtual_value_inverse(double y) const {
    double l = lo();
    if (virtual_value(l) > y) return l;
    double step = 1.0, h = l + step;
    while (virtual_value(h) <= y) {
      step *= 2.0;
      if (step > 1e12) return kInf;
      h = l + step;
    }
    while (h - l > 1e-12 * std::max(1.0, std::fabs(h))) {
      const double mid = 0.5 * (l + h);
      if (virtual_value(mid) > y) h = mid;
      else l = mid;
    }
    return h;
  }
};

// Score transform for revenue-seeking mechanisms: negative virtual values
// clamp to zero, so values below the reserve never score.
inline ScoreMap revenue_score_map(std::shared_ptr<const Prior> p) {
  return {[p](double v) { return std::max(0.0, p->virtual_value(v)); },
          [p](double y) { return p->virtual_value_inverse(std::max(0.0, y)); }};
}

class UniformPrior final : public Prior {
 public:
  UniformPrior(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("UniformPrior: need finite lo < hi");
  }
  double sample(Substream& rng) const override { return rng.uniform(lo_, hi_); }
  double cdf(double v) const override {
    if (v <= lo_) return 0.0;
    if (v >= hi_) return 1.0;
    return (v - lo_) / (hi_ - lo_);
  }
  double pdf(double v) const override {
    // Right-continuous convention so mixtures stacked on top of this piece
    // see the correct density just past the endpoint.
    return v < lo_ || v >= hi_ ? 0.0 : 1.0 / (hi_ - lo_);
  }
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  double virtual_value(double v) const override {
    if (v < lo_) return -kInf;
    if (v >= hi_) return v;
    return 2.0 * v - hi_;
  }
  double virtual_value_inverse(double y) const override {
    if (y >= hi_) return y;
    return std::max(lo_, 0.5 * (y + hi_));
  }

 private:
  double lo_, hi_;
};

class ExponentialPrior final : public Prior {
 public:
  explicit ExponentialPrior(double rate, double shift = 0.0)
      : rate_(rate), shift_(shift) {
    if (!(rate > 0.0) || !std::isfinite(rate) || !std::isfinite(shift))
      throw std::invalid_argument("ExponentialPrior: need finite rate > 0");
  }
  double sample(Substream& rng) const override {
    return shift_ - std::log(1.0 - rng.uniform()) / rate_;
  }
  double cdf(double v) const override {
    return v <= shift_ ? 0.0 : 1.0 - std::exp(-rate_ * (v - shift_));
  }
  double pdf(double v) const override {
    return v < shift_ ? 0.0 : rate_ * std::exp(-rate_ * (v - shift_));
  }
  double lo() const override { return shift_; }
  double hi() const override { return kInf; }
  double virtual_value(double v) const override {
    // Constant hazard: the tail premium is exactly the mean.
    return v < shift_ ? -kInf : v - 1.0 / rate_;
  }
  double virtual_value_inverse(double y) const override {
    return std::max(shift_, y + 1.0 / rate_);
  }

 private:
  double rate_, shift_;
};

// Monotone virtual value needs shape >= 1 (nondecreasing hazard).
class GammaPrior final : public Prior {
 public:
  GammaPrior(double shape, double scale) : shape_(shape), scale_(scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("GammaPrior: need shape > 0, scale > 0");
  }
  double sample(Substream& rng) const override { return rng.gamma(shape_, scale_); }
  double cdf(double v) const override {
    return v <= 0.0 ? 0.0 : detail::regularized_gamma_p(shape_, v / scale_);
  }
  double pdf(double v) const override {
    if (v <= 0.0) return 0.0;
    return std::exp((shape_ - 1.0) * std::log(v) - v / scale_ -
                    std::lgamma(shape_) - shape_ * std::log(scale_));
  }
  double lo() const override { return 0.0; }
  double hi() const override { return kInf; }

 private:
  double shape_, scale_;
};

class MixturePrior final : public Prior {
 public:
  MixturePrior(std::vector<std::shared_ptr<const Prior>> parts,
               std::vector<double> weights)
      : parts_(std::move(parts)), w_(std::move(weights)) {
    if (parts_.empty() || parts_.size() != w_.size())
      throw std::invalid_argument("MixturePrior: parts/weights mismatch");
    double s = 0.0;
    for (double w : w_) {
      if (!(w >= 0.0)) throw std::invalid_argument("MixturePrior: negative weight");
      s += w;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::invalid_argument("MixturePrior: weights must sum to 1");
  }
  double sample(Substream& rng) const override {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      acc += w_[k];
      if (u < acc || k + 1 == parts_.size()) return parts_[k]->sample(rng);
    }
    return parts_.back()->sample(rng);
  }
  double cdf(double v) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < parts_.size(); ++k) s += w_[k] * parts_[k]->cdf(v);
    return s;
  }
  double pdf(double v) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < parts_.size(); ++k) s += w_[k] * parts_[k]->pdf(v);
    return s;
  }
  double lo() const override {
    double m = kInf;
    for (const auto& p : parts_) m = std::min(m, p->lo());
    return m;
  }
  double hi() const override {
    double m = -kInf;
    for (const auto& p : parts_) m = std::max(m, p->hi());
    return m;
  }

 private:
  std::vector<std::shared_ptr<const Prior>> parts_;
  std::vector<double> w_;
};

// Per-point virtual values of a sorted sample: v_t minus the local gap to the
// next order statistic scaled by the count still above. The top point keeps
// its own value.
inline std::vector<double> empirical_virtual_values(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("empirical_virtual_values: empty");
  for (std::size_t t = 1; t < n; ++t)
    if (sorted[t] < sorted[t - 1])
      throw std::invalid_argument("empirical_virtual_values: input not sorted");
  std::vector<double> g(n);
  for (std::size_t t = 0; t + 1 < n; ++t)
    g[t] = sorted[t] - (sorted[t + 1] - sorted[t]) * static_cast<double>(n - 1 - t);
  g[n - 1] = sorted[n - 1];
  return g;
}

// Nondecreasing rearrangement that preserves cumulative sums from the left:
// slopes of the greatest convex minorant of the running-sum curve. Applying
// it to an already nondecreasing sequence returns it unchanged.
inline std::vector<double> iron_nondecreasing(const std::vector<double>& g) {
  const std::size_t n = g.size();
  // A nondecreasing sequence is its own minorant; returning it directly makes
  // the operation exactly idempotent instead of idempotent up to rounding.
  bool sorted = true;
  for (std::size_t t = 1; t < n && sorted; ++t) sorted = g[t] >= g[t - 1];
  if (sorted) return g;
  std::vector<double> H(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) H[t + 1] = H[t] + g[t];
  // Lower convex hull of (k, H_k) by monotone chain.
  std::vector<std::size_t> hull;
  for (std::size_t k = 0; k <= n; ++k) {
    while (hull.size() >= 2) {
      const std::size_t p = hull[hull.size() - 2], q = hull.back();
      // Drop q when it lies on or above segment p..k.
      const double lhs = (H[q] - H[p]) * static_cast<double>(k - p);
      const double rhs = (H[k] - H[p]) * static_cast<double>(q - p);
      if (lhs >= rhs) hull.pop_back();
      else break;
    }
    hull.push_back(k);
  }
  std::vector<double> out(n);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const std::size_t p = hull[s], q = hull[s + 1];
    const double slope = (H[q] - H[p]) / static_cast<double>(q - p);
    for (std::size_t t = p; t < q; ++t) out[t] = slope;
  }
  // Division rounding can nick adjacent block slopes by an ulp; clamp so the
  // result is monotone by construction.
  for (std::size_t t = 1; t < n; ++t) out[t] = std::max(out[t], out[t - 1]);
  return out;
}

// Sample-backed prior: resampling for draws, step functions for everything
// else, ironed per-point virtual values for the score transform.
class EmpiricalPrior final : public Prior {
 public:
  explicit EmpiricalPrior(std::vector<double> draws) : x_(std::move(draws)) {
    if (x_.empty()) throw std::invalid_argument("EmpiricalPrior: empty sample");
    std::sort(x_.begin(), x_.end());
    g_ = iron_nondecreasing(empirical_virtual_values(x_));
  }
  double sample(Substream& rng) const override {
    return x_[rng.uniform_int(0, static_cast<std::int64_t>(x_.size()) - 1)];
  }
  double cdf(double v) const override {
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    return static_cast<double>(it - x_.begin()) / static_cast<double>(x_.size());
  }
  double pdf(double) const override { return 0.0; }
  double lo() const override { return x_.front(); }
  double hi() const override { return x_.back(); }
  double virtual_value(double v) const override {
    if (v < x_.front()) return -kInf;
    if (v > x_.back()) return v;  // monotone extension past the sample
    // Step lookup at the largest sample point <= v.
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    return g_[static_cast<std::size_t>(it - x_.begin()) - 1];
  }
  double virtual_value_inverse(double y) const override {
    // First sample point whose ironed virtual value exceeds y; above the
    // ironed range the extension virtual_value(v) = v takes over.
    const auto it = std::upper_bound(g_.begin(), g_.end(), y);
    if (it == g_.end()) return std::max(x_.back(), y);
    return x_[static_cast<std::size_t>(it - g_.begin())];
  }
  const std::vector<double>& points() const { return x_; }
  const std::vector<double>& ironed_virtuals() const { return g_; }

 private:
  std::vector<double> x_;  // sorted
  std::vector<double> g_;  // ironed virtual values, nondecreasing
};

}  // namespace adslot
