#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltsi/defaults.hpp"
#include "ltsi/errors.hpp"

namespace ltsi {

/// Uniform frequency grid omega_k = omega_min + k*step, k = 0..count-1.
/// A grid may be punctured by an explicit list of excluded sample indices;
/// excluded samples keep their slot (indices stay stable) but are skipped by
/// every certification sweep.
class FrequencyGrid {
 public:
  FrequencyGrid(double omega_min, double step, int count,
                std::vector<int> excluded = {})
      : omega_min_(omega_min), step_(step), count_(count),
        excluded_(std::move(excluded)) {
    if (count_ < 1) throw ConfigError("frequency grid needs at least one sample");
    if (!(step_ > 0.0)) throw ConfigError("frequency grid step must be positive");
    std::sort(excluded_.begin(), excluded_.end());
    excluded_.erase(std::unique(excluded_.begin(), excluded_.end()), excluded_.end());
    for (int k : excluded_)
      if (k < 0 || k >= count_) throw ConfigError("excluded index out of range");
  }

  double omega_min() const { return omega_min_; }
  double step() const { return step_; }
  int count() const { return count_; }
  double omega_max() const { return sample(count_ - 1); }

  double sample(int k) const { return omega_min_ + k * step_; }

  std::vector<double> samples() const {
    std::vector<double> out(count_);
    for (int k = 0; k < count_; ++k) out[k] = sample(k);
    return out;
  }

  // Index of the sample matching omega, if any. Matching is exact up to a
  // small relative slack so that values computed as omega_min + k*step in a
  // different order still resolve.
  std::optional<int> index_of(double omega) const {
    int k = static_cast<int>(std::llround((omega - omega_min_) / step_));
    if (k < 0 || k >= count_) return std::nullopt;
    double tol = 1e-9 * std::max({1.0, std::abs(omega), step_});
    if (std::abs(omega - sample(k)) > tol) return std::nullopt;
    return k;
  }

  bool is_excluded(int k) const {
    return std::binary_search(excluded_.begin(), excluded_.end(), k);
  }

  const std::vector<int>& excluded() const { return excluded_; }

  FrequencyGrid with_excluded(const std::vector<int>& extra) const {
    std::vector<int> merged = excluded_;
    merged.insert(merged.end(), extra.begin(), extra.end());
    return FrequencyGrid(omega_min_, step_, count_, std::move(merged));
  }

  std::vector<int> active_indices() const {
    std::vector<int> out;
    out.reserve(count_ - static_cast<int>(excluded_.size()));
    for (int k = 0; k < count_; ++k)
      if (!is_excluded(k)) out.push_back(k);
    return out;
  }

  bool same_layout(const FrequencyGrid& o) const {
    return omega_min_ == o.omega_min_ && step_ == o.step_ && count_ == o.count_;
  }

  // Parses "min:step:max" (endpoints inclusive; max must land on the lattice).
  static FrequencyGrid parse(const std::string& text) {
    auto bad = [&] { return ConfigError("grid spec must be min:step:max, got '" + text + "'"); };
    auto c1 = text.find(':');
    auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw bad();
    double lo, st, hi;
    try {
      size_t used = 0;
      lo = std::stod(text.substr(0, c1), &used);
      if (used != c1) throw bad();
      st = std::stod(text.substr(c1 + 1, c2 - c1 - 1), &used);
      if (used != c2 - c1 - 1) throw bad();
      hi = std::stod(text.substr(c2 + 1), &used);
      if (used != text.size() - c2 - 1) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
    if (!(st > 0.0) || hi < lo) throw bad();
    int count = static_cast<int>(std::llround((hi - lo) / st)) + 1;
    if (std::abs(lo + (count - 1) * st - hi) > 1e-6 * std::max(1.0, std::abs(hi)))
      throw ConfigError("grid max does not land on the step lattice: '" + text + "'");
    return FrequencyGrid(lo, st, count);
  }

 private:
  double omega_min_;
  double step_;
  int count_;
  std::vector<int> excluded_;
};

// Punctures every sample closer to omega = 0 than defaults::zero_exclusion.
inline FrequencyGrid puncture_near_zero(const FrequencyGrid& g) {
  std::vector<int> ex;
  for (int k = 0; k < g.count(); ++k)
    if (std::abs(g.sample(k)) < defaults::zero_exclusion) ex.push_back(k);
  return g.with_excluded(ex);
}

// Default grid for the built-in model zoo.
inline FrequencyGrid default_grid() {
  return puncture_near_zero(FrequencyGrid(-10.0, 0.05, 401));
}

}  // namespace ltsi
