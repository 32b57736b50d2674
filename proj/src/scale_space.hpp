#pragma once

// Weighted-l1 sequence spaces E_alpha with norm sum_n |u_n| w_n e^{alpha l_n}, their
// weighted-l-infinity duals, and controlled truncation.
//
// A plain sequence uses the identity grading (level l_n = n, measure w_n = 1). Flattened
// particle hierarchies carry a non-trivial grading: every entry belongs to a particle
// number level and has a quadrature measure.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace scaleevo {

class Grading {
 public:
  Grading() = default;
  Grading(std::vector<int> levels, std::vector<double> measure);

  bool is_identity() const noexcept { return levels_.empty(); }
  std::size_t size() const noexcept { return levels_.size(); }
  int level(std::size_t i) const;
  double measure(std::size_t i) const;
  int max_level() const;

  const std::vector<int>& levels() const noexcept { return levels_; }
  const std::vector<double>& measures() const noexcept { return measure_; }

 private:
  std::vector<int> levels_;
  std::vector<double> measure_;
};

// Weights w_n e^{alpha l_n} for a fixed (alpha, size); built once and reused by callers
// that evaluate many norms at the same alpha.
class WeightTable {
 public:
  WeightTable(double alpha, std::size_t size, const Grading& grading = {});

  double alpha() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  double alpha_;
  std::vector<double> weights_;
};

class ScaleVector {
 public:
  ScaleVector() = default;
  explicit ScaleVector(std::vector<double> entries, double tail_alpha = 0.0, double tail_bound = 0.0);

  static ScaleVector unit(std::size_t index, std::size_t size = 0);

  std::span<const double> entries() const noexcept { return entries_; }
  std::size_t support_len() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return i < entries_.size() ? entries_[i] : 0.0; }
  double tail_alpha() const noexcept { return tail_alpha_; }
  double tail_bound() const noexcept { return tail_bound_; }

  // Zero-extended copy of the entries with exactly n elements (entries past n must be zero).
  std::vector<double> padded(std::size_t n) const;

  nlohmann::ordered_json to_json() const;
  static ScaleVector from_json(const nlohmann::json& j);
  std::string to_csv() const;

 private:
  std::vector<double> entries_;
  double tail_alpha_ = 0.0;
  double tail_bound_ = 0.0;
};

class DualVector {
 public:
  DualVector() = default;
  explicit DualVector(std::vector<double> entries);

  static DualVector unit(std::size_t index, std::size_t size = 0);

  std::span<const double> entries() const noexcept { return entries_; }
  std::size_t support_len() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return i < entries_.size() ? entries_[i] : 0.0; }
  std::vector<double> padded(std::size_t n) const;

  nlohmann::ordered_json to_json() const;
  static DualVector from_json(const nlohmann::json& j);

 private:
  std::vector<double> entries_;
};

// Kahan-compensated sum in ascending index order.
double compensated_sum(std::span<const double> terms);

double norm_alpha(std::span<const double> u, const WeightTable& weights);
double norm_alpha(std::span<const double> u, double alpha, const Grading& grading = {});
double norm_alpha(const ScaleVector& u, double alpha, const Grading& grading = {});

// sup_n |l_n| e^{-alpha l_n}; the measure does not enter the dual norm.
double dual_norm(std::span<const double> l, double alpha, const Grading& grading = {});
double dual_norm(const DualVector& l, double alpha, const Grading& grading = {});

// sum_n w_n u_n l_n with zero-extension of the shorter operand.
double dual_pairing(std::span<const double> u, std::span<const double> l, const Grading& grading = {});
double dual_pairing(const ScaleVector& u, const DualVector& l, const Grading& grading = {});

// Keep entries 0..n-1; the dropped alpha_max-mass is added to the tail certificate.
ScaleVector truncate(const ScaleVector& u, std::size_t n, double alpha_max, const Grading& grading = {});

}  // namespace scaleevo
