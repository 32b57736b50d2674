#include "scale_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "errors.hpp"

namespace scaleevo {

Grading::Grading(std::vector<int> levels, std::vector<double> measure)
    : levels_(std::move(levels)), measure_(std::move(measure)) {
  if (levels_.size() != measure_.size()) fail(ErrorCode::InvalidInput, "grading: levels and measure differ in length");
  for (double m : measure_) {
    if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorCode::InvalidInput, "grading: measure must be positive and finite");
  }
  for (int l : levels_) {
    if (l < 0) fail(ErrorCode::InvalidInput, "grading: negative level");
  }
}

int Grading::level(std::size_t i) const {
  if (levels_.empty()) return static_cast<int>(i);
  if (i >= levels_.size()) fail(ErrorCode::InvalidInput, "grading: index outside graded range");
  return levels_[i];
}

double Grading::measure(std::size_t i) const {
  if (levels_.empty()) return 1.0;
  if (i >= measure_.size()) fail(ErrorCode::InvalidInput, "grading: index outside graded range");
  return measure_[i];
}

int Grading::max_level() const {
  if (levels_.empty()) return -1;
  return *std::max_element(levels_.begin(), levels_.end());
}

WeightTable::WeightTable(double alpha, std::size_t size, const Grading& grading) : alpha_(alpha), weights_(size) {
  if (!std::isfinite(alpha)) fail(ErrorCode::InvalidInput, "weight table: alpha must be finite");
  for (std::size_t i = 0; i < size; ++i) {
    const double w = grading.measure(i) * std::exp(alpha * grading.level(i));
    if (!std::isfinite(w)) {
      fail(ErrorCode::RangeOverflow, "weight e^{alpha n} overflows at n = " + std::to_string(grading.level(i)) +
                                         ", alpha = " + std::to_string(alpha));
    }
    weights_[i] = w;
  }
}

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::InvalidInput, std::string(what) + ": non-finite entry");
  }
}

std::vector<double> json_entries(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array()) {
    fail(ErrorCode::InvalidInput, "vector JSON: missing \"entries\" array");
  }
  std::vector<double> out;
  for (const auto& e : j.at("entries")) {
    if (!e.is_number()) fail(ErrorCode::InvalidInput, "vector JSON: entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

ScaleVector::ScaleVector(std::vector<double> entries, double tail_alpha, double tail_bound)
    : entries_(std::move(entries)), tail_alpha_(tail_alpha), tail_bound_(tail_bound) {
  check_finite(entries_, "scale vector");
  if (!(tail_bound_ >= 0.0) || !std::isfinite(tail_bound_)) {
    fail(ErrorCode::InvalidInput, "scale vector: tail_bound must be finite and >= 0");
  }
  if (!std::isfinite(tail_alpha_)) fail(ErrorCode::InvalidInput, "scale vector: tail_alpha must be finite");
}

ScaleVector ScaleVector::unit(std::size_t index, std::size_t size) {
  std::vector<double> e(std::max(size, index + 1), 0.0);
  e[index] = 1.0;
  return ScaleVector(std::move(e));
}

std::vector<double> ScaleVector::padded(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i < n) {
      out[i] = entries_[i];
    } else if (entries_[i] != 0.0) {
      fail(ErrorCode::InvalidInput, "vector support exceeds the working dimension");
    }
  }
  return out;
}

nlohmann::ordered_json ScaleVector::to_json() const {
  nlohmann::ordered_json j;
  j["entries"] = entries_;
  j["tail_alpha"] = tail_alpha_;
  j["tail_bound"] = tail_bound_;
  return j;
}

ScaleVector ScaleVector::from_json(const nlohmann::json& j) {
  const double ta = j.contains("tail_alpha") ? j.at("tail_alpha").get<double>() : 0.0;
  const double tb = j.contains("tail_bound") ? j.at("tail_bound").get<double>() : 0.0;
  return ScaleVector(json_entries(j), ta, tb);
}

std::string ScaleVector::to_csv() const {
  std::ostringstream os;
  os << "index,value\n";
  char buf[64];
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, entries_[i]);
    os << buf;
  }
  return os.str();
}

DualVector::DualVector(std::vector<double> entries) : entries_(std::move(entries)) {
  check_finite(entries_, "dual vector");
}

DualVector DualVector::unit(std::size_t index, std::size_t size) {
  std::vector<double> e(std::max(size, index + 1), 0.0);
  e[index] = 1.0;
  return DualVector(std::move(e));
}

std::vector<double> DualVector::padded(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  std::copy_n(entries_.begin(), std::min(n, entries_.size()), out.begin());
  return out;
}

nlohmann::ordered_json DualVector::to_json() const {
  nlohmann::ordered_json j;
  j["entries"] = entries_;
  return j;
}

DualVector DualVector::from_json(const nlohmann::json& j) { return DualVector(json_entries(j)); }

double compensated_sum(std::span<const double> terms) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : terms) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double norm_alpha(std::span<const double> u, const WeightTable& weights) {
  if (u.size() > weights.size()) fail(ErrorCode::Internal, "weight table shorter than vector");
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    const double y = std::abs(u[i]) * weights[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  if (!std::isfinite(sum)) fail(ErrorCode::RangeOverflow, "norm overflows");
  return sum;
}

double norm_alpha(std::span<const double> u, double alpha, const Grading& grading) {
  return norm_alpha(u, WeightTable(alpha, u.size(), grading));
}

double norm_alpha(const ScaleVector& u, double alpha, const Grading& grading) {
  return norm_alpha(u.entries(), alpha, grading);
}

double dual_norm(std::span<const double> l, double alpha, const Grading& grading) {
  double best = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == 0.0) continue;
    best = std::max(best, std::abs(l[i]) * std::exp(-alpha * grading.level(i)));
  }
  return best;
}

double dual_norm(const DualVector& l, double alpha, const Grading& grading) {
  return dual_norm(l.entries(), alpha, grading);
}

double dual_pairing(std::span<const double> u, std::span<const double> l, const Grading& grading) {
  const std::size_t n = std::min(u.size(), l.size());
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = grading.measure(i) * u[i] * l[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double dual_pairing(const ScaleVector& u, const DualVector& l, const Grading& grading) {
  return dual_pairing(u.entries(), l.entries(), grading);
}

ScaleVector truncate(const ScaleVector& u, std::size_t n, double alpha_max, const Grading& grading) {
  const auto entries = u.entries();
  if (n >= entries.size()) return u;
  std::vector<double> dropped(entries.begin() + static_cast<std::ptrdiff_t>(n), entries.end());
  const WeightTable w(alpha_max, entries.size(), grading);
  double mass = 0.0;
  double carry = 0.0;
  for (std::size_t i = n; i < entries.size(); ++i) {
    const double y = std::abs(entries[i]) * w[i] - carry;
    const double t = mass + y;
    carry = (t - mass) - y;
    mass = t;
  }
  // The combined certificate holds at the smaller of the two declared levels.
  const double tail_alpha = u.tail_bound() > 0.0 ? std::min(u.tail_alpha(), alpha_max) : alpha_max;
  std::vector<double> kept(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n));
  return ScaleVector(std::move(kept), tail_alpha, u.tail_bound() + mass);
}

}  // namespace scaleevo
