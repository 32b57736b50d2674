#include "evolution_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "parallel.hpp"

namespace scaleevo {

DiagonalGenerator::DiagonalGenerator(std::vector<double> d) : d_(std::move(d)) {
  for (double x : d_) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorCode::InvalidInput, "diagonal generator: rates must be finite and >= 0");
  }
}

namespace {

constexpr int kMaxTaylorDegree = 60;

double column_abs_sum_max(const OperatorMatrix& g) {
  double best = 0.0;
  for (std::size_t k = 0; k < g.cols(); ++k) {
    double s = 0.0;
    for (const auto& e : g.column(k)) s += std::abs(e.value);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

void StepOperator::apply(std::span<const double> in, std::span<double> out) const {
  if (kind_ == PropagatorKind::Diagonal) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i < in.size() ? in[i] * factors_[i] : 0.0;
    return;
  }
  const std::size_t n = out.size();
  std::vector<double> acc(n, 0.0);
  std::copy_n(in.begin(), std::min(n, in.size()), acc.begin());
  std::vector<double> term(n);
  std::vector<double> next(n);
  const double x = h_ / static_cast<double>(substeps_);
  for (std::size_t s = 0; s < substeps_; ++s) {
    term = acc;
    for (int j = 1; j <= kMaxTaylorDegree; ++j) {
      std::fill(next.begin(), next.end(), 0.0);
      generator_->multiply_add(term, next, x / j);
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double updated = acc[i] + next[i];
        if (updated != acc[i]) changed = true;
        acc[i] = updated;
      }
      term.swap(next);
      if (!changed) break;
    }
  }
  std::copy(acc.begin(), acc.end(), out.begin());
}

Propagator Propagator::diagonal(DiagonalGenerator g, const Grading& grading) {
  Propagator p;
  p.kind_ = PropagatorKind::Diagonal;
  p.n_ = g.size();
  p.rates_ = g.rates();
  p.grading_ = grading;
  for (double d : p.rates_) p.generator_norm_ = std::max(p.generator_norm_, d);
  return p;
}

Propagator Propagator::truncated_matrix(const OperatorMatrix& generator, std::size_t n, const Grading& grading) {
  Propagator p;
  p.kind_ = PropagatorKind::TruncatedMatrix;
  p.n_ = n;
  p.generator_ = generator.truncated(n);
  p.generator_norm_ = column_abs_sum_max(p.generator_);
  p.grading_ = grading;
  return p;
}

void Propagator::set_K(double k) {
  if (!(k >= 1.0) || !std::isfinite(k)) fail(ErrorCode::InvalidInput, "propagator: K must be finite and >= 1");
  K_ = k;
}

OperatorMatrix Propagator::generator_matrix() const {
  if (kind_ == PropagatorKind::TruncatedMatrix) return generator_;
  std::vector<double> neg(rates_.size());
  for (std::size_t i = 0; i < rates_.size(); ++i) neg[i] = -rates_[i];
  return OperatorMatrix::diagonal(neg);
}

std::size_t Propagator::default_substeps(double h) const {
  if (kind_ == PropagatorKind::Diagonal) return 1;
  const double load = std::abs(h) * generator_norm_;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(load)));
}

StepOperator Propagator::step(double h, std::size_t substeps) const {
  if (!(h >= 0.0)) fail(ErrorCode::TimeOrderViolation, "propagator step must be nonnegative");
  StepOperator op;
  op.kind_ = kind_;
  op.h_ = h;
  if (kind_ == PropagatorKind::Diagonal) {
    op.factors_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) op.factors_[i] = std::exp(-h * rates_[i]);
  } else {
    op.generator_ = &generator_;
    op.substeps_ = substeps > 0 ? substeps : default_substeps(h);
  }
  return op;
}

std::vector<double> Propagator::apply(double tau, std::span<const double> u) const {
  std::vector<double> out(n_, 0.0);
  if (u.size() > n_) {
    for (std::size_t i = n_; i < u.size(); ++i) {
      if (u[i] != 0.0) fail(ErrorCode::InvalidInput, "vector support exceeds the propagator dimension");
    }
  }
  step(tau).apply(u.subspan(0, std::min(u.size(), n_)), out);
  return out;
}

Propagator Propagator::adjoint() const {
  Propagator p = *this;
  if (kind_ == PropagatorKind::TruncatedMatrix) {
    p.generator_ = generator_.adjoint(grading_);
    p.generator_norm_ = column_abs_sum_max(p.generator_);
  }
  return p;
}

Propagator Propagator::truncated(std::size_t n) const {
  Propagator p = *this;
  p.n_ = std::min(n, n_);
  if (kind_ == PropagatorKind::Diagonal) {
    p.rates_.resize(p.n_);
  } else {
    p.generator_ = generator_.truncated(p.n_);
    p.generator_norm_ = column_abs_sum_max(p.generator_);
  }
  return p;
}

Propagator Propagator::perturbed(const OperatorMatrix& delta) const {
  const OperatorMatrix d = delta.truncated(n_);
  if (kind_ == PropagatorKind::Diagonal && d.is_diagonal()) {
    auto rates = rates_;
    const auto dd = d.diagonal_entries(n_);
    bool nonnegative = true;
    for (std::size_t i = 0; i < n_; ++i) {
      rates[i] -= dd[i];
      nonnegative = nonnegative && rates[i] >= 0.0;
    }
    if (nonnegative) {
      Propagator p = diagonal(DiagonalGenerator(std::move(rates)), grading_);
      p.K_ = K_;
      return p;
    }
  }
  Propagator p = truncated_matrix(generator_matrix() + d, n_, grading_);
  p.K_ = K_;
  return p;
}

nlohmann::ordered_json Propagator::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind_ == PropagatorKind::Diagonal ? "diagonal" : "truncated_matrix";
  j["dimension"] = n_;
  j["K"] = K_;
  return j;
}

ScaleVector diag_propagate(const DiagonalGenerator& g, double s, double t, const ScaleVector& u) {
  if (t < s) fail(ErrorCode::TimeOrderViolation, "diag_propagate requires t >= s");
  const auto e = u.entries();
  if (e.size() > g.size()) fail(ErrorCode::InvalidInput, "vector support exceeds the generator length");
  std::vector<double> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i] * std::exp(-(t - s) * g.rates()[i]);
  return ScaleVector(std::move(out), u.tail_alpha(), u.tail_bound());
}

std::vector<double> oracle_integrate(const OdeRhs& rhs, std::vector<double> y, double t0, double t1, double tol,
                                     OracleStats* stats) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidInput, "oracle tolerance must be positive");
  const double span = t1 - t0;
  if (span == 0.0) return y;
  const std::size_t n = y.size();
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double length = std::abs(span);

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const double atol = 1e-3 * tol * (ymax > 0.0 ? ymax : 1.0);
  const double rtol = tol;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  double t = t0;
  rhs(t, y, k1);
  double h = length / 100.0;
  const std::size_t max_steps = 2'000'000;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double done = 0.0;
  while (done < length) {
    if (accepted + rejected >= max_steps) fail(ErrorCode::OracleFailure, "oracle exceeded its step budget");
    bool last = false;
    if (done + h >= length * (1.0 - 1e-15)) {
      h = length - done;
      last = true;
    }
    if (h < 1e-14 * length) fail(ErrorCode::OracleFailure, "oracle step size underflow");
    const double hs = dir * h;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    rhs(t + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const double t_new = last ? t1 : t + hs;
    rhs(t + hs, tmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    rhs(t_new, ynew, k7);
    double ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double err = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      ratio = std::max(ratio, std::abs(err) / sc);
    }
    if (!std::isfinite(ratio)) fail(ErrorCode::OracleFailure, "oracle produced non-finite values");
    // Error per unit step: the local estimate is compared against tol * h / length.
    const double q = ratio * length / h;
    const double factor = q == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(q, -0.25), 0.2, 5.0);
    if (q <= 1.0) {
      ++accepted;
      y.swap(ynew);
      k1.swap(k7);
      t = t_new;
      done = last ? length : done + h;
      h *= factor;
    } else {
      ++rejected;
      h *= std::min(factor, 0.9);
    }
  }
  if (stats) {
    stats->accepted = accepted;
    stats->rejected = rejected;
  }
  return y;
}

ScaleVector oracle_propagate(const OperatorMatrix& a, std::size_t n, double s, double t, const ScaleVector& u,
                             double tol) {
  if (t < s) fail(ErrorCode::TimeOrderViolation, "oracle_propagate requires t >= s");
  const OperatorMatrix at = a.truncated(n);
  auto rhs = [&at](double, std::span<const double> y, std::span<double> dy) {
    std::fill(dy.begin(), dy.end(), 0.0);
    at.multiply_add(y, dy);
  };
  return ScaleVector(oracle_integrate(rhs, u.padded(n), s, t, tol));
}

double residual_A3(const Propagator& v, const OperatorMatrix& a, double s, double t, const ScaleVector& u,
                   Direction direction, double alpha, double alpha_mid, double alpha_prime, int panels) {
  if (!(alpha_prime < alpha_mid && alpha_mid < alpha)) {
    fail(ErrorCode::InvalidScalePair, "residual requires alpha' < alpha'' < alpha");
  }
  if (t < s) fail(ErrorCode::TimeOrderViolation, "residual requires t >= s");
  if (panels < 2 || panels % 2 != 0) fail(ErrorCode::InvalidInput, "Simpson panel count must be even and >= 2");
  const std::size_t n = v.dimension();
  const auto u0 = u.padded(n);
  if (t == s) return 0.0;
  const OperatorMatrix at = a.truncated(n);
  const double h = (t - s) / panels;
  const auto step = v.step(h);
  const auto m = static_cast<std::size_t>(panels);

  // Integrand samples f_i at r_i = s + i h.
  std::vector<std::vector<double>> f(m + 1, std::vector<double>(n, 0.0));
  if (direction == Direction::Forward) {
    std::vector<double> cur = u0;
    std::vector<double> next(n);
    for (std::size_t i = 0; i <= m; ++i) {
      at.multiply_add(cur, f[i]);
      if (i < m) {
        step.apply(cur, next);
        cur.swap(next);
      }
    }
  } else {
    std::vector<double> g(n, 0.0);
    at.multiply_add(u0, g);
    f[m] = g;
    for (std::size_t i = m; i-- > 0;) step.apply(f[i + 1], f[i]);
  }
  std::vector<double> integral(n, 0.0);
  for (std::size_t i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (std::size_t j = 0; j < n; ++j) integral[j] += w * f[i][j];
  }
  const auto vt = v.apply(t - s, u0);
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = vt[j] - u0[j] - h / 3.0 * integral[j];
  return norm_alpha(r, alpha_prime, v.grading());
}

double log_norm(const OperatorMatrix& g, double alpha, const Grading& grading) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.cols(); ++k) {
    const double wk = grading.measure(k) * std::exp(alpha * grading.level(k));
    double value = 0.0;
    for (const auto& e : g.column(k)) {
      if (e.row == k) {
        value += e.value;
      } else {
        value += std::abs(e.value) * grading.measure(e.row) * std::exp(alpha * grading.level(e.row)) / wk;
      }
    }
    best = std::max(best, value);
  }
  if (!std::isfinite(best)) best = 0.0;
  return best;
}

KCertificate estimate_K(const Propagator& v, const std::vector<double>& alphas, double tau_max, int samples) {
  KCertificate cert;
  if (v.kind() == PropagatorKind::Diagonal) return cert;
  if (alphas.empty() || samples < 1 || !(tau_max > 0.0)) fail(ErrorCode::InvalidInput, "K estimation needs alphas, samples and tau_max > 0");
  const auto& g = v.generator();
  cert.log_norm_max = -std::numeric_limits<double>::infinity();
  for (double a : alphas) cert.log_norm_max = std::max(cert.log_norm_max, log_norm(g, a, v.grading()));
  // Empty columns of the truncation contribute a zero logarithmic norm.
  if (g.cols() < v.dimension()) cert.log_norm_max = std::max(cert.log_norm_max, 0.0);
  for (std::size_t k = 0; k < g.cols(); ++k) {
    if (g.column(k).empty()) cert.log_norm_max = std::max(cert.log_norm_max, 0.0);
  }
  cert.contraction_by_log_norm = cert.log_norm_max <= 0.0;

  const std::size_t n = v.dimension();
  if (cert.contraction_by_log_norm && n > kSampleDimension) {
    cert.sampled = false;
    return cert;
  }
  const auto step = v.step(tau_max / samples);
  std::vector<WeightTable> weights;
  for (double a : alphas) weights.emplace_back(a, n, v.grading());
  std::vector<double> column_max(n, 0.0);
  parallel_for(n, [&](std::size_t k) {
    std::vector<double> cur(n, 0.0);
    std::vector<double> next(n);
    cur[k] = 1.0;
    double best = 0.0;
    for (int j = 1; j <= samples; ++j) {
      step.apply(cur, next);
      cur.swap(next);
      for (const auto& w : weights) best = std::max(best, norm_alpha(cur, w) / w[k]);
    }
    column_max[k] = best;
  });
  cert.sampled_max = *std::max_element(column_max.begin(), column_max.end());
  cert.K = cert.contraction_by_log_norm ? 1.0 : 1.05 * std::max(1.0, cert.sampled_max);
  return cert;
}

}  // namespace scaleevo
