#include "ovcyannikov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "errors.hpp"
#include "parallel.hpp"

namespace scaleevo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using NormFn = std::function<double(std::span<const double>)>;

struct PicardRun {
  std::vector<double> final_value;
  std::vector<double> term_norms;
  std::vector<std::vector<double>> trajectory;
};

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// Picard iteration of u(r) = V(r - t0) k + int_{t0}^{r} V(r - q) B(q) u(q) dq on the uniform grid
// r_j = t0 + j h, j = 0..m. Composite Simpson is used on even prefixes, Simpson plus the 3/8
// rule on odd prefixes, and the trapezoid rule on the first panel. Each iterate adds exactly
// one more term of the series, so successive differences are the discretized terms.
PicardRun run_picard(const Propagator& v, const OperatorFamily& b, double t0, double span, const std::vector<double>& k,
                     int m, int n_terms, std::size_t substeps, const NormFn& norm) {
  const std::size_t n = v.dimension();
  const auto mm = static_cast<std::size_t>(m);
  const double h = span / m;
  const auto step = v.step(h, substeps);

  std::vector<std::vector<double>> base(mm + 1, std::vector<double>(n, 0.0));
  base[0] = k;
  for (std::size_t j = 0; j < mm; ++j) step.apply(base[j], base[j + 1]);

  std::vector<std::vector<double>> u = base;
  std::vector<std::vector<double>> g(mm + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> s(mm + 1, std::vector<double>(n, 0.0));
  PicardRun run;
  for (int it = 1; it <= n_terms; ++it) {
    parallel_for(mm + 1, [&](std::size_t j) {
      std::fill(g[j].begin(), g[j].end(), 0.0);
      b.multiply_add(t0 + static_cast<double>(j) * h, u[j], g[j]);
    });
    // Even prefixes through the running sum P_{j+1} = E (P_j + c_j g_j).
    std::vector<double> p(n, 0.0);
    std::vector<double> tmp(n);
    std::fill(s[0].begin(), s[0].end(), 0.0);
    for (std::size_t j = 0; j < mm; ++j) {
      const double c = j == 0 ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      axpy(c, g[j], p);
      step.apply(p, tmp);
      p.swap(tmp);
      if ((j + 1) % 2 == 0) {
        auto& sj = s[j + 1];
        for (std::size_t i = 0; i < n; ++i) sj[i] = h / 3.0 * (p[i] + g[j + 1][i]);
      }
    }
    // Odd prefixes are independent once the even ones are known.
    std::vector<std::size_t> odd;
    for (std::size_t j = 1; j <= mm; j += 2) odd.push_back(j);
    parallel_for(odd.size(), [&](std::size_t idx) {
      const std::size_t j = odd[idx];
      std::vector<double> acc(n);
      std::vector<double> out(n);
      auto& sj = s[j];
      if (j == 1) {
        step.apply(g[0], out);
        for (std::size_t i = 0; i < n; ++i) sj[i] = h / 2.0 * (out[i] + g[1][i]);
        return;
      }
      const double w38 = 3.0 * h / 8.0;
      for (std::size_t i = 0; i < n; ++i) acc[i] = s[j - 3][i] + w38 * g[j - 3][i];
      step.apply(acc, out);
      for (std::size_t i = 0; i < n; ++i) acc[i] = out[i] + 3.0 * w38 * g[j - 2][i];
      step.apply(acc, out);
      for (std::size_t i = 0; i < n; ++i) acc[i] = out[i] + 3.0 * w38 * g[j - 1][i];
      step.apply(acc, out);
      for (std::size_t i = 0; i < n; ++i) sj[i] = out[i] + w38 * g[j][i];
    });
    std::vector<double> previous_final = u[mm];
    for (std::size_t j = 0; j <= mm; ++j) {
      for (std::size_t i = 0; i < n; ++i) u[j][i] = base[j][i] + s[j][i];
    }
    run.term_norms.push_back(norm(difference(u[mm], previous_final)));
  }
  run.final_value = u[mm];
  run.trajectory = std::move(u);
  return run;
}

struct CoreInput {
  const Propagator* v = nullptr;
  OperatorFamily b;
  double t0 = 0.0;
  double tau = 0.0;
  std::vector<double> k;
  double K = 1.0;
  double T = kInf;
  double input_norm = 0.0;
  NormFn out_norm;
};

void run_core(const CoreInput& in, const EvolveOptions& opts, EvolutionResult& res) {
  const double rho = std::isinf(in.T) ? 0.0 : in.tau / in.T;
  res.rho = rho;
  res.T = in.T;
  res.K = in.K;
  res.input_norm = in.input_norm;
  const int m0 = std::max(2, opts.panels + opts.panels % 2);
  const double h0 = in.tau / m0;

  if (in.tau == 0.0) {
    res.value = in.k;
    res.panels = m0;
    if (opts.keep_trajectory) {
      res.trajectory.assign(static_cast<std::size_t>(m0) + 1, in.k);
      for (int j = 0; j <= m0; ++j) res.times.push_back(in.t0);
    }
    return;
  }

  if (in.b.is_zero()) {
    res.panels = m0;
    if (opts.keep_trajectory) {
      const auto step = in.v->step(h0, opts.substeps);
      std::vector<double> cur = in.k;
      std::vector<double> next(cur.size());
      for (int j = 0; j <= m0; ++j) {
        res.trajectory.push_back(cur);
        res.times.push_back(in.t0 + j * h0);
        if (j < m0) {
          step.apply(cur, next);
          cur.swap(next);
        }
      }
      res.value = res.trajectory.back();
    } else {
      res.value = in.v->apply(in.tau, in.k);
    }
    return;
  }

  int n_terms = 0;
  double tail = kInf;
  if (opts.fixed_terms > 0) {
    n_terms = opts.fixed_terms;
    tail = rho < 1.0 ? in.K * in.input_norm * std::pow(rho, n_terms + 1) / (1.0 - rho) : kInf;
  } else {
    for (n_terms = 0; n_terms <= opts.max_terms; ++n_terms) {
      tail = in.K * in.input_norm * std::pow(rho, n_terms + 1) / (1.0 - rho);
      if (tail <= opts.tol) break;
    }
    n_terms = std::min(n_terms, opts.max_terms);
  }
  res.n_terms = n_terms;
  res.series_tail = tail;

  int m = m0;
  PicardRun run = run_picard(*in.v, in.b, in.t0, in.tau, in.k, m, n_terms, opts.substeps, in.out_norm);
  double change = 0.0;
  if (!opts.fixed_panels) {
    for (;;) {
      const int m2 = 2 * m;
      PicardRun finer = run_picard(*in.v, in.b, in.t0, in.tau, in.k, m2, n_terms, opts.substeps, in.out_norm);
      change = in.out_norm(difference(finer.final_value, run.final_value));
      run = std::move(finer);
      m = m2;
      if (change < opts.tol / 4.0 || m >= opts.max_panels) break;
    }
  }
  res.quad_error = change;
  res.panels = m;
  res.term_norms = run.term_norms;
  res.value = run.final_value;
  if (opts.keep_trajectory) {
    res.trajectory = std::move(run.trajectory);
    for (int j = 0; j <= m; ++j) res.times.push_back(in.t0 + j * (in.tau / m));
  }
}

void check_levels(const WConfig& w, double alpha, double alpha_prime) {
  if (!std::isfinite(alpha) || !std::isfinite(alpha_prime)) fail(ErrorCode::InvalidInput, "alpha values must be finite");
  if (!(alpha_prime < alpha)) fail(ErrorCode::InvalidScalePair, "alpha' must be smaller than alpha");
  if (!(alpha_prime > w.alpha_star)) fail(ErrorCode::InvalidScalePair, "alpha' must exceed alpha_*");
}

void check_horizon(double tau, double T, const EvolveOptions& opts) {
  if (opts.skip_horizon_check) return;
  if (tau >= T) {
    fail(ErrorCode::ExistenceHorizonExceeded,
         "time span " + std::to_string(tau) + " is not below the existence horizon " + std::to_string(T));
  }
  if (tau / T > opts.rho_max) {
    fail(ErrorCode::HorizonTooTight,
         "time span uses " + std::to_string(tau / T) + " of the horizon; the limit is " + std::to_string(opts.rho_max));
  }
}

double amplification(double K, double T, double tau) {
  if (std::isinf(T)) return K;
  return K * T / (T - tau);
}

}  // namespace

double existence_time(double alpha_prime, double alpha, double K, double M_alpha) {
  if (!(alpha_prime < alpha)) fail(ErrorCode::InvalidScalePair, "existence time requires alpha' < alpha");
  if (!(K >= 1.0)) fail(ErrorCode::InvalidInput, "existence time requires K >= 1");
  if (!(M_alpha >= 0.0)) fail(ErrorCode::InvalidInput, "existence time requires M >= 0");
  if (M_alpha == 0.0) return kInf;
  return (alpha - alpha_prime) / (2.0 * K * std::numbers::e * M_alpha);
}

double existence_time(double alpha_prime, double alpha, const HorizonTable& data) {
  if (!(alpha_prime > data.alpha_star) || !(alpha > data.alpha_star)) {
    fail(ErrorCode::InvalidScalePair, "scale levels must exceed alpha_*");
  }
  if (!(alpha_prime < alpha)) fail(ErrorCode::InvalidScalePair, "existence time requires alpha' < alpha");
  return existence_time(alpha_prime, alpha, data.K, data.M(alpha));
}

HorizonTable horizon_table(const WConfig& w, double alpha, double alpha_prime, int grid_fill) {
  HorizonTable table;
  table.alpha_star = w.alpha_star;
  table.K = w.V.K();
  double hi = alpha;
  for (double g : w.alpha_grid) hi = std::max(hi, g);
  const auto grid = merge_grid(w.alpha_grid, {alpha, alpha_prime}, w.alpha_star, hi, grid_fill);
  table.M = fit_majorant(w.B.truncated(w.V.dimension()), w.alpha_star, grid, w.safety, w.V.grading());
  return table;
}

nlohmann::ordered_json EvolutionResult::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = dual ? "dual" : "primal";
  j["s"] = s;
  j["t"] = t;
  j["alpha"] = alpha;
  j["alpha_prime"] = alpha_prime;
  if (dual) {
    j["value"] = DualVector(value).to_json();
  } else {
    j["value"] = ScaleVector(value, alpha_prime, 0.0).to_json();
  }
  j["n_terms"] = n_terms;
  j["panels"] = panels;
  j["rho"] = rho;
  j["input_norm"] = input_norm;
  nlohmann::ordered_json budget;
  budget["series_tail"] = series_tail;
  budget["quad_error"] = quad_error;
  budget["input_tail"] = input_tail;
  budget["total"] = total_error();
  j["error_budget"] = budget;
  j["term_norms"] = term_norms;
  nlohmann::ordered_json cert;
  cert["K"] = K;
  cert["T"] = T;
  if (majorant) {
    cert["alpha_star"] = majorant->alpha_star();
    cert["M"] = majorant->to_json();
  }
  j["certificate"] = cert;
  for (const auto& [key, val] : extra.items()) j[key] = val;
  return j;
}

EvolutionResult forward_evolve(const WConfig& w, const ScaleVector& k, double s, double t, double alpha,
                               double alpha_prime, const EvolveOptions& opts) {
  check_levels(w, alpha, alpha_prime);
  if (t < s) fail(ErrorCode::TimeOrderViolation, "forward evolution requires t >= s");
  const double tau = t - s;
  const std::size_t n = w.V.dimension();
  const HorizonTable table = horizon_table(w, alpha, alpha_prime, opts.grid_fill);
  const double T = existence_time(alpha_prime, alpha, table);
  check_horizon(tau, T, opts);

  EvolutionResult res;
  res.alpha = alpha;
  res.alpha_prime = alpha_prime;
  res.s = s;
  res.t = t;
  res.majorant = table.M;
  if (k.tail_bound() > 0.0) {
    if (k.tail_alpha() < alpha) fail(ErrorCode::InvalidInput, "input tail certificate is below the source level alpha");
    res.input_tail = amplification(table.K, T, tau) * k.tail_bound();
  }
  const WeightTable wout(alpha_prime, n, w.V.grading());
  CoreInput in;
  in.v = &w.V;
  in.b = w.B.truncated(n);
  in.t0 = s;
  in.tau = tau;
  in.k = k.padded(n);
  in.K = table.K;
  in.T = T;
  in.input_norm = norm_alpha(in.k, alpha, w.V.grading());
  in.out_norm = [&wout](std::span<const double> x) { return norm_alpha(x, wout); };
  run_core(in, opts, res);
  return res;
}

EvolutionResult backward_evolve(const WConfig& w, const ScaleVector& k, double s, double t, double alpha,
                                double alpha_prime, const EvolveOptions& opts) {
  check_levels(w, alpha, alpha_prime);
  if (t < s) fail(ErrorCode::TimeOrderViolation, "backward evolution requires s <= t");
  const double tau = t - s;
  const std::size_t n = w.V.dimension();
  const HorizonTable table = horizon_table(w, alpha, alpha_prime, opts.grid_fill);
  const double T = existence_time(alpha_prime, alpha, table);
  check_horizon(tau, T, opts);

  EvolutionResult res;
  res.alpha = alpha;
  res.alpha_prime = alpha_prime;
  res.s = s;
  res.t = t;
  res.majorant = table.M;
  if (k.tail_bound() > 0.0) {
    if (k.tail_alpha() < alpha) fail(ErrorCode::InvalidInput, "input tail certificate is below the source level alpha");
    res.input_tail = amplification(table.K, T, tau) * k.tail_bound();
  }
  const WeightTable wout(alpha_prime, n, w.V.grading());
  // sigma = t - s' turns the backward problem into a forward one with B(t - sigma).
  CoreInput in;
  in.v = &w.V;
  in.b = w.B.truncated(n).reversed(t);
  in.t0 = 0.0;
  in.tau = tau;
  in.k = k.padded(n);
  in.K = table.K;
  in.T = T;
  in.input_norm = norm_alpha(in.k, alpha, w.V.grading());
  in.out_norm = [&wout](std::span<const double> x) { return norm_alpha(x, wout); };
  run_core(in, opts, res);
  if (opts.keep_trajectory) {
    for (auto& time : res.times) time = t - time;
  }
  res.extra["direction"] = "backward";
  return res;
}

EvolutionResult dual_evolve(const WConfig& w, const DualVector& l, double s, double t, double alpha,
                            double alpha_prime, const EvolveOptions& opts) {
  check_levels(w, alpha, alpha_prime);
  if (t < s) fail(ErrorCode::TimeOrderViolation, "dual evolution requires s <= t");
  const double tau = t - s;
  const std::size_t n = w.V.dimension();
  const HorizonTable table = horizon_table(w, alpha, alpha_prime, opts.grid_fill);
  const double T = existence_time(alpha_prime, alpha, table);
  check_horizon(tau, T, opts);

  EvolutionResult res;
  res.dual = true;
  res.alpha = alpha;
  res.alpha_prime = alpha_prime;
  res.s = s;
  res.t = t;
  res.majorant = table.M;
  const Grading& grading = w.V.grading();
  const Propagator v_adj = w.V.adjoint();
  CoreInput in;
  in.v = &v_adj;
  in.b = w.B.truncated(n).adjoint(grading).reversed(t);
  in.t0 = 0.0;
  in.tau = tau;
  in.k = l.padded(n);
  in.K = table.K;
  in.T = T;
  in.input_norm = dual_norm(in.k, alpha_prime, grading);
  in.out_norm = [&grading, alpha](std::span<const double> x) { return dual_norm(x, alpha, grading); };
  run_core(in, opts, res);
  if (opts.keep_trajectory) {
    for (auto& time : res.times) time = t - time;
  }
  return res;
}

ResidualReport evolution_property_residual(const WConfig& w, double s, double r, double t, double alpha,
                                           double alpha_mid, double alpha_prime, const ScaleVector& k,
                                           const EvolveOptions& opts) {
  if (!(alpha_prime < alpha_mid && alpha_mid < alpha)) {
    fail(ErrorCode::InvalidScalePair, "evolution property requires alpha' < alpha'' < alpha");
  }
  if (!(s <= r && r <= t)) fail(ErrorCode::TimeOrderViolation, "evolution property requires s <= r <= t");
  const auto whole = forward_evolve(w, k, s, t, alpha, alpha_prime, opts);
  const auto first = forward_evolve(w, k, s, r, alpha, alpha_mid, opts);
  const auto second = forward_evolve(w, first.vector(), r, t, alpha_mid, alpha_prime, opts);
  ResidualReport rep;
  rep.residual = norm_alpha(difference(whole.value, second.value), alpha_prime, w.V.grading());
  rep.budget = whole.total_error() + second.total_error() + amplification(second.K, second.T, t - r) * first.total_error();
  return rep;
}

nlohmann::ordered_json StabilityReport::to_json() const {
  nlohmann::ordered_json j;
  j["measured"] = measured;
  j["bound"] = bound;
  j["budget"] = budget;
  j["C_W"] = C_W;
  j["perturbation_integral"] = perturbation_integral;
  j["within_bound"] = measured <= bound + budget;
  return j;
}

StabilityReport stability_compare(const WConfig& w1, const WConfig& w2, double s, double t, double alpha,
                                  double alpha1, double alpha0, double alpha_prime, const ScaleVector& k,
                                  const EvolveOptions& opts) {
  if (!(alpha_prime < alpha0 && alpha0 < alpha1 && alpha1 < alpha)) {
    fail(ErrorCode::InvalidScalePair, "stability comparison requires alpha' < alpha0 < alpha1 < alpha");
  }
  if (t < s) fail(ErrorCode::TimeOrderViolation, "stability comparison requires t >= s");
  const double tau = t - s;
  const auto r1 = forward_evolve(w1, k, s, t, alpha, alpha_prime, opts);
  const auto r2 = forward_evolve(w2, k, s, t, alpha, alpha_prime, opts);
  const std::size_t n = std::max(r1.value.size(), r2.value.size());
  auto v1 = r1.value;
  auto v2 = r2.value;
  v1.resize(n, 0.0);
  v2.resize(n, 0.0);
  const Grading& grading = w1.V.grading();

  StabilityReport rep;
  rep.measured = norm_alpha(difference(v1, v2), alpha_prime, grading);
  rep.budget = r1.total_error() + r2.total_error();

  // W(r, s) maps E_alpha to E_alpha1, the generator difference E_alpha1 to E_alpha0, and
  // W~(t, r) maps E_alpha0 to E_alpha'.
  const auto table1 = horizon_table(w1, alpha, alpha1, opts.grid_fill);
  const auto table2 = horizon_table(w2, alpha0, alpha_prime, opts.grid_fill);
  const double T1 = existence_time(alpha1, alpha, table1);
  const double T2 = existence_time(alpha_prime, alpha0, table2);
  if (!(tau < T1) || !(tau < T2)) {
    fail(ErrorCode::ExistenceHorizonExceeded, "stability bound needs the span below both intermediate horizons");
  }
  rep.C_W = amplification(table1.K, T1, tau) * amplification(table2.K, T2, tau);

  const std::size_t dim = std::max(w1.V.dimension(), w2.V.dimension());
  const OperatorMatrix dA = (w1.V.generator_matrix() - w2.V.generator_matrix()).truncated(dim);
  const double normA = operator_norm(dA, alpha1, alpha0, grading);
  const OperatorFamily dB = w1.B.truncated(dim) - w2.B.truncated(dim);
  double intB = 0.0;
  if (tau > 0.0 && !dB.is_zero()) {
    if (dB.is_constant()) {
      intB = tau * operator_norm(dB.at(s), alpha1, alpha0, grading);
    } else {
      const int m = 64;
      const double h = tau / m;
      for (int i = 0; i <= m; ++i) {
        const double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        intB += wgt * operator_norm(dB.at(s + i * h), alpha1, alpha0, grading);
      }
      intB *= h / 3.0;
    }
  }
  rep.perturbation_integral = tau * normA + intB;
  rep.bound = rep.C_W * norm_alpha(k.padded(std::max(k.support_len(), dim)), alpha, grading) * rep.perturbation_integral;
  return rep;
}

EvolutionResult global_evolve(const WConfig& w, const ScaleVector& k, double s, double t, double alpha_prime,
                              const GlobalOptions& gopts, const EvolveOptions& opts) {
  if (t < s) fail(ErrorCode::TimeOrderViolation, "global evolution requires t >= s");
  if (!(alpha_prime > w.alpha_star)) fail(ErrorCode::InvalidScalePair, "alpha' must exceed alpha_*");
  const double tau = t - s;
  const double ceiling = gopts.alpha_ceiling;
  if (!(ceiling > alpha_prime)) {
    throw HorizonExhaustedError("no scale headroom above alpha'", s);
  }
  const HorizonTable table = horizon_table(w, ceiling, alpha_prime, opts.grid_fill);
  const double m_star = table.M.sup();
  const double rho_target = std::min(0.5, opts.rho_max);

  if (m_star == 0.0 || tau == 0.0) {
    auto res = forward_evolve(w, k, s, t, ceiling, alpha_prime, opts);
    res.extra["strategy"] = "direct";
    res.extra["M_star"] = m_star;
    return res;
  }

  const double alpha_T = alpha_prime + 2.0 * std::numbers::e * table.K * m_star * tau / rho_target;
  if (alpha_T <= ceiling && gopts.steps <= 1) {
    auto res = forward_evolve(w, k, s, t, alpha_T, alpha_prime, opts);
    res.extra["strategy"] = "single";
    res.extra["alpha_T"] = alpha_T;
    res.extra["M_star"] = m_star;
    return res;
  }

  const double T0 = existence_time(alpha_prime, ceiling, table);
  const double max_step = rho_target * T0;
  const auto required = static_cast<long long>(std::ceil(tau / max_step * (1.0 - 1e-12)));
  long long steps = std::max<long long>(1, required);
  if (gopts.steps > 0) {
    steps = gopts.steps >= required ? gopts.steps
                                    : static_cast<long long>(gopts.steps) * ((required + gopts.steps - 1) / gopts.steps);
  }
  constexpr long long kMaxSteps = 100000;
  if (steps > kMaxSteps) {
    throw HorizonExhaustedError("requested span needs more than " + std::to_string(kMaxSteps) + " re-anchored steps",
                                s + static_cast<double>(kMaxSteps) * max_step);
  }

  // Errors made early are carried to t by the logarithmic norm of the full generator.
  double mu = -kInf;
  const OperatorMatrix a = w.V.generator_matrix();
  const OperatorFamily b_trunc = w.B.truncated(w.V.dimension());
  for (const auto& member : b_trunc.members()) {
    mu = std::max(mu, log_norm(a + member, alpha_prime, w.V.grading()));
  }
  if (w.B.members().empty()) mu = log_norm(a, alpha_prime, w.V.grading());

  EvolutionResult total;
  total.alpha = ceiling;
  total.alpha_prime = alpha_prime;
  total.s = s;
  total.t = t;
  total.K = table.K;
  total.T = T0;
  total.majorant = table.M;
  total.input_norm = norm_alpha(k.entries(), ceiling, w.V.grading());
  ScaleVector cur = k;
  double max_rho = 0.0;
  for (long long i = 0; i < steps; ++i) {
    const double ti = s + tau * static_cast<double>(i) / static_cast<double>(steps);
    const double tn = i + 1 == steps ? t : s + tau * static_cast<double>(i + 1) / static_cast<double>(steps);
    const auto step = forward_evolve(w, cur, ti, tn, ceiling, alpha_prime, opts);
    const double carry = std::exp(mu * (t - tn));
    total.series_tail += carry * step.series_tail;
    total.quad_error += carry * step.quad_error;
    total.input_tail += carry * step.input_tail;
    total.n_terms = std::max(total.n_terms, step.n_terms);
    total.panels = std::max(total.panels, step.panels);
    max_rho = std::max(max_rho, step.rho);
    cur = step.vector();
    total.value = step.value;
  }
  total.rho = max_rho;
  total.extra["strategy"] = "stepped";
  total.extra["steps"] = steps;
  total.extra["M_star"] = m_star;
  total.extra["log_norm"] = mu;
  return total;
}

}  // namespace scaleevo
