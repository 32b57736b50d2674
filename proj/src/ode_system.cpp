#include "ode_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"

namespace scaleevo {

namespace {

constexpr double kContractionSlack = 1e-6;

std::vector<double> certificate_levels(double alpha, double alpha_prime) {
  return {alpha_prime, 0.5 * (alpha + alpha_prime), alpha};
}

}  // namespace

OdeModel OdeModel::truncated(std::size_t n) const {
  OdeModel m = *this;
  auto rates = d.rates();
  rates.resize(std::min(n, rates.size()));
  m.d = DiagonalGenerator(std::move(rates));
  m.b = b.truncated(n);
  m.c = c.truncated(n);
  return m;
}

OperatorMatrix OdeModel::unperturbed_generator() const {
  const std::size_t n = dimension();
  std::vector<double> neg(n);
  for (std::size_t i = 0; i < n; ++i) neg[i] = -d.rates()[i];
  return OperatorMatrix::diagonal(neg) + b.truncated(n);
}

OperatorMatrix OdeModel::full_generator() const { return unperturbed_generator() + c.truncated(dimension()); }

bool ValidationReport::all_pass() const {
  return positive_rates && std::all_of(e2_pass.begin(), e2_pass.end(), [](bool b) { return b; });
}

nlohmann::ordered_json ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["E1_positive_rates"] = positive_rates;
  auto e2 = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    e2.push_back({{"alpha", alpha_grid[i]}, {"q", q[i]}, {"pass", static_cast<bool>(e2_pass[i])}});
  }
  j["E2"] = e2;
  auto e3 = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < nu_grid.size(); ++i) {
    e3.push_back({{"nu", nu_grid[i]}, {"sampled_sup", e3_sup[i]}, {"growing_at_edge", static_cast<bool>(e3_growing[i])}});
  }
  j["E3"] = e3;
  nlohmann::ordered_json e4;
  e4["M"] = c_majorant.to_json();
  e4["grid_dependent"] = e4_grid_dependent;
  auto dims = nlohmann::ordered_json::array();
  for (const auto& [n, v] : e4_by_dimension) dims.push_back({{"N", n}, {"M_max", v}});
  e4["by_dimension"] = dims;
  j["E4"] = e4;
  j["all_pass"] = all_pass();
  return j;
}

ValidationReport validate_conditions(const OdeModel& m, const std::vector<double>& alpha_grid,
                                     const std::vector<double>& nu_grid) {
  if (alpha_grid.empty() || nu_grid.empty()) fail(ErrorCode::InvalidInput, "validation grids must be nonempty");
  ValidationReport rep;
  const std::size_t n = m.dimension();
  const auto& d = m.d.rates();
  rep.positive_rates = std::all_of(d.begin(), d.end(), [](double x) { return x > 0.0; });

  const OperatorMatrix b = m.b.truncated(n);
  rep.alpha_grid = alpha_grid;
  for (double alpha : alpha_grid) {
    double q = 0.0;
    for (std::size_t k = 0; k < b.cols(); ++k) {
      double col = 0.0;
      for (const auto& e : b.column(k)) {
        col += std::abs(e.value) * std::exp(alpha * (static_cast<double>(e.row) - static_cast<double>(k)));
      }
      if (col == 0.0) continue;
      q = std::max(q, d[k] > 0.0 ? col / d[k] : std::numeric_limits<double>::infinity());
    }
    rep.q.push_back(q);
    rep.e2_pass.push_back(q < 1.0);
  }

  rep.nu_grid = nu_grid;
  for (double nu : nu_grid) {
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = d[i] * std::exp(-nu * static_cast<double>(i));
      if (v >= best) {
        best = v;
        arg = i;
      }
    }
    rep.e3_sup.push_back(best);
    // A supremum attained in the last eighth of the sample suggests it has not converged.
    rep.e3_growing.push_back(n > 0 && arg + std::max<std::size_t>(1, n / 8) >= n);
  }

  std::vector<double> grid = alpha_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double a) { return !(a > m.alpha_star); }), grid.end());
  if (grid.empty()) fail(ErrorCode::InvalidInput, "validation alpha grid has no level above alpha_*");
  rep.c_majorant = fit_majorant(m.c.truncated(n), m.alpha_star, grid, m.safety);
  for (std::size_t dim : {n / 4, n / 2, n}) {
    if (dim == 0) continue;
    const auto fit = fit_majorant(m.c.truncated(dim), m.alpha_star, grid, m.safety);
    rep.e4_by_dimension.emplace_back(dim, fit.sup());
  }
  if (rep.e4_by_dimension.size() >= 2) {
    const double last = rep.e4_by_dimension.back().second;
    const double before = rep.e4_by_dimension[rep.e4_by_dimension.size() - 2].second;
    rep.e4_grid_dependent = last > 1.05 * before;
  }
  return rep;
}

WConfig model_wconfig(const OdeModel& m, const std::vector<double>& alphas, double tau_max, KCertificate* cert) {
  WConfig w;
  const std::size_t n = m.dimension();
  if (m.b.truncated(n).is_zero()) {
    w.V = Propagator::diagonal(m.d);
  } else {
    w.V = Propagator::truncated_matrix(m.unperturbed_generator(), n);
    if (tau_max > 0.0) {
      const auto k = estimate_K(w.V, alphas, tau_max);
      if (cert) *cert = k;
      if (k.sampled_max > 1.0 + kContractionSlack) {
        fail(ErrorCode::ContractionCertificateFailed,
             "sampled ||V|| = " + std::to_string(k.sampled_max) + " exceeds 1; the birth part is not dominated by the death rates on this truncation");
      }
    }
  }
  w.V.set_K(1.0);
  w.B = OperatorFamily(m.c.truncated(n));
  w.alpha_star = m.alpha_star;
  w.alpha_grid = m.alpha_grid;
  w.safety = m.safety;
  return w;
}

EvolutionResult solve_system(const OdeModel& m, const ScaleVector& x, double alpha, double alpha_prime, double t,
                             const EvolveOptions& opts) {
  if (t < 0.0) fail(ErrorCode::TimeOrderViolation, "solve requires t >= 0");
  KCertificate cert;
  const WConfig w = model_wconfig(m, certificate_levels(alpha, alpha_prime), t, &cert);
  auto res = forward_evolve(w, x, 0.0, t, alpha, alpha_prime, opts);
  nlohmann::ordered_json kc;
  kc["K"] = 1.0;
  kc["sampled_max"] = cert.sampled_max;
  kc["sampled"] = cert.sampled;
  kc["log_norm_max"] = cert.log_norm_max;
  res.extra["contraction_certificate"] = kc;
  return res;
}

nlohmann::ordered_json StudyReport::to_json() const {
  nlohmann::ordered_json j;
  j["N_ref"] = N_ref;
  j["panels"] = panels;
  j["n_terms"] = n_terms;
  j["T"] = T;
  j["reference_error"] = reference_error;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < N.size(); ++i) rows.push_back({{"N", N[i]}, {"e_N", e_N[i]}});
  j["study"] = rows;
  return j;
}

std::string StudyReport::to_csv() const {
  std::ostringstream os;
  os << "N,e_N\n";
  char buf[64];
  for (std::size_t i = 0; i < N.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", N[i], e_N[i]);
    os << buf;
  }
  return os.str();
}

StudyReport truncation_study(const OdeModel& m, const ScaleVector& x, double alpha, double alpha_prime, double t,
                             const std::vector<std::size_t>& N_list, const EvolveOptions& opts) {
  if (N_list.empty()) fail(ErrorCode::InvalidInput, "truncation study needs at least one N");
  for (std::size_t i = 1; i < N_list.size(); ++i) {
    if (!(N_list[i] > N_list[i - 1])) fail(ErrorCode::InvalidInput, "N_list must be strictly increasing");
  }
  StudyReport rep;
  rep.N = N_list;
  rep.N_ref = 2 * N_list.back();
  if (rep.N_ref > m.dimension()) {
    fail(ErrorCode::InvalidInput, "model dimension " + std::to_string(m.dimension()) +
                                      " is below the reference truncation " + std::to_string(rep.N_ref));
  }
  const auto levels = certificate_levels(alpha, alpha_prime);
  const OdeModel ref_model = m.truncated(rep.N_ref);
  const ScaleVector x_ref = truncate(x, rep.N_ref, alpha);
  const WConfig w_ref = model_wconfig(ref_model, levels, t);
  EvolveOptions ref_opts = opts;
  ref_opts.keep_trajectory = true;
  const auto ref = forward_evolve(w_ref, ScaleVector(std::vector<double>(x_ref.entries().begin(), x_ref.entries().end())),
                                  0.0, t, alpha, alpha_prime, ref_opts);
  rep.panels = ref.panels;
  rep.n_terms = ref.n_terms;
  rep.T = ref.T;
  rep.reference_error = ref.total_error();
  const std::size_t substeps = w_ref.V.default_substeps(t / ref.panels);

  rep.e_N.assign(N_list.size(), 0.0);
  parallel_for(N_list.size(), [&](std::size_t idx) {
    const std::size_t n = N_list[idx];
    const OdeModel mn = m.truncated(n);
    const WConfig wn = model_wconfig(mn, levels, 0.0);
    EvolveOptions o = opts;
    o.keep_trajectory = true;
    o.fixed_panels = true;
    o.panels = ref.panels;
    o.fixed_terms = std::max(1, ref.n_terms);
    o.substeps = substeps;
    o.skip_horizon_check = true;
    const auto xn = truncate(x, n, alpha);
    const auto res = forward_evolve(wn, ScaleVector(std::vector<double>(xn.entries().begin(), xn.entries().end())), 0.0,
                                    t, alpha, alpha_prime, o);
    const WeightTable w(alpha_prime, rep.N_ref);
    double worst = 0.0;
    for (std::size_t j = 0; j < ref.trajectory.size(); ++j) {
      const auto& ur = ref.trajectory[j];
      std::vector<double> diff(ur.begin(), ur.end());
      for (std::size_t i = 0; i < n; ++i) diff[i] -= res.trajectory[j][i];
      worst = std::max(worst, norm_alpha(diff, w));
    }
    rep.e_N[idx] = worst;
  });
  return rep;
}

}  // namespace scaleevo
