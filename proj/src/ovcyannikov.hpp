#pragma once

// Perturbed evolution systems W = sum_n W_n built on top of an unperturbed V and a
// perturbation B(t) that loses regularity in the scale, together with certified horizons,
// error budgets, the backward and dual problems, stability comparison and global patching.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evolution_core.hpp"
#include "json.hpp"
#include "scale_operator.hpp"
#include "scale_space.hpp"

namespace scaleevo {

struct HorizonTable {
  double alpha_star = 0.0;
  double K = 1.0;
  MajorantM M;
};

// (alpha - alpha') / (2 K e M); +inf when M = 0.
double existence_time(double alpha_prime, double alpha, double K, double M_alpha);
double existence_time(double alpha_prime, double alpha, const HorizonTable& data);

struct EvolveOptions {
  double tol = 1e-8;
  int max_terms = 200;
  int panels = 64;
  double rho_max = 0.95;
  int max_panels = 4096;
  bool fixed_panels = false;
  int fixed_terms = 0;
  std::size_t substeps = 0;
  bool keep_trajectory = false;
  bool skip_horizon_check = false;
  int grid_fill = 24;
};

// An evolution system: unperturbed V (with its K), perturbation B(t), and the data used to
// fit the majorant of B.
struct WConfig {
  Propagator V;
  OperatorFamily B;
  double alpha_star = 0.0;
  std::vector<double> alpha_grid;
  double safety = 1.1;
};

struct EvolutionResult {
  std::vector<double> value;
  bool dual = false;
  double alpha = 0.0;
  double alpha_prime = 0.0;
  double s = 0.0;
  double t = 0.0;
  int n_terms = 0;
  int panels = 0;
  double series_tail = 0.0;
  double quad_error = 0.0;
  double input_tail = 0.0;
  double rho = 0.0;
  double T = 0.0;
  double K = 1.0;
  double input_norm = 0.0;
  std::vector<double> term_norms;
  std::vector<double> times;
  std::vector<std::vector<double>> trajectory;
  std::optional<MajorantM> majorant;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  double total_error() const noexcept { return series_tail + quad_error + input_tail; }
  ScaleVector vector() const { return ScaleVector(value); }
  DualVector dual_vector() const { return DualVector(value); }
  nlohmann::ordered_json to_json() const;
};

HorizonTable horizon_table(const WConfig& w, double alpha, double alpha_prime, int grid_fill = 24);

EvolutionResult forward_evolve(const WConfig& w, const ScaleVector& k, double s, double t, double alpha,
                               double alpha_prime, const EvolveOptions& opts = {});
// W(s, t) k for the backward system, s <= t.
EvolutionResult backward_evolve(const WConfig& w, const ScaleVector& k, double s, double t, double alpha,
                                double alpha_prime, const EvolveOptions& opts = {});
// W(t, s)^* l computed from the adjoint system; l is measured in the dual norm at alpha',
// the result at alpha.
EvolutionResult dual_evolve(const WConfig& w, const DualVector& l, double s, double t, double alpha,
                            double alpha_prime, const EvolveOptions& opts = {});

struct ResidualReport {
  double residual = 0.0;
  double budget = 0.0;
};

ResidualReport evolution_property_residual(const WConfig& w, double s, double r, double t, double alpha,
                                           double alpha_mid, double alpha_prime, const ScaleVector& k,
                                           const EvolveOptions& opts = {});

struct StabilityReport {
  double measured = 0.0;
  double bound = 0.0;
  double budget = 0.0;
  double C_W = 0.0;
  double perturbation_integral = 0.0;
  nlohmann::ordered_json to_json() const;
};

// alpha' < alpha0 < alpha1 < alpha.
StabilityReport stability_compare(const WConfig& w1, const WConfig& w2, double s, double t, double alpha,
                                  double alpha1, double alpha0, double alpha_prime, const ScaleVector& k,
                                  const EvolveOptions& opts = {});

struct GlobalOptions {
  double alpha_ceiling = 0.0;
  int steps = 0;
};

EvolutionResult global_evolve(const WConfig& w, const ScaleVector& k, double s, double t, double alpha_prime,
                              const GlobalOptions& gopts, const EvolveOptions& opts = {});

}  // namespace scaleevo
