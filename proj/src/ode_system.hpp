#pragma once

// Infinite linear ODE systems du_n/dt = sum_k a_nk u_k with a = -diag(d) + b + c, where b is
// relatively bounded by the death rates and c satisfies an Ovcyannikov bound. The system is
// held on a finite working truncation large enough for every requested study.

#include <cstddef>
#include <string>
#include <vector>

#include "evolution_core.hpp"
#include "json.hpp"
#include "ovcyannikov.hpp"
#include "scale_operator.hpp"

namespace scaleevo {

struct OdeModel {
  DiagonalGenerator d;
  OperatorMatrix b;
  OperatorMatrix c;
  double alpha_star = 0.0;
  std::vector<double> alpha_grid;
  std::vector<double> nu_grid;
  double safety = 1.1;

  std::size_t dimension() const noexcept { return d.size(); }
  OdeModel truncated(std::size_t n) const;
  // -diag(d) + b + c on the working truncation.
  OperatorMatrix full_generator() const;
  // -diag(d) + b on the working truncation.
  OperatorMatrix unperturbed_generator() const;
};

struct ValidationReport {
  bool positive_rates = true;
  std::vector<double> alpha_grid;
  std::vector<double> q;
  std::vector<bool> e2_pass;
  std::vector<double> nu_grid;
  std::vector<double> e3_sup;
  std::vector<bool> e3_growing;
  MajorantM c_majorant;
  bool e4_grid_dependent = false;
  std::vector<std::pair<std::size_t, double>> e4_by_dimension;

  bool all_pass() const;
  nlohmann::ordered_json to_json() const;
};

ValidationReport validate_conditions(const OdeModel& m, const std::vector<double>& alpha_grid,
                                     const std::vector<double>& nu_grid);

// Evolution system for the model: V from -diag(d) + b (diagonal when b = 0), B = c.
// The contraction certificate is sampled on [0, tau_max] at the given levels.
WConfig model_wconfig(const OdeModel& m, const std::vector<double>& alphas, double tau_max, KCertificate* cert = nullptr);

EvolutionResult solve_system(const OdeModel& m, const ScaleVector& x, double alpha, double alpha_prime, double t,
                             const EvolveOptions& opts = {});

struct StudyReport {
  std::vector<std::size_t> N;
  std::vector<double> e_N;
  std::size_t N_ref = 0;
  int panels = 0;
  int n_terms = 0;
  double T = 0.0;
  double reference_error = 0.0;
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

StudyReport truncation_study(const OdeModel& m, const ScaleVector& x, double alpha, double alpha_prime, double t,
                             const std::vector<std::size_t>& N_list, const EvolveOptions& opts = {});

}  // namespace scaleevo
