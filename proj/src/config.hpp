#pragma once

// Model files in YAML. An ODE model lists the death rates, the relatively bounded part b, the
// coupling c (optionally scaled by a time schedule), the initial vector and a functional. A
// logistic model lists the grid, the rates, both kernels, the initial hierarchy and the
// sampler for the stability condition. Unknown keys and malformed values are rejected with
// a file:line:column diagnostic.

#include <optional>
#include <string>
#include <vector>

#include "logistic_model.hpp"
#include "ode_system.hpp"
#include "ovcyannikov.hpp"

namespace scaleevo {

enum class ModelKind { Ode, Logistic };

struct CouplingSchedule {
  std::vector<double> times;
  std::vector<double> scales;
  Interpolation interpolation = Interpolation::Linear;
};

struct ModelConfig {
  ModelKind kind = ModelKind::Ode;
  std::string source;

  OdeModel ode;
  std::optional<CouplingSchedule> schedule;
  std::vector<double> initial;
  std::vector<double> functional;

  LogisticParams logistic;
  int n_max = 2;
  std::optional<Hierarchy> hierarchy;
  GSampler sampler;
};

// Throws Error(ConfigError) with "source:line:column: message".
ModelConfig parse_model(const std::string& text, const std::string& source = "<model>",
                        const std::string& base_dir = ".");
ModelConfig load_model(const std::string& path);

// The coupling as an operator family: constant, or c scaled by the schedule.
OperatorFamily coupling_family(const ModelConfig& cfg);
// V from -diag(d) + b with its contraction certificate, B from coupling_family.
WConfig ode_wconfig(const ModelConfig& cfg, const std::vector<double>& alphas, double tau_max,
                    KCertificate* cert = nullptr);

}  // namespace scaleevo
