#pragma once

// Spatial logistic birth-and-death model on a periodic one-dimensional grid: quasi-observable
// and correlation hierarchies, the K-transform, Lebesgue-Poisson integration, the stability
// condition on the kernels, the norm estimates for the generator parts, and hierarchy
// evolution through the perturbation series.
//
// A hierarchy component of order n is stored on all n-tuples of grid cells (coincident cells
// included) in row-major order. Integrals over the continuum become h-weighted sums, so the
// Lebesgue-Poisson measure of an n-tuple is h^n / n!.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ovcyannikov.hpp"
#include "scale_operator.hpp"
#include "scale_space.hpp"

namespace scaleevo {

// Kernel samples a[j] = a(j h) for j = 0..L-1 with periodic differences.
std::vector<double> symmetrize_kernel(std::vector<double> a);
// "gaussian": amplitude e^{-x^2 / (2 width^2)}; "tophat": amplitude on |x| <= width.
// x is the periodic distance of the cell from the origin.
std::vector<double> named_kernel(const std::string& name, std::size_t cells, double spacing, double amplitude,
                                 double width);
double kernel_sup(std::span<const double> a);
double kernel_l1(std::span<const double> a, double spacing);

struct LogisticParams {
  double m = 0.0;
  std::vector<double> a_plus;
  std::vector<double> a_minus;
  double theta = 1.0;
  double b = 0.0;
  std::size_t cells = 0;
  double spacing = 1.0;

  // Throws InvalidInput on a negative or asymmetric kernel, a size mismatch, theta <= 0,
  // b < 0, m < 0 or a nonpositive spacing.
  void validate() const;
  double alpha_star() const;
  nlohmann::ordered_json to_json() const;
};

class HierarchyLayout {
 public:
  HierarchyLayout() = default;
  HierarchyLayout(std::size_t cells, int n_max, double spacing);

  std::size_t cells() const noexcept { return cells_; }
  int n_max() const noexcept { return n_max_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t level_size(int n) const { return sizes_.at(static_cast<std::size_t>(n)); }
  std::size_t offset(int n) const { return offsets_.at(static_cast<std::size_t>(n)); }
  std::size_t total() const noexcept { return offsets_.empty() ? 0 : offsets_.back() + sizes_.back(); }

  // Row-major index of a tuple within its level.
  std::size_t local_index(std::span<const std::size_t> tuple) const;
  std::size_t flat_index(std::span<const std::size_t> tuple) const;
  void decode(int n, std::size_t local, std::span<std::size_t> tuple) const;
  // Level n and measure h^n / n! for every flat entry.
  Grading grading() const;

 private:
  std::size_t cells_ = 0;
  int n_max_ = 0;
  double spacing_ = 1.0;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
};

enum class HierarchyKind { Correlation, QuasiObservable };

const char* hierarchy_kind_name(HierarchyKind kind) noexcept;

struct Hierarchy {
  HierarchyKind kind = HierarchyKind::QuasiObservable;
  std::size_t cells = 0;
  double spacing = 1.0;
  std::vector<std::vector<double>> comps;

  static Hierarchy zeros(HierarchyKind kind, std::size_t cells, double spacing, int n_max);
  static Hierarchy from_flat(HierarchyKind kind, const HierarchyLayout& layout, std::span<const double> flat);

  int n_max() const noexcept { return static_cast<int>(comps.size()) - 1; }
  HierarchyLayout layout() const { return HierarchyLayout(cells, n_max(), spacing); }
  double value(std::span<const std::size_t> tuple) const;
  std::vector<double> flatten() const;
  // Replaces every entry by the entry at its sorted tuple.
  void symmetrize();
  // Largest |H(x) - H(x')| with x' a transposition of x, over all tuples and transpositions.
  double symmetry_defect() const;

  nlohmann::ordered_json to_json() const;
  static Hierarchy from_json(const nlohmann::json& j);
  // One row per entry: n, x1..x_{n_max} (blank past n), value.
  std::string to_csv() const;
};

// sum_n h^n / n! sum_tuples H^(n) e^{alpha n}.
double lp_integral(const Hierarchy& g, double alpha);
// lp_integral of |H|: the L_alpha norm of a quasi-observable.
double lp_norm(const Hierarchy& g, double alpha);
// sup_n sup_tuples |k^(n)| e^{-alpha n}: the K_alpha norm of a correlation function.
double correlation_norm(const Hierarchy& k, double alpha);
// <G, k> = sum_n h^n / n! sum_tuples G^(n) k^(n).
double hierarchy_pairing(const Hierarchy& g, const Hierarchy& k);

struct KTransformValue {
  double value = 0.0;
  // Set when |gamma| exceeds n_max while the top component is nonzero.
  bool truncation_unsound = false;
};

// (KG)(gamma) = sum over sub-configurations of gamma of G.
KTransformValue k_transform(const Hierarchy& g, std::span<const std::size_t> gamma);
// (K^{-1}F)(eta) = sum_{xi subset eta} (-1)^{|eta \ xi|} F(xi).
double k_inverse(const std::function<double(std::span<const std::size_t>)>& f, std::span<const std::size_t> eta);

struct GSampler {
  int n_max = 6;
  int samples = 2000;
  std::uint64_t seed = 1;
};

struct GReport {
  double min_margin = 0.0;
  std::vector<std::size_t> worst_config;
  bool pass = true;
  int configurations = 0;
  // min over offsets j != 0 of a^-(j) - theta a^+(j) + b.
  double pair_min = 0.0;
  std::size_t pair_worst_offset = 0;
  bool pair_pass = true;
  nlohmann::ordered_json to_json() const;
};

// Samples sum_{x in eta} sum_{y in eta \ x} (a^-(x - y) - theta a^+(x - y)) + b |eta| over
// configurations of distinct cells. Every pair configuration is included.
GReport check_G(const LogisticParams& p, const GSampler& sampler = {});

struct ContinuumBounds {
  double L0 = 0.0;
  double L1 = 0.0;
  // Bound for L1 + b |eta|.
  double L1b = 0.0;
  nlohmann::ordered_json to_json() const;
};

ContinuumBounds continuum_bounds(const LogisticParams& p, double alpha, double alpha_prime);

// Grid realizations on the hierarchy truncated at n_max. Terms whose output would lie above
// n_max are dropped; closure_defect measures what was dropped for a given input.
struct DiscreteOperators {
  HierarchyLayout layout;
  OperatorMatrix lhat0;
  OperatorMatrix lhat1;
  OperatorMatrix ldelta0;
  OperatorMatrix ldelta1;

  OperatorMatrix lhat() const;
  OperatorMatrix ldelta() const;
};

DiscreteOperators build_discrete_operators(const LogisticParams& p, int n_max);

// Norm of the dropped order n_max + 1 output of one application: in L_alpha for a
// quasi-observable, in K_alpha for a correlation function.
double closure_defect(const LogisticParams& p, const Hierarchy& h, double alpha);

struct AppliedHierarchy {
  Hierarchy value;
  double closure_defect = 0.0;
};

// L-hat for quasi-observables, L-Delta for correlation functions.
AppliedHierarchy apply_generator(const LogisticParams& p, const DiscreteOperators& ops, const Hierarchy& h,
                                 double alpha);

// V from L-hat_0 - b|eta| and B = L-hat_1 + b|eta| on the flattened hierarchy, alpha_star = |ln theta|.
WConfig logistic_wconfig(const LogisticParams& p, const DiscreteOperators& ops, double alpha, double alpha_prime,
                         double tau_max, KCertificate* cert = nullptr);

struct HierarchyEvolveOptions {
  EvolveOptions evolve;
  double defect_tol = std::numeric_limits<double>::infinity();
};

struct HierarchyEvolution {
  Hierarchy value;
  EvolutionResult result;
  double closure_defect = 0.0;
  nlohmann::ordered_json to_json() const;
};

// Quasi-observables evolve forward with W; correlation functions evolve through the dual
// system, measured in K_alpha' at input and K_alpha at output.
HierarchyEvolution evolve_hierarchy(const LogisticParams& p, const Hierarchy& h0, double t, double alpha,
                                    double alpha_prime, const HierarchyEvolveOptions& opts = {});

}  // namespace scaleevo
