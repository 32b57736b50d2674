#pragma once

// The unperturbed evolution system V(t, s) = V(t - s): diagonal semigroups with exact
// exponentials, truncated-matrix semigroups applied through a scaled Taylor expansion, an
// independent Dormand-Prince integrator used as ground truth, and residuals of the
// integral identities that V must satisfy.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "scale_operator.hpp"
#include "scale_space.hpp"

namespace scaleevo {

class DiagonalGenerator {
 public:
  DiagonalGenerator() = default;
  explicit DiagonalGenerator(std::vector<double> d);

  const std::vector<double>& rates() const noexcept { return d_; }
  std::size_t size() const noexcept { return d_.size(); }

 private:
  std::vector<double> d_;
};

enum class PropagatorKind { Diagonal, TruncatedMatrix };

// Action of V(h) for one fixed step h, reused across many vectors.
class StepOperator {
 public:
  void apply(std::span<const double> in, std::span<double> out) const;
  std::size_t substeps() const noexcept { return substeps_; }

 private:
  friend class Propagator;
  PropagatorKind kind_ = PropagatorKind::Diagonal;
  std::vector<double> factors_;
  const OperatorMatrix* generator_ = nullptr;
  double h_ = 0.0;
  std::size_t substeps_ = 1;
};

class Propagator {
 public:
  Propagator() = default;
  static Propagator diagonal(DiagonalGenerator g, const Grading& grading = {});
  // V(t) = exp(t G) on the n x n truncation of G.
  static Propagator truncated_matrix(const OperatorMatrix& generator, std::size_t n, const Grading& grading = {});

  PropagatorKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return n_; }
  double K() const noexcept { return K_; }
  void set_K(double k);
  const Grading& grading() const noexcept { return grading_; }
  const std::vector<double>& rates() const noexcept { return rates_; }
  const OperatorMatrix& generator() const noexcept { return generator_; }
  // The generator as a sparse matrix (for diagonal kinds, -diag(d)).
  OperatorMatrix generator_matrix() const;

  // Substep count for the Taylor expansion of one step h; diagonal kinds return 1.
  std::size_t default_substeps(double h) const;
  StepOperator step(double h, std::size_t substeps = 0) const;
  std::vector<double> apply(double tau, std::span<const double> u) const;

  // Adjoint with respect to the measure pairing; K carries over for the dual norm.
  Propagator adjoint() const;
  Propagator truncated(std::size_t n) const;
  // Same semigroup with generator G + delta restricted to the working dimension.
  Propagator perturbed(const OperatorMatrix& delta) const;

  nlohmann::ordered_json to_json() const;

 private:
  PropagatorKind kind_ = PropagatorKind::Diagonal;
  std::size_t n_ = 0;
  std::vector<double> rates_;
  OperatorMatrix generator_;
  double generator_norm_ = 0.0;
  double K_ = 1.0;
  Grading grading_;
};

ScaleVector diag_propagate(const DiagonalGenerator& g, double s, double t, const ScaleVector& u);

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct OracleStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Dormand-Prince 5(4) from t0 to t1 (either direction) with error-per-unit-step control
// against rtol = tol and atol = 1e-3 * tol * max|y0|.
std::vector<double> oracle_integrate(const OdeRhs& rhs, std::vector<double> y0, double t0, double t1, double tol,
                                     OracleStats* stats = nullptr);

// du/dt = a u on the N x N truncation of a.
ScaleVector oracle_propagate(const OperatorMatrix& a, std::size_t n, double s, double t, const ScaleVector& u,
                             double tol);

enum class Direction { Forward, Backward };

// Norm at alpha' of V(t,s)u - u - int_s^t A V(r,s) u dr (forward) or of
// V(t,s)u - u - int_s^t V(t,r) A u dr (backward), by composite Simpson with `panels` panels.
double residual_A3(const Propagator& v, const OperatorMatrix& a, double s, double t, const ScaleVector& u,
                   Direction direction, double alpha, double alpha_mid, double alpha_prime, int panels = 64);

// Weighted-l1 logarithmic norm sup_k [g_kk + sum_{n != k} |g_nk| w_n / w_k] at level alpha.
double log_norm(const OperatorMatrix& g, double alpha, const Grading& grading = {});

struct KCertificate {
  double K = 1.0;
  double sampled_max = 1.0;
  double log_norm_max = 0.0;
  bool contraction_by_log_norm = true;
  bool sampled = true;
};

// Samples ||V(tau)||_{alpha -> alpha} on tau = tau_max * j / samples and the given alphas.
// A nonpositive logarithmic norm at every alpha certifies K = 1; otherwise K is the sampled
// maximum inflated by 5 %.
// Above kSampleDimension the column sampling is skipped when the log-norm already certifies
// a contraction; sampled_max then carries the certified value 1.
inline constexpr std::size_t kSampleDimension = 512;
KCertificate estimate_K(const Propagator& v, const std::vector<double>& alphas, double tau_max, int samples = 8);

}  // namespace scaleevo
