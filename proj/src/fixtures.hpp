#pragma once

// Seeded random instances shared by the unit tests and the verification suite.

#include <cstddef>

#include "evolution_core.hpp"
#include "logistic_model.hpp"
#include "ode_system.hpp"
#include "ovcyannikov.hpp"
#include "random.hpp"

namespace scaleevo {

struct BandSystem {
  WConfig w;
  ScaleVector k;
  double alpha = 1.0;
  double alpha_prime = 0.0;
};

// Diagonal death rates d_n in [0.5, 2] (1 + n/32) and a banded perturbation whose entries grow
// linearly with the column index. Every other instance makes B(t) piecewise linear in t.
BandSystem random_band_system(Rng& rng, std::size_t n, bool time_dependent);

// A random band matrix with the given numbers of sub- and super-diagonals.
OperatorMatrix random_band_matrix(Rng& rng, std::size_t n, int lower, int upper, double scale, double growth);

// dy/dt = (A + B(t)) y for the working truncation of w.
OdeRhs full_rhs(const WConfig& w);
// dy/dt = -(A + B(t))^* y for the adjoint system, integrated from t down to s.
OdeRhs adjoint_rhs(const WConfig& w);

// d_n = 1.5 n + 0.5 with B = number operator + 0.5 * lowering with weights k; M is bounded.
BandSystem number_operator_system(std::size_t n);

// d_n = 1 + n/4, births b_{n+1,n} = 0.3 d_n, and a coupling c_nk = 0.2 e^{-|n-k|} on |n-k| <= 3.
OdeModel decaying_band_model(std::size_t n);
// Only index-lowering entries: b_{n-1,n} = 0.3 d_n and c_{n-j,n} = 0.1 for j = 1, 2, so the
// span of the first N unit vectors is invariant for every N.
OdeModel lowering_model(std::size_t n);

// Symmetric kernel: uniform [0, 1] samples under a Gaussian envelope of random width.
std::vector<double> random_kernel(Rng& rng, std::size_t cells, double spacing);
// Permutation-symmetric hierarchy with uniform [-1, 1] entries on orders up to data_max and
// zeros above.
Hierarchy random_hierarchy(Rng& rng, HierarchyKind kind, std::size_t cells, double spacing, int n_max, int data_max);
// Random kernels with a^- = theta a^+ + excess, so the stability condition holds with b = 0.
LogisticParams random_logistic_params(Rng& rng, std::size_t cells, double spacing);
// m = 1, theta = 2, b = 0, Gaussian a^+ of width 0.1, and a^- = 2 a^+ plus a narrower Gaussian.
LogisticParams reference_logistic_params(std::size_t cells);

}  // namespace scaleevo
