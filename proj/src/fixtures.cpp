#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace scaleevo {

OperatorMatrix random_band_matrix(Rng& rng, std::size_t n, int lower, int upper, double scale, double growth) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < n; ++k) {
    for (int off = -upper; off <= lower; ++off) {
      const auto row = static_cast<long long>(k) + off;
      if (row < 0 || row >= static_cast<long long>(n)) continue;
      const double v = scale * rng.uniform(-1.0, 1.0) * (1.0 + growth * static_cast<double>(k));
      t.push_back({static_cast<std::size_t>(row), k, v});
    }
  }
  return OperatorMatrix::from_triplets(std::move(t), n, std::max(lower, upper));
}

BandSystem random_band_system(Rng& rng, std::size_t n, bool time_dependent) {
  BandSystem sys;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = rng.uniform(0.5, 2.0) * (1.0 + static_cast<double>(i) / 32.0);
  sys.w.V = Propagator::diagonal(DiagonalGenerator(d));
  const auto b0 = random_band_matrix(rng, n, 2, 2, 0.3, 0.05);
  if (time_dependent) {
    const auto b1 = random_band_matrix(rng, n, 2, 2, 0.3, 0.05);
    sys.w.B = OperatorFamily({0.0, 1.0}, {b0, b1}, Interpolation::Linear);
  } else {
    sys.w.B = OperatorFamily(b0);
  }
  sys.w.alpha_star = -1.0;
  sys.w.alpha_grid = {-0.5, 0.0, 0.25, 0.5, 0.75, 1.0};
  sys.w.safety = 1.1;
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = rng.uniform(-1.0, 1.0) * std::exp(-1.5 * static_cast<double>(i));
  sys.k = ScaleVector(std::move(k));
  sys.alpha = 1.0;
  sys.alpha_prime = 0.0;
  return sys;
}

OdeRhs full_rhs(const WConfig& w) {
  const std::size_t n = w.V.dimension();
  const OperatorMatrix a = w.V.generator_matrix().truncated(n);
  const OperatorFamily b = w.B.truncated(n);
  return [a, b](double t, std::span<const double> y, std::span<double> dy) {
    std::fill(dy.begin(), dy.end(), 0.0);
    a.multiply_add(y, dy);
    b.multiply_add(t, y, dy);
  };
}

OdeRhs adjoint_rhs(const WConfig& w) {
  const std::size_t n = w.V.dimension();
  const Grading& g = w.V.grading();
  const OperatorMatrix a = w.V.generator_matrix().truncated(n).adjoint(g);
  const OperatorFamily b = w.B.truncated(n).adjoint(g);
  return [a, b](double t, std::span<const double> y, std::span<double> dy) {
    std::fill(dy.begin(), dy.end(), 0.0);
    a.multiply_add(y, dy, -1.0);
    b.multiply_add(t, y, dy, -1.0);
  };
}

BandSystem number_operator_system(std::size_t n) {
  BandSystem sys;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = 1.5 * static_cast<double>(i) + 0.5;
  sys.w.V = Propagator::diagonal(DiagonalGenerator(d));
  std::vector<Triplet> t;
  for (std::size_t k = 1; k < n; ++k) {
    t.push_back({k, k, static_cast<double>(k)});
    t.push_back({k - 1, k, 0.5 * static_cast<double>(k)});
  }
  sys.w.B = OperatorFamily(OperatorMatrix::from_triplets(std::move(t), n, 1));
  sys.w.alpha_star = -1.0;
  sys.w.alpha_grid = {};
  sys.w.safety = 1.1;
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = std::exp(-2.0 * static_cast<double>(i));
  sys.k = ScaleVector(std::move(k));
  sys.alpha = 1.0;
  sys.alpha_prime = 0.0;
  return sys;
}

OdeModel decaying_band_model(std::size_t n) {
  OdeModel m;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = 1.0 + static_cast<double>(i) / 4.0;
  std::vector<Triplet> b;
  std::vector<Triplet> c;
  for (std::size_t k = 0; k < n; ++k) {
    if (k + 1 < n) b.push_back({k + 1, k, 0.3 * d[k]});
    for (int off = -3; off <= 3; ++off) {
      const auto row = static_cast<long long>(k) + off;
      if (row < 0 || row >= static_cast<long long>(n)) continue;
      c.push_back({static_cast<std::size_t>(row), k, 0.2 * std::exp(-std::abs(off))});
    }
  }
  m.d = DiagonalGenerator(std::move(d));
  m.b = OperatorMatrix::from_triplets(std::move(b), n, 1);
  m.c = OperatorMatrix::from_triplets(std::move(c), n, 3);
  m.alpha_star = -1.0;
  m.alpha_grid = {-0.5, 0.0, 0.125, 0.25};
  m.nu_grid = {0.1, 0.5, 1.0};
  m.safety = 1.1;
  return m;
}

OdeModel lowering_model(std::size_t n) {
  OdeModel m;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = 1.0 + static_cast<double>(i) / 4.0;
  std::vector<Triplet> b;
  std::vector<Triplet> c;
  for (std::size_t k = 1; k < n; ++k) {
    b.push_back({k - 1, k, 0.3 * d[k]});
    c.push_back({k - 1, k, 0.1});
    if (k >= 2) c.push_back({k - 2, k, 0.1});
  }
  m.d = DiagonalGenerator(std::move(d));
  m.b = OperatorMatrix::from_triplets(std::move(b), n, 1);
  m.c = OperatorMatrix::from_triplets(std::move(c), n, 2);
  m.alpha_star = -1.0;
  m.alpha_grid = {-0.5, 0.0, 0.5, 1.0};
  m.nu_grid = {0.1, 0.5, 1.0};
  m.safety = 1.1;
  return m;
}

std::vector<double> random_kernel(Rng& rng, std::size_t cells, double spacing) {
  const double width = rng.uniform(1.0, 4.0) * spacing;
  std::vector<double> a(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const double x = static_cast<double>(std::min(j, cells - j)) * spacing;
    a[j] = rng.uniform() * std::exp(-x * x / (2.0 * width * width));
  }
  return symmetrize_kernel(std::move(a));
}

Hierarchy random_hierarchy(Rng& rng, HierarchyKind kind, std::size_t cells, double spacing, int n_max, int data_max) {
  Hierarchy h = Hierarchy::zeros(kind, cells, spacing, n_max);
  for (int n = 0; n <= std::min(n_max, data_max); ++n) {
    for (double& v : h.comps[static_cast<std::size_t>(n)]) v = rng.uniform(-1.0, 1.0);
  }
  h.symmetrize();
  return h;
}

LogisticParams random_logistic_params(Rng& rng, std::size_t cells, double spacing) {
  LogisticParams p;
  p.cells = cells;
  p.spacing = spacing;
  p.m = rng.uniform(0.0, 2.0);
  p.theta = rng.uniform(0.5, 3.0);
  p.b = 0.0;
  p.a_plus = random_kernel(rng, cells, spacing);
  const auto excess = random_kernel(rng, cells, spacing);
  p.a_minus.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) p.a_minus[j] = p.theta * p.a_plus[j] + excess[j];
  p.a_minus = symmetrize_kernel(std::move(p.a_minus));
  return p;
}

LogisticParams reference_logistic_params(std::size_t cells) {
  LogisticParams p;
  p.cells = cells;
  p.spacing = 1.0 / static_cast<double>(cells);
  p.m = 1.0;
  p.theta = 2.0;
  p.b = 0.0;
  p.a_plus = named_kernel("gaussian", cells, p.spacing, 1.0, 0.1);
  const auto narrow = named_kernel("gaussian", cells, p.spacing, 0.5, 0.05);
  p.a_minus.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) p.a_minus[j] = p.theta * p.a_plus[j] + narrow[j];
  return p;
}

}  // namespace scaleevo
