#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "evolution_core.hpp"
#include "random.hpp"

using namespace scaleevo;

namespace {

OperatorMatrix random_generator(Rng& rng, std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < n; ++k) {
    t.push_back({k, k, -rng.uniform(1.0, 2.0) * (1.0 + k / 8.0)});
    if (k + 1 < n) t.push_back({k + 1, k, rng.uniform(0.0, 0.3)});
    if (k > 0) t.push_back({k - 1, k, rng.uniform(0.0, 0.3)});
  }
  return OperatorMatrix::from_triplets(t, n);
}

}  // namespace

TEST_CASE("diag_propagate examples") {
  const DiagonalGenerator g({0.0, 1.0, 2.0, 3.0});
  const ScaleVector u({1.0, 2.0, 3.0, 4.0});
  const auto same = diag_propagate(g, 1.0, 1.0, u);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same[i] == u[i]);
  const auto halved = diag_propagate(g, 0.0, std::log(2.0), u);
  for (std::size_t i = 0; i < 4; ++i) CHECK(halved[i] == doctest::Approx(u[i] * std::ldexp(1.0, -static_cast<int>(i))).epsilon(1e-15));
  CHECK_THROWS_AS(diag_propagate(g, 1.0, 0.0, u), Error);
}

TEST_CASE("property: diagonal propagation never amplifies and composes exactly") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> d(20), u(20);
    for (auto& x : d) x = rng.uniform(0.0, 3.0);
    for (auto& x : u) x = rng.uniform(-1.0, 1.0);
    const DiagonalGenerator g(d);
    const double s = rng.uniform(0.0, 1.0);
    const double r = s + rng.uniform(0.0, 1.0);
    const double t = r + rng.uniform(0.0, 1.0);
    const ScaleVector uv(u);
    const double alpha = rng.uniform(-1.0, 1.0);
    CHECK(norm_alpha(diag_propagate(g, s, t, uv), alpha) <= norm_alpha(uv, alpha));
    const auto direct = diag_propagate(g, s, t, uv);
    const auto composed = diag_propagate(g, r, t, diag_propagate(g, s, r, uv));
    for (std::size_t i = 0; i < 20; ++i) CHECK(composed[i] == doctest::Approx(direct[i]).epsilon(1e-14));
  }
}

TEST_CASE("oracle examples") {
  const auto scalar = oracle_propagate(OperatorMatrix::identity(1, -0.7), 1, 0.0, 2.0, ScaleVector({3.0}), 1e-10);
  CHECK(scalar[0] == doctest::Approx(3.0 * std::exp(-1.4)).epsilon(1e-9));

  const auto nil = OperatorMatrix::from_triplets({{0, 1, 1.0}}, 2);
  const auto out = oracle_propagate(nil, 2, 0.5, 2.0, ScaleVector({1.0, 2.0}), 1e-10);
  CHECK(out[0] == doctest::Approx(1.0 + 1.5 * 2.0).epsilon(1e-12));
  CHECK(out[1] == 2.0);

  std::vector<double> d{0.5, 1.0, 2.0, 4.0};
  std::vector<double> neg{-0.5, -1.0, -2.0, -4.0};
  const auto diag = oracle_propagate(OperatorMatrix::diagonal(neg), 4, 0.0, 1.0, ScaleVector({1.0, 1.0, 1.0, 1.0}), 1e-10);
  const auto exact = diag_propagate(DiagonalGenerator(d), 0.0, 1.0, ScaleVector({1.0, 1.0, 1.0, 1.0}));
  for (std::size_t i = 0; i < 4; ++i) CHECK(diag[i] == doctest::Approx(exact[i]).epsilon(1e-9));
}

TEST_CASE("oracle error shrinks at least twofold when tol halves") {
  std::vector<double> neg{-0.5, -1.0, -2.0, -4.0};
  std::vector<double> d{0.5, 1.0, 2.0, 4.0};
  const ScaleVector u({1.0, -1.0, 0.5, 2.0});
  const auto exact = diag_propagate(DiagonalGenerator(d), 0.0, 3.0, u);
  const auto rot = OperatorMatrix::from_triplets({{0, 1, 1.0}, {1, 0, -1.0}}, 2);
  const ScaleVector v({1.0, 0.0});
  for (double tol : {1e-5, 1e-6, 1e-7}) {
    const auto a = oracle_propagate(OperatorMatrix::diagonal(neg), 4, 0.0, 3.0, u, tol);
    const auto b = oracle_propagate(OperatorMatrix::diagonal(neg), 4, 0.0, 3.0, u, tol / 2.0);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      ea = std::max(ea, std::abs(a[i] - exact[i]));
      eb = std::max(eb, std::abs(b[i] - exact[i]));
    }
    CHECK(ea >= 2.0 * eb);
    // Harmonic oscillator: exact solution (cos t, -sin t).
    const auto ra = oracle_propagate(rot, 2, 0.0, 5.0, v, tol);
    const auto rb = oracle_propagate(rot, 2, 0.0, 5.0, v, tol / 2.0);
    const double fa = std::hypot(ra[0] - std::cos(5.0), ra[1] + std::sin(5.0));
    const double fb = std::hypot(rb[0] - std::cos(5.0), rb[1] + std::sin(5.0));
    CHECK(fa >= 2.0 * fb);
  }
}

TEST_CASE("oracle reports failure for budget-exceeding stiffness") {
  const auto stiff = OperatorMatrix::identity(1, -1e9);
  CHECK_THROWS_AS(oracle_propagate(stiff, 1, 0.0, 10.0, ScaleVector({1.0}), 1e-12), Error);
}

TEST_CASE("truncated-matrix propagator agrees with the oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = random_generator(rng, 24);
    const auto v = Propagator::truncated_matrix(g, 24);
    std::vector<double> u(24);
    for (auto& x : u) x = rng.uniform(-1.0, 1.0);
    const auto got = v.apply(0.8, u);
    const auto want = oracle_propagate(g, 24, 0.0, 0.8, ScaleVector(u), 1e-12);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < 24; ++i) {
      err += std::abs(got[i] - want[i]);
      ref += std::abs(want[i]);
    }
    CHECK(err <= 1e-10 * ref);
  }
}

TEST_CASE("residual_A3 examples") {
  std::vector<double> d{0.0, 1.0, 2.0, 3.0};
  const auto v = Propagator::diagonal(DiagonalGenerator(d));
  std::vector<double> neg{0.0, -1.0, -2.0, -3.0};
  const auto a = OperatorMatrix::diagonal(neg);
  for (std::size_t n = 0; n < 4; ++n) {
    const auto u = ScaleVector::unit(n, 4);
    CHECK(residual_A3(v, a, 0.3, 0.3, u, Direction::Forward, 1.0, 0.5, 0.0) == 0.0);
    CHECK(residual_A3(v, a, 0.0, 0.5, u, Direction::Forward, 1.0, 0.5, 0.0, 64) <= 1e-8);
    CHECK(residual_A3(v, a, 0.0, 0.5, u, Direction::Backward, 1.0, 0.5, 0.0, 64) <= 1e-8);
  }
  const auto u = ScaleVector::unit(2, 4);
  const double wrong = residual_A3(v, a.scaled(-1.0), 0.0, 0.5, u, Direction::Forward, 1.0, 0.5, 0.0, 64);
  const double expected = 2.0 * (1.0 - std::exp(-1.0)) * std::exp(0.0);
  CHECK(wrong == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("residual_A3 on a truncated-matrix generator") {
  Rng rng(6);
  const auto g = random_generator(rng, 16);
  const auto v = Propagator::truncated_matrix(g, 16);
  std::vector<double> u(16);
  for (auto& x : u) x = rng.uniform(-1.0, 1.0);
  CHECK(residual_A3(v, g, 0.0, 0.4, ScaleVector(u), Direction::Forward, 0.5, 0.2, 0.0, 128) <= 1e-7);
  CHECK(residual_A3(v, g, 0.0, 0.4, ScaleVector(u), Direction::Backward, 0.5, 0.2, 0.0, 128) <= 1e-7);
}

TEST_CASE("K estimation") {
  Rng rng(7);
  const auto g = random_generator(rng, 16);
  const auto v = Propagator::truncated_matrix(g, 16);
  const auto cert = estimate_K(v, {0.0, 0.5, 1.0}, 1.0);
  CHECK(cert.contraction_by_log_norm);
  CHECK(cert.K == 1.0);
  CHECK(cert.sampled_max <= 1.0 + 1e-12);

  // A growing generator needs K > 1 and the sample shows it.
  const auto grow = OperatorMatrix::from_triplets({{0, 0, 0.5}, {1, 1, -1.0}}, 2);
  const auto vg = Propagator::truncated_matrix(grow, 2);
  const auto cg = estimate_K(vg, {0.0}, 1.0);
  CHECK_FALSE(cg.contraction_by_log_norm);
  CHECK(cg.sampled_max == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(cg.K == doctest::Approx(1.05 * std::exp(0.5)).epsilon(1e-12));
}
