#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "random.hpp"
#include "scale_operator.hpp"

using namespace scaleevo;

namespace {

OperatorMatrix left_shift(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t k = 1; k < n; ++k) t.push_back({k - 1, k, 1.0});
  return OperatorMatrix::from_triplets(t, n);
}

OperatorMatrix raising(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k + 1 < n; ++k) t.push_back({k + 1, k, 1.0});
  return OperatorMatrix::from_triplets(t, n);
}

OperatorMatrix number_operator(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t k = 1; k < n; ++k) t.push_back({k, k, static_cast<double>(k)});
  return OperatorMatrix::from_triplets(t, n);
}

OperatorMatrix random_band(Rng& rng, std::size_t n, int lower, int upper) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < n; ++k) {
    for (int off = -upper; off <= lower; ++off) {
      const auto row = static_cast<long long>(k) + off;
      if (row < 0 || row >= static_cast<long long>(n)) continue;
      t.push_back({static_cast<std::size_t>(row), k, rng.uniform(-1.0, 1.0)});
    }
  }
  return OperatorMatrix::from_triplets(t, n);
}

std::vector<double> dense_multiply(const OperatorMatrix& b, const std::vector<double>& u, std::size_t n) {
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (const auto& t : b.triplets()) dense[t.row][t.col] = t.value;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += dense[i][j] * u[j];
  }
  return out;
}

}  // namespace

TEST_CASE("apply: identity and left shift") {
  const ScaleVector u({1.5, -2.0, 4.0});
  const auto id = apply(OperatorMatrix::identity(3), u);
  REQUIRE(id.support_len() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(id[i] == u[i]);
  const auto sh = apply(left_shift(3), u);
  REQUIRE(sh.support_len() == 2);
  CHECK(sh[0] == -2.0);
  CHECK(sh[1] == 4.0);
}

TEST_CASE("apply matches a dense multiply on random band matrices") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto b = random_band(rng, 32, 2, 3);
    std::vector<double> u(32);
    for (auto& x : u) x = rng.uniform(-1.0, 1.0);
    const auto got = apply(b, ScaleVector(u));
    const auto want = dense_multiply(b, u, 32);
    for (std::size_t i = 0; i < 32; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
  }
}

TEST_CASE("apply propagates the tail certificate") {
  const ScaleVector u({1.0}, 0.5, 0.1);
  const auto out = apply(OperatorMatrix::identity(4, 3.0), u);
  CHECK(out.tail_bound() == doctest::Approx(0.3));
  CHECK(apply(OperatorMatrix::identity(4, 3.0), u, 10.0).tail_bound() == doctest::Approx(1.0));
}

TEST_CASE("operator_norm examples") {
  const std::size_t n = 200;
  CHECK(operator_norm(OperatorMatrix::identity(n), 1.0, 0.3) == doctest::Approx(1.0));
  for (double alpha : {0.5, 1.0, 2.0}) {
    const double ap = alpha - 0.7;
    CHECK(operator_norm(left_shift(n), alpha, ap) == doctest::Approx(std::exp(-alpha)).epsilon(1e-13));
    CHECK(operator_norm(raising(n), alpha, ap) == doctest::Approx(std::exp(ap)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(operator_norm(OperatorMatrix::identity(3), 1.0, 1.0), Error);
}

TEST_CASE("fit_majorant examples") {
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto zero = fit_majorant(OperatorMatrix{}, -1.0, grid);
  CHECK(zero.is_zero());
  CHECK(zero(1.0) == 0.0);

  const double lambda = -2.5;
  const auto scalar = fit_majorant(OperatorMatrix::identity(50, lambda), -1.0, grid, 1.1);
  for (double a : grid) CHECK(scalar(a) == doctest::Approx(1.1 * std::abs(lambda) * (a + 1.0)).epsilon(1e-13));

  // (alpha - alpha') sup_n n e^{-(alpha - alpha') n} stays below 1/e for every gap.
  const auto number = fit_majorant(number_operator(400), -1.0, grid, 1.1);
  for (double a : grid) {
    CHECK(number(a) <= 1.1 / std::exp(1.0) + 1e-12);
    CHECK(number(a) >= 0.9 * 1.1 / std::exp(1.0));
  }
  CHECK_THROWS_AS(fit_majorant(OperatorMatrix{}, 0.0, {}), Error);
}

TEST_CASE("property: operator norm bounds every application") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_band(rng, 24, 3, 2);
    const double alpha = rng.uniform(-1.0, 2.0);
    const double ap = alpha - rng.uniform(0.05, 1.5);
    const double norm = operator_norm(b, alpha, ap);
    std::vector<double> u(24);
    for (auto& x : u) x = rng.uniform(-1.0, 1.0);
    CHECK(norm_alpha(apply(b, ScaleVector(u)), ap) <= norm * norm_alpha(u, alpha) * (1.0 + 1e-13));
    // Equality is attained by the unit vector at the maximizing column.
    double best = 0.0;
    for (std::size_t k = 0; k < 24; ++k) {
      best = std::max(best, norm_alpha(apply(b, ScaleVector::unit(k, 24)), ap) / std::exp(alpha * k));
    }
    CHECK(best == doctest::Approx(norm).epsilon(1e-13));
  }
}

TEST_CASE("property: composition consistency over intermediate levels") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_band(rng, 20, 2, 2);
    const auto b = random_band(rng, 20, 1, 2);
    const auto ab = compose(a, b);
    const double alpha = rng.uniform(0.0, 2.0);
    const double ap = alpha - rng.uniform(0.2, 1.5);
    for (int i = 1; i < 8; ++i) {
      const double beta = ap + (alpha - ap) * i / 8.0;
      CHECK(operator_norm(ab, alpha, ap) <= operator_norm(a, beta, ap) * operator_norm(b, alpha, beta) * (1.0 + 1e-13));
    }
  }
}

TEST_CASE("property: fitted majorant dominates grid pairs") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    auto b = random_band(rng, 30, 2, 2);
    const std::vector<double> grid{-0.5, 0.0, 0.3, 0.8, 1.2};
    const auto m = fit_majorant(b, -1.0, grid, 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        CHECK(operator_norm(b, grid[i], grid[j]) <= m(grid[i]) / (grid[i] - grid[j]) * (1.0 + 1e-13));
      }
    }
  }
}

TEST_CASE("operator families interpolate and reverse") {
  const auto a = OperatorMatrix::identity(2, 1.0);
  const auto b = OperatorMatrix::identity(2, 3.0);
  const OperatorFamily lin({0.0, 1.0}, {a, b}, Interpolation::Linear);
  CHECK(lin.at(0.5).diagonal_entries(2)[0] == doctest::Approx(2.0));
  CHECK(lin.at(-1.0).diagonal_entries(2)[0] == 1.0);
  CHECK(lin.at(4.0).diagonal_entries(2)[0] == 3.0);
  const auto rev = lin.reversed(2.0);
  for (double sigma : {0.0, 0.3, 1.2, 1.7, 2.0}) {
    CHECK(rev.at(sigma).diagonal_entries(2)[0] == doctest::Approx(lin.at(2.0 - sigma).diagonal_entries(2)[0]));
  }
  const OperatorFamily pc({0.0, 1.0}, {a, b}, Interpolation::PiecewiseConstant);
  CHECK(pc.at(0.99).diagonal_entries(2)[0] == 1.0);
  CHECK(pc.at(1.0).diagonal_entries(2)[0] == 3.0);
  const auto pr = pc.reversed(2.0);
  for (double sigma : {0.2, 0.99, 1.01, 1.8}) {
    CHECK(pr.at(sigma).diagonal_entries(2)[0] == pc.at(2.0 - sigma).diagonal_entries(2)[0]);
  }
}

TEST_CASE("adjoint respects the measure pairing") {
  Rng rng(12);
  const Grading grading({0, 1, 1, 2, 2}, {1.0, 0.5, 0.5, 0.25, 0.25});
  const auto b = random_band(rng, 5, 2, 2);
  const auto bs = b.adjoint(grading);
  std::vector<double> u(5), l(5);
  for (auto& x : u) x = rng.uniform(-1.0, 1.0);
  for (auto& x : l) x = rng.uniform(-1.0, 1.0);
  std::vector<double> bu(5, 0.0), bl(5, 0.0);
  b.multiply_add(u, bu);
  bs.multiply_add(l, bl);
  CHECK(dual_pairing(bu, l, grading) == doctest::Approx(dual_pairing(u, bl, grading)).epsilon(1e-14));
}
