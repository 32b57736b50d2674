#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "fixtures.hpp"
#include "ovcyannikov.hpp"

using namespace scaleevo;

namespace {

double rel_error(const std::vector<double>& got, const std::vector<double>& want, double alpha) {
  std::vector<double> d(want.size());
  for (std::size_t i = 0; i < want.size(); ++i) d[i] = (i < got.size() ? got[i] : 0.0) - want[i];
  return norm_alpha(d, alpha) / norm_alpha(want, alpha);
}

WConfig scalar_system(double lambda, std::size_t n) {
  WConfig w;
  w.V = Propagator::diagonal(DiagonalGenerator(std::vector<double>(n, 0.0)));
  w.B = OperatorFamily(OperatorMatrix::identity(n, lambda));
  w.alpha_star = -1.0;
  return w;
}

double horizon(const WConfig& w, double alpha, double ap) {
  return existence_time(ap, alpha, horizon_table(w, alpha, ap));
}

}  // namespace

TEST_CASE("existence_time examples") {
  CHECK(existence_time(0.0, 2.0 * std::numbers::e, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::isinf(existence_time(0.0, 1.0, 1.0, 0.0)));
  CHECK(existence_time(1.0, 3.0, 2.0, 5.0) == doctest::Approx(1.0 / (10.0 * std::numbers::e)).epsilon(1e-15));
  CHECK_THROWS_AS(existence_time(1.0, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("forward_evolve with B = 0 returns V(t,s)k") {
  Rng rng(1);
  auto sys = random_band_system(rng, 16, false);
  sys.w.B = OperatorFamily(OperatorMatrix{});
  const auto res = forward_evolve(sys.w, sys.k, 0.2, 3.0, 1.0, 0.0);
  CHECK(res.series_tail == 0.0);
  CHECK(std::isinf(res.T));
  const auto exact = sys.w.V.apply(2.8, sys.k.padded(16));
  for (std::size_t i = 0; i < 16; ++i) CHECK(res.value[i] == exact[i]);
}

TEST_CASE("forward_evolve of a scalar exponential reproduces its Taylor terms") {
  const double lambda = 0.8;
  const auto w = scalar_system(lambda, 4);
  const double T = horizon(w, 1.0, 0.0);
  const double tau = 0.5 * T;
  const auto res = forward_evolve(w, ScaleVector::unit(0, 4), 0.0, tau, 1.0, 0.0);
  CHECK(res.value[0] == doctest::Approx(std::exp(lambda * tau)).epsilon(1e-10));
  double term = 1.0;
  for (std::size_t n = 0; n < res.term_norms.size(); ++n) {
    term *= lambda * tau / static_cast<double>(n + 1);
    CHECK(std::abs(res.term_norms[n] - term) <= 1e-12 + 1e-6 * term);
  }
}

TEST_CASE("forward and backward agree with oracles on a random band system") {
  for (int seed = 0; seed < 2; ++seed) {
    Rng rng(100 + seed);
    const auto sys = random_band_system(rng, 32, seed == 1);
    const double T = horizon(sys.w, 1.0, 0.0);
    const double s = 0.1;
    const double t = s + 0.5 * T;
    const auto fwd = forward_evolve(sys.w, sys.k, s, t, 1.0, 0.0);
    const auto oracle = oracle_integrate(full_rhs(sys.w), sys.k.padded(32), s, t, 1e-12);
    CHECK(rel_error(fwd.value, oracle, 0.0) <= 1e-6);
    const auto bwd = backward_evolve(sys.w, sys.k, s, t, 1.0, 0.0);
    auto minus = full_rhs(sys.w);
    auto reversed = [&](double r, std::span<const double> y, std::span<double> dy) {
      minus(r, y, dy);
      for (auto& x : dy) x = -x;
    };
    const auto boracle = oracle_integrate(reversed, sys.k.padded(32), t, s, 1e-12);
    CHECK(rel_error(bwd.value, boracle, 0.0) <= 1e-6);
  }
}

TEST_CASE("initial condition and backward scalar case") {
  Rng rng(2);
  const auto sys = random_band_system(rng, 16, true);
  const auto f = forward_evolve(sys.w, sys.k, 0.3, 0.3, 1.0, 0.0);
  const auto b = backward_evolve(sys.w, sys.k, 0.3, 0.3, 1.0, 0.0);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(f.value[i] == sys.k[i]);
    CHECK(b.value[i] == sys.k[i]);
  }
  const auto w = scalar_system(-0.6, 2);
  const double tau = 0.4 * horizon(w, 1.0, 0.0);
  const auto res = backward_evolve(w, ScaleVector({2.0}), 1.0, 1.0 + tau, 1.0, 0.0);
  CHECK(res.value[0] == doctest::Approx(2.0 * std::exp(-0.6 * tau)).epsilon(1e-10));
}

TEST_CASE("horizon violations are reported") {
  Rng rng(3);
  const auto sys = random_band_system(rng, 16, false);
  const double T = horizon(sys.w, 1.0, 0.0);
  try {
    forward_evolve(sys.w, sys.k, 0.0, 1.01 * T, 1.0, 0.0);
    FAIL("expected horizon error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExistenceHorizonExceeded);
  }
  try {
    forward_evolve(sys.w, sys.k, 0.0, 0.97 * T, 1.0, 0.0);
    FAIL("expected tight horizon error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HorizonTooTight);
  }
}

TEST_CASE("property: geometric term bound and total bound") {
  for (int seed = 0; seed < 4; ++seed) {
    Rng rng(200 + seed);
    const auto sys = random_band_system(rng, 32, seed % 2 == 1);
    const double T = horizon(sys.w, 1.0, 0.0);
    const double tau = 0.5 * T;
    const auto res = forward_evolve(sys.w, sys.k, 0.0, tau, 1.0, 0.0);
    const double knorm = norm_alpha(sys.k, 1.0);
    for (std::size_t n = 0; n < res.term_norms.size(); ++n) {
      CHECK(res.term_norms[n] <= 1.1 * res.K * knorm * std::pow(res.rho, static_cast<double>(n + 1)));
    }
    CHECK(norm_alpha(res.value, 0.0) <= res.K * knorm * T / (T - tau) + res.total_error());
  }
}

TEST_CASE("evolution property") {
  Rng rng(4);
  auto sys = random_band_system(rng, 24, true);
  const double T = horizon(sys.w, 1.0, 0.0);
  const auto rep = evolution_property_residual(sys.w, 0.0, 0.2 * T, 0.4 * T, 1.0, 0.5, 0.0, sys.k);
  CHECK(rep.residual <= 3.0 * rep.budget);
  const auto same = evolution_property_residual(sys.w, 0.0, 0.0, 0.4 * T, 1.0, 0.5, 0.0, sys.k);
  CHECK(same.residual <= 3.0 * same.budget + 1e-15);

  sys.w.B = OperatorFamily(OperatorMatrix{});
  const auto free = evolution_property_residual(sys.w, 0.0, 0.7, 2.0, 1.0, 0.5, 0.0, sys.k);
  CHECK(free.residual <= 1e-15);
}

TEST_CASE("uniqueness surrogate: intermediate levels do not change the result") {
  Rng rng(5);
  const auto sys = random_band_system(rng, 24, false);
  const double T = horizon(sys.w, 1.0, 0.0);
  const double tau = 0.3 * T;
  const auto direct = forward_evolve(sys.w, sys.k, 0.0, tau, 1.0, 0.0);
  for (double mid : {0.5, 0.25, 0.75}) {
    const auto a = forward_evolve(sys.w, sys.k, 0.0, tau / 2.0, 1.0, mid);
    const auto b = forward_evolve(sys.w, a.vector(), tau / 2.0, tau, mid, 0.0);
    std::vector<double> d(24);
    for (std::size_t i = 0; i < 24; ++i) d[i] = b.value[i] - direct.value[i];
    CHECK(norm_alpha(d, 0.0) <= 3.0 * (direct.total_error() + a.total_error() * b.K * b.T / (b.T - tau / 2.0) + b.total_error()));
  }
}

TEST_CASE("dual evolution satisfies the pairing identity") {
  Rng rng(6);
  const auto sys = random_band_system(rng, 32, true);
  const double T = horizon(sys.w, 1.0, 0.0);
  const double s = 0.05;
  const double t = s + 0.4 * T;
  EvolveOptions opts;
  opts.tol = 1e-12;
  std::vector<double> l(32);
  for (auto& x : l) x = rng.uniform(-1.0, 1.0);
  const auto fwd = forward_evolve(sys.w, sys.k, s, t, 1.0, 0.0, opts);
  const auto dual = dual_evolve(sys.w, DualVector(l), s, t, 1.0, 0.0, opts);
  const double lhs = dual_pairing(fwd.value, l);
  const double rhs = dual_pairing(sys.k.padded(32), dual.value);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(dual_pairing(sys.k.padded(32), l))));

  const auto unit = dual_evolve(sys.w, DualVector::unit(0, 32), s, t, 1.0, 0.0, opts);
  CHECK(dual_pairing(sys.k.padded(32), unit.value) == doctest::Approx(fwd.value[0]).epsilon(1e-9));

  const auto same = dual_evolve(sys.w, DualVector(l), s, s, 1.0, 0.0);
  for (std::size_t i = 0; i < 32; ++i) CHECK(same.value[i] == l[i]);

  const auto oracle = oracle_integrate(adjoint_rhs(sys.w), l, t, s, 1e-12);
  double err = 0.0;
  for (std::size_t i = 0; i < 32; ++i) err = std::max(err, std::abs(oracle[i] - dual.value[i]));
  CHECK(err <= 1e-8);
}

TEST_CASE("stability comparison") {
  Rng rng(7);
  const auto sys = random_band_system(rng, 24, false);
  const double T = horizon(sys.w, 1.0, 0.0);
  const double tau = 0.25 * T;
  const double a1 = 2.0 / 3.0;
  const double a0 = 1.0 / 3.0;
  const auto same = stability_compare(sys.w, sys.w, 0.0, tau, 1.0, a1, a0, 0.0, sys.k);
  CHECK(same.measured == 0.0);
  CHECK(same.bound == 0.0);

  std::vector<double> dvec(24);
  for (auto& x : dvec) x = rng.uniform(-1.0, 1.0);
  const auto D = OperatorMatrix::diagonal(dvec);
  std::vector<double> measured;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    WConfig w2 = sys.w;
    w2.V = sys.w.V.perturbed(D.scaled(eps));
    const auto rep = stability_compare(sys.w, w2, 0.0, tau, 1.0, a1, a0, 0.0, sys.k);
    CHECK(rep.measured <= rep.bound + rep.budget);
    measured.push_back(rep.measured);
  }
  CHECK(measured[0] / measured[1] == doctest::Approx(10.0).epsilon(0.2));
  CHECK(measured[1] / measured[2] == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("global evolution") {
  auto sys = number_operator_system(24);
  EvolveOptions opts;
  opts.tol = 1e-10;
  const double T1 = horizon(sys.w, 1.0, 0.0);
  const double t = 10.0 * T1;
  GlobalOptions g;
  g.alpha_ceiling = 2.0;
  const auto res = global_evolve(sys.w, sys.k, 0.0, t, 0.0, g, opts);
  CHECK(res.extra["strategy"] == "stepped");
  const auto oracle = oracle_integrate(full_rhs(sys.w), sys.k.padded(24), 0.0, t, 1e-12);
  CHECK(rel_error(res.value, oracle, 0.0) <= 1e-5);

  g.steps = 2;
  const auto two = global_evolve(sys.w, sys.k, 0.0, t, 0.0, g, opts);
  g.steps = 7;
  const auto seven = global_evolve(sys.w, sys.k, 0.0, t, 0.0, g, opts);
  CHECK(two.extra["steps"] != seven.extra["steps"]);
  std::vector<double> d(24);
  for (std::size_t i = 0; i < 24; ++i) d[i] = two.value[i] - seven.value[i];
  CHECK(norm_alpha(d, 0.0) <= two.total_error() + seven.total_error());

  GlobalOptions high;
  high.alpha_ceiling = 60.0;
  const auto single = global_evolve(sys.w, sys.k, 0.0, t, 0.0, high, opts);
  CHECK(single.extra["strategy"] == "single");
  CHECK(rel_error(single.value, oracle, 0.0) <= 1e-5);

  GlobalOptions none;
  none.alpha_ceiling = 0.0;
  try {
    global_evolve(sys.w, sys.k, 0.0, t, 0.0, none, opts);
    FAIL("expected exhaustion");
  } catch (const HorizonExhaustedError& e) {
    CHECK(e.reachable_t() == 0.0);
  }

  sys.w.B = OperatorFamily(OperatorMatrix{});
  const auto free = global_evolve(sys.w, sys.k, 0.0, 50.0, 0.0, g, opts);
  const auto exact = sys.w.V.apply(50.0, sys.k.padded(24));
  for (std::size_t i = 0; i < 24; ++i) CHECK(free.value[i] == exact[i]);
}

TEST_CASE("derivative check: central differences match the generator") {
  Rng rng(8);
  const auto sys = random_band_system(rng, 24, false);
  const double T = horizon(sys.w, 1.0, 0.0);
  const double t = 0.3 * T;
  EvolveOptions opts;
  opts.tol = 1e-12;
  const auto at = forward_evolve(sys.w, sys.k, 0.0, t, 1.0, 0.0, opts);
  std::vector<double> deriv(24, 0.0);
  full_rhs(sys.w)(t, at.value, deriv);
  double prev = 0.0;
  for (double h : {1e-2 * T, 5e-3 * T}) {
    const auto plus = forward_evolve(sys.w, sys.k, 0.0, t + h, 1.0, 0.0, opts);
    const auto minus = forward_evolve(sys.w, sys.k, 0.0, t - h, 1.0, 0.0, opts);
    std::vector<double> err(24);
    for (std::size_t i = 0; i < 24; ++i) err[i] = (plus.value[i] - minus.value[i]) / (2.0 * h) - deriv[i];
    const double e = norm_alpha(err, -0.5);
    if (prev > 0.0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.25));
    prev = e;
  }
}
