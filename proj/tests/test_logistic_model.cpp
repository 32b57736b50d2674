#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "fixtures.hpp"
#include "logistic_model.hpp"

using namespace scaleevo;

namespace {

LogisticParams mortality_only(std::size_t cells, double m) {
  LogisticParams p;
  p.cells = cells;
  p.spacing = 1.0 / static_cast<double>(cells);
  p.m = m;
  p.theta = 1.0;
  p.a_plus.assign(cells, 0.0);
  p.a_minus.assign(cells, 0.0);
  return p;
}

Hierarchy indicator(std::size_t cells, double spacing, int n_max, int level) {
  auto g = Hierarchy::zeros(HierarchyKind::QuasiObservable, cells, spacing, n_max);
  for (double& v : g.comps[static_cast<std::size_t>(level)]) v = 1.0;
  return g;
}

double logistic_horizon(const LogisticParams& p, int n_max, double alpha, double ap) {
  const auto ops = build_discrete_operators(p, n_max);
  const auto w = logistic_wconfig(p, ops, alpha, ap, 0.0);
  return existence_time(ap, alpha, horizon_table(w, alpha, ap));
}

}  // namespace

TEST_CASE("lp_integral of level indicators") {
  const std::size_t L = 10;
  const double h = 0.3;
  CHECK(lp_integral(indicator(L, h, 3, 0), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp_integral(indicator(L, h, 3, 1), 0.0) == doctest::Approx(L * h).epsilon(1e-14));
  CHECK(lp_integral(indicator(L, h, 3, 2), 0.0) == doctest::Approx(L * h * L * h / 2.0).epsilon(1e-14));
  CHECK(lp_norm(indicator(L, h, 3, 2), 0.5) == doctest::Approx(L * h * L * h / 2.0 * std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("k_transform examples") {
  const std::size_t L = 8;
  const std::vector<std::size_t> gamma{1, 4, 6};
  CHECK(k_transform(indicator(L, 1.0, 3, 1), gamma).value == 3.0);
  auto c = Hierarchy::zeros(HierarchyKind::QuasiObservable, L, 1.0, 3);
  c.comps[0][0] = 2.5;
  CHECK(k_transform(c, gamma).value == 2.5);
  CHECK(k_transform(c, std::vector<std::size_t>{}).value == 2.5);
  const std::vector<std::size_t> big{0, 1, 2, 3};
  CHECK(k_transform(indicator(L, 1.0, 3, 3), big).truncation_unsound);
  CHECK_FALSE(k_transform(indicator(L, 1.0, 3, 2), big).truncation_unsound);
}

TEST_CASE("k_inverse inverts k_transform") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_hierarchy(rng, HierarchyKind::QuasiObservable, 6, 0.5, 3, 3);
    const auto kg = [&](std::span<const std::size_t> xi) { return k_transform(g, xi).value; };
    for (int s = 0; s < 10; ++s) {
      const auto size = static_cast<std::size_t>(rng.integer(0, 3));
      std::vector<std::size_t> eta;
      while (eta.size() < size) {
        const auto x = static_cast<std::size_t>(rng.integer(0, 5));
        if (std::find(eta.begin(), eta.end(), x) == eta.end()) eta.push_back(x);
      }
      CHECK(k_inverse(kg, eta) == doctest::Approx(g.value(eta)).epsilon(1e-12).scale(1e-12));
    }
  }
}

TEST_CASE("check_G examples") {
  const std::size_t L = 16;
  const double h = 1.0 / L;
  LogisticParams p;
  p.cells = L;
  p.spacing = h;
  p.theta = 1.7;
  p.a_plus = named_kernel("gaussian", L, h, 1.0, 0.1);
  p.a_minus.resize(L);
  for (std::size_t j = 0; j < L; ++j) p.a_minus[j] = p.theta * p.a_plus[j];
  SUBCASE("balanced kernels pass with margin zero") {
    const auto rep = check_G(p);
    CHECK(rep.pass);
    CHECK(rep.min_margin == 0.0);
  }
  SUBCASE("pure dispersal fails on a pair") {
    p.theta = 1.0;
    p.a_minus.assign(L, 0.0);
    const auto rep = check_G(p);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.pair_pass);
    CHECK(p.a_plus[rep.pair_worst_offset] > 0.0);
    CHECK(rep.min_margin < 0.0);
  }
  SUBCASE("a linear b absorbs the dispersal") {
    p.theta = 1.0;
    p.a_minus.assign(L, 0.0);
    const double total = kernel_l1(p.a_plus, h);
    for (double& v : p.a_plus) v /= total;
    p.a_plus = symmetrize_kernel(p.a_plus);
    const GSampler sampler{6, 3000, 11};
    p.b = p.theta * kernel_sup(p.a_plus) * (sampler.n_max - 1);
    const auto rep = check_G(p, sampler);
    CHECK(rep.pass);
    CHECK(rep.min_margin >= 0.0);
  }
}

TEST_CASE("check_G passes whenever a^- dominates theta a^+ pointwise") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_logistic_params(rng, 16, 1.0 / 16);
    const auto rep = check_G(p, {5, 500, static_cast<std::uint64_t>(trial)});
    CHECK(rep.pass);
    CHECK(rep.pair_pass);
  }
}

TEST_CASE("continuum_bounds") {
  auto p = mortality_only(8, 1.0);
  p.a_plus.assign(8, 1.0);
  p.a_minus.assign(8, 1.0);
  const double e = std::numbers::e;
  const auto b = continuum_bounds(p, 1.0, 0.0);
  CHECK(b.L0 == doctest::Approx(1.0 / e + 1.0 / (2.0 * e * e)).epsilon(1e-15));
  CHECK(b.L0 == doctest::Approx(0.43553).epsilon(1e-4));
  p.m = 0.0;
  CHECK(continuum_bounds(p, 2.0, 0.5).L0 == doctest::Approx(2.0 / (4.0 * e * e * 2.25)).epsilon(1e-15));
  double prev0 = 0.0;
  double prev1 = 0.0;
  for (double gap : {1.0, 0.5, 0.1, 1e-3, 1e-6}) {
    const auto c = continuum_bounds(p, 1.0, 1.0 - gap);
    CHECK(c.L0 > prev0);
    CHECK(c.L1 > prev1);
    prev0 = c.L0;
    prev1 = c.L1;
  }
  CHECK(prev0 > 1e10);
  CHECK_THROWS_AS(continuum_bounds(p, 1.0, 1.0), Error);
}

TEST_CASE("discrete operators without kernels reduce to mortality") {
  const auto p = mortality_only(5, 0.7);
  const auto ops = build_discrete_operators(p, 3);
  CHECK(ops.lhat1.is_zero());
  CHECK(ops.ldelta1.is_zero());
  CHECK(ops.lhat0.is_diagonal());
  const auto grading = ops.layout.grading();
  const auto d = ops.lhat0.diagonal_entries(ops.layout.total());
  const auto dd = ops.ldelta0.diagonal_entries(ops.layout.total());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d[i] == -0.7 * grading.level(i));
    CHECK(dd[i] == d[i]);
  }
}

TEST_CASE("order-one closure keeps only mortality on singletons and reports the defect") {
  const auto p = reference_logistic_params(8);
  const auto ops = build_discrete_operators(p, 1);
  Rng rng(5);
  auto g = random_hierarchy(rng, HierarchyKind::QuasiObservable, 8, p.spacing, 1, 1);
  g.comps[0][0] = 0.0;
  const auto out = apply_generator(p, ops, g, 0.0);
  for (std::size_t x = 0; x < 8; ++x) {
    double jump = 0.0;
    for (std::size_t y = 0; y < 8; ++y) jump += p.spacing * p.a_plus[(x + 8 - y) % 8] * g.comps[1][y];
    CHECK(out.value.comps[1][x] == doctest::Approx(-p.m * g.comps[1][x] + jump).epsilon(1e-14));
  }
  CHECK(out.closure_defect > 0.0);
}

TEST_CASE("discrete duality on random hierarchies") {
  const auto p = reference_logistic_params(16);
  const auto ops = build_discrete_operators(p, 3);
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_hierarchy(rng, HierarchyKind::QuasiObservable, 16, p.spacing, 3, 2);
    const auto k = random_hierarchy(rng, HierarchyKind::Correlation, 16, p.spacing, 3, 2);
    const double lhs = hierarchy_pairing(apply_generator(p, ops, g, 0.0).value, k);
    const double rhs = hierarchy_pairing(g, apply_generator(p, ops, k, 0.0).value);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), std::abs(rhs)));
  }
}

TEST_CASE("correlation operators are the measure adjoints of the quasi-observable operators") {
  Rng rng(9);
  const auto p = random_logistic_params(rng, 6, 0.2);
  const auto ops = build_discrete_operators(p, 3);
  const auto grading = ops.layout.grading();
  for (const auto& [hat, delta] : {std::pair{&ops.lhat0, &ops.ldelta0}, std::pair{&ops.lhat1, &ops.ldelta1}}) {
    const auto adj = hat->adjoint(grading);
    const auto diff = adj - *delta;
    double worst = 0.0;
    for (std::size_t c = 0; c < diff.cols(); ++c) {
      for (const auto& e : diff.column(c)) worst = std::max(worst, std::abs(e.value));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("one application preserves permutation symmetry") {
  Rng rng(31);
  const auto p = random_logistic_params(rng, 7, 0.25);
  const auto ops = build_discrete_operators(p, 3);
  for (auto kind : {HierarchyKind::QuasiObservable, HierarchyKind::Correlation}) {
    const auto h = random_hierarchy(rng, kind, 7, 0.25, 3, 3);
    CHECK(h.symmetry_defect() == 0.0);
    const auto out = apply_generator(p, ops, h, 0.0).value;
    CHECK(out.symmetry_defect() <= 1e-13);
  }
}

TEST_CASE("discrete L1 norm stays below the continuum estimate") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_logistic_params(rng, 8, 0.125);
    const auto ops = build_discrete_operators(p, 3);
    const auto grading = ops.layout.grading();
    for (const auto& [a, ap] : {std::pair{1.0, 0.0}, std::pair{2.0, 1.5}, std::pair{0.5, -1.0}}) {
      CHECK(operator_norm(ops.lhat1, a, ap, grading) <= continuum_bounds(p, a, ap).L1);
    }
  }
}

TEST_CASE("mortality-only evolution is exact") {
  const double m = 0.8;
  const auto p = mortality_only(6, m);
  Rng rng(4);
  for (auto kind : {HierarchyKind::QuasiObservable, HierarchyKind::Correlation}) {
    const auto h0 = random_hierarchy(rng, kind, 6, p.spacing, 3, 3);
    const double t = 1.3;
    const auto res = evolve_hierarchy(p, h0, t, 1.0, 0.5);
    for (int n = 0; n <= 3; ++n) {
      const double f = std::exp(-m * n * t);
      for (std::size_t i = 0; i < h0.comps[n].size(); ++i) {
        CHECK(std::abs(res.value.comps[n][i] - f * h0.comps[n][i]) <= 1e-12 * std::abs(f * h0.comps[n][i]) + 1e-300);
      }
    }
  }
}

TEST_CASE("evolution over zero time is the identity") {
  const auto p = reference_logistic_params(8);
  Rng rng(8);
  const auto g = random_hierarchy(rng, HierarchyKind::QuasiObservable, 8, p.spacing, 2, 2);
  const auto res = evolve_hierarchy(p, g, 0.0, 2.0, 1.0);
  CHECK(res.value.comps == g.comps);
}

TEST_CASE("hierarchy evolution matches the stacked oracle") {
  const auto p = reference_logistic_params(16);
  const double alpha = 2.0;
  const double ap = 1.0;
  const double T = logistic_horizon(p, 2, alpha, ap);
  REQUIRE(std::isfinite(T));
  const double t = 0.5 * T;
  Rng rng(16);
  const auto ops = build_discrete_operators(p, 2);
  const auto grading = ops.layout.grading();
  SUBCASE("quasi-observables") {
    const auto g = random_hierarchy(rng, HierarchyKind::QuasiObservable, 16, p.spacing, 2, 2);
    const auto res = evolve_hierarchy(p, g, t, alpha, ap);
    const auto oracle = oracle_propagate(ops.lhat(), ops.layout.total(), 0.0, t, ScaleVector(g.flatten()), 1e-11);
    std::vector<double> d(ops.layout.total());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = res.result.value[i] - oracle[i];
    CHECK(norm_alpha(d, ap, grading) <= 1e-5 * norm_alpha(oracle.entries(), ap, grading));
  }
  SUBCASE("correlation functions") {
    const auto k = random_hierarchy(rng, HierarchyKind::Correlation, 16, p.spacing, 2, 2);
    const auto res = evolve_hierarchy(p, k, t, alpha, ap);
    const auto oracle = oracle_propagate(ops.ldelta(), ops.layout.total(), 0.0, t, ScaleVector(k.flatten()), 1e-11);
    std::vector<double> d(ops.layout.total());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = res.result.value[i] - oracle[i];
    CHECK(dual_norm(d, alpha, grading) <= 1e-5 * dual_norm(oracle.entries(), alpha, grading));
  }
}

TEST_CASE("evolve_hierarchy rejects levels at or below alpha_star and unsound closures") {
  const auto p = reference_logistic_params(8);
  Rng rng(1);
  const auto g = random_hierarchy(rng, HierarchyKind::QuasiObservable, 8, p.spacing, 2, 2);
  try {
    evolve_hierarchy(p, g, 0.01, 2.0, std::log(2.0));
    FAIL("expected InvalidScalePair");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidScalePair);
  }
  HierarchyEvolveOptions opts;
  opts.defect_tol = 1e-30;
  try {
    evolve_hierarchy(p, g, 0.01, 2.0, 1.0, opts);
    FAIL("expected ClosureUnsound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClosureUnsound);
  }
}

TEST_CASE("hierarchy JSON round trip and CSV layout") {
  Rng rng(12);
  const auto h = random_hierarchy(rng, HierarchyKind::Correlation, 4, 0.25, 2, 2);
  const auto back = Hierarchy::from_json(nlohmann::json::parse(h.to_json().dump()));
  CHECK(back.kind == h.kind);
  CHECK(back.comps == h.comps);
  const auto csv = h.to_csv();
  CHECK(csv.rfind("n,x1,x2,value\n0,,,", 0) == 0);
}
