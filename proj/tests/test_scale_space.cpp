#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "random.hpp"
#include "scale_space.hpp"

using namespace scaleevo;

namespace {

std::vector<double> random_entries(Rng& rng, std::size_t n, double decay) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0) * std::exp(-decay * static_cast<double>(i));
  return v;
}

}  // namespace

TEST_CASE("norm_alpha of simple vectors") {
  CHECK(norm_alpha(ScaleVector({1.0, 0.0, 0.0}), 3.7) == 1.0);
  CHECK(norm_alpha(ScaleVector({1.0, 1.0}), 0.0) == 2.0);
  CHECK(norm_alpha(ScaleVector(std::vector<double>{}), 5.0) == 0.0);
}

TEST_CASE("norm_alpha matches the closed-form geometric sum") {
  for (double r : {0.3, 0.5, 0.9}) {
    for (double alpha : {-0.5, 0.0, 0.4}) {
      const std::size_t n = 40;
      std::vector<double> u(n);
      for (std::size_t i = 0; i < n; ++i) u[i] = std::pow(r, static_cast<double>(i));
      const double q = r * std::exp(alpha);
      const double expected = (1.0 - std::pow(q, static_cast<double>(n))) / (1.0 - q);
      CHECK(norm_alpha(ScaleVector(u), alpha) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("norm_alpha reports weight overflow") {
  std::vector<double> u(1000, 1.0);
  try {
    norm_alpha(ScaleVector(u), 2.0);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RangeOverflow);
  }
}

TEST_CASE("dual_pairing examples") {
  CHECK(dual_pairing(ScaleVector::unit(0, 3), DualVector::unit(0, 3)) == 1.0);
  CHECK(dual_pairing(ScaleVector({1.0, -2.0, 3.0}), DualVector(std::vector<double>{})) == 0.0);
  Rng rng(11);
  const auto u = random_entries(rng, 16, 0.0);
  const auto l = random_entries(rng, 16, 0.0);
  double direct = 0.0;
  for (std::size_t i = 0; i < 16; ++i) direct += u[i] * l[i];
  CHECK(dual_pairing(ScaleVector(u), DualVector(l)) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("dual_pairing zero-extends the shorter operand") {
  CHECK(dual_pairing(ScaleVector({1.0, 2.0, 3.0}), DualVector({2.0})) == 2.0);
}

TEST_CASE("truncate examples") {
  const ScaleVector u({1.0, 2.0, 3.0});
  const auto same = truncate(u, 3, 1.0);
  CHECK(same.support_len() == 3);
  CHECK(same.tail_bound() == 0.0);

  const auto cut = truncate(ScaleVector({1.0, 1.0}), 1, 0.0);
  CHECK(cut.support_len() == 1);
  CHECK(cut[0] == 1.0);
  CHECK(cut.tail_bound() == 1.0);
  CHECK(cut.tail_alpha() == 0.0);

  std::vector<double> g(60);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::ldexp(1.0, -static_cast<int>(i));
  const auto geo = truncate(ScaleVector(g), 10, 0.0);
  // 2^-10 + 2^-11 + ... + 2^-59 = 2^-9 - 2^-59
  CHECK(geo.tail_bound() == doctest::Approx(std::ldexp(1.0, -9)).epsilon(1e-15));
}

TEST_CASE("property: monotone embedding and dual monotonicity") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 40));
    const auto u = random_entries(rng, n, rng.uniform(0.0, 1.0));
    const double a1 = rng.uniform(-2.0, 1.0);
    const double a2 = a1 + rng.uniform(0.0, 1.0);
    CHECK(norm_alpha(u, a1) <= norm_alpha(u, a2));
    CHECK(dual_norm(u, a2) <= dual_norm(u, a1));
  }
}

TEST_CASE("property: pairing bound on an alpha grid") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 32));
    const auto u = random_entries(rng, n, 0.3);
    const auto l = random_entries(rng, n, -0.1);
    const double pairing = std::abs(dual_pairing(u, l));
    for (double alpha = -1.0; alpha <= 1.0; alpha += 0.25) {
      CHECK(pairing <= norm_alpha(u, alpha) * dual_norm(l, alpha) * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("property: truncate is contractive and conservative") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 40));
    const ScaleVector u(random_entries(rng, n, 0.2));
    const auto cut = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n)));
    const double alpha_max = rng.uniform(-1.0, 1.0);
    const auto t = truncate(u, cut, alpha_max);
    for (double alpha = alpha_max - 1.0; alpha <= alpha_max; alpha += 0.25) {
      CHECK(norm_alpha(t, alpha) <= norm_alpha(u, alpha));
      CHECK(norm_alpha(u, alpha) <= (norm_alpha(t, alpha) + t.tail_bound()) * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("graded norms use level and measure") {
  const Grading grading({0, 1, 1, 2}, {1.0, 0.5, 0.5, 0.125});
  const std::vector<double> u{1.0, 2.0, -2.0, 8.0};
  // 1 + 0.5*2*e + 0.5*2*e + 0.125*8*e^2
  const double e = std::exp(1.0);
  CHECK(norm_alpha(u, 1.0, grading) == doctest::Approx(1.0 + 2.0 * e + e * e).epsilon(1e-15));
  CHECK(dual_norm(u, 1.0, grading) == doctest::Approx(8.0 / (e * e)).epsilon(1e-15));
  CHECK(dual_pairing(u, u, grading) == doctest::Approx(1.0 + 2.0 + 2.0 + 8.0).epsilon(1e-15));
}

TEST_CASE("vector JSON and CSV round trip") {
  const ScaleVector u({0.1, -2.5e-300, 3.0}, 1.5, 0.25);
  const auto j = u.to_json();
  const auto back = ScaleVector::from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.support_len() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == u[i]);
  CHECK(back.tail_alpha() == 1.5);
  CHECK(back.tail_bound() == 0.25);
  CHECK(u.to_csv().rfind("index,value\n0,0.10000000000000001\n", 0) == 0);
}

TEST_CASE("scale vector invariants are enforced") {
  CHECK_THROWS_AS(ScaleVector({std::nan("")}), Error);
  CHECK_THROWS_AS(ScaleVector({1.0}, 0.0, -1.0), Error);
}
