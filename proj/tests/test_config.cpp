#include <cmath>
#include <string>
#include <vector>

#include "config.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "fixtures.hpp"

using namespace scaleevo;

namespace {

std::string fixture(const char* name) { return std::string(SCALEEVO_FIXTURES_DIR) + "/" + name; }

double max_difference(const OperatorMatrix& a, const OperatorMatrix& b) {
  const std::size_t n = std::max(a.cols(), b.cols());
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> ca(n + 8, 0.0);
    std::vector<double> cb(n + 8, 0.0);
    if (k < a.cols()) {
      for (const auto& e : a.column(k)) ca[e.row] = e.value;
    }
    if (k < b.cols()) {
      for (const auto& e : b.column(k)) cb[e.row] = e.value;
    }
    for (std::size_t i = 0; i < ca.size(); ++i) worst = std::max(worst, std::abs(ca[i] - cb[i]));
  }
  return worst;
}

// Runs parse_model and returns the ConfigError message, or "" when parsing succeeded.
std::string config_error(const std::string& text) {
  try {
    parse_model(text, "m.yaml");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  return "";
}

const char* kMinimalOde = R"(model: ode
scale:
  dimension: 8
  alpha_star: -1
death:
  generator: affine
  coefficients: [1, 1]
)";

}  // namespace

TEST_CASE("decaying band fixture file matches the programmatic model") {
  const auto cfg = load_model(fixture("decaying_band.yaml"));
  const auto ref = decaying_band_model(256);
  REQUIRE(cfg.kind == ModelKind::Ode);
  REQUIRE(cfg.ode.dimension() == 256);
  CHECK(cfg.ode.d.rates() == ref.d.rates());
  CHECK(max_difference(cfg.ode.b, ref.b) < 1e-15);
  CHECK(max_difference(cfg.ode.c, ref.c) < 1e-15);
  CHECK(cfg.ode.alpha_star == ref.alpha_star);
  CHECK(cfg.ode.alpha_grid == ref.alpha_grid);
  CHECK(cfg.ode.nu_grid == ref.nu_grid);
  REQUIRE(cfg.initial.size() == 256);
  CHECK(cfg.initial[3] == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
  CHECK(cfg.functional == std::vector<double>{1.0});
  CHECK_FALSE(cfg.schedule.has_value());
}

TEST_CASE("lowering fixture file matches the programmatic model") {
  const auto cfg = load_model(fixture("lowering.yaml"));
  const auto ref = lowering_model(64);
  CHECK(cfg.ode.d.rates() == ref.d.rates());
  CHECK(max_difference(cfg.ode.b, ref.b) < 1e-15);
  CHECK(max_difference(cfg.ode.c, ref.c) < 1e-15);
  CHECK(cfg.initial.size() == 8);
}

TEST_CASE("logistic fixture file matches the reference parameters") {
  const auto cfg = load_model(fixture("logistic_reference.yaml"));
  const auto ref = reference_logistic_params(8);
  REQUIRE(cfg.kind == ModelKind::Logistic);
  CHECK(cfg.logistic.cells == 8);
  CHECK(cfg.logistic.spacing == doctest::Approx(0.125));
  CHECK(cfg.logistic.m == ref.m);
  CHECK(cfg.logistic.theta == ref.theta);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(cfg.logistic.a_plus[j] == doctest::Approx(ref.a_plus[j]).epsilon(1e-14));
    CHECK(cfg.logistic.a_minus[j] == doctest::Approx(ref.a_minus[j]).epsilon(1e-14));
  }
  CHECK(cfg.n_max == 2);
  REQUIRE(cfg.hierarchy.has_value());
  CHECK(cfg.hierarchy->kind == HierarchyKind::Correlation);
  CHECK(cfg.hierarchy->comps[2][5] == doctest::Approx(0.25));
  CHECK(cfg.sampler.samples == 2000);
}

TEST_CASE("mortality fixture has zero kernels and a symmetric random hierarchy") {
  const auto cfg = load_model(fixture("mortality_only.yaml"));
  CHECK(kernel_sup(cfg.logistic.a_plus) == 0.0);
  CHECK(kernel_sup(cfg.logistic.a_minus) == 0.0);
  REQUIRE(cfg.hierarchy.has_value());
  CHECK(cfg.hierarchy->n_max() == 3);
  CHECK(cfg.hierarchy->symmetry_defect() == 0.0);
}

TEST_CASE("unknown keys are rejected with line and column") {
  const auto msg = config_error(std::string(kMinimalOde) + "  colour: red\n");
  CHECK(msg.find("m.yaml:8:3:") == 0);
  CHECK(msg.find("unknown key 'colour'") != std::string::npos);
  CHECK(config_error(std::string(kMinimalOde) + "extra: 1\n").find("m.yaml:8:1:") == 0);
}

TEST_CASE("malformed values are rejected") {
  CHECK(config_error(kMinimalOde).empty());
  CHECK_FALSE(config_error("model: ode\nscale: {dimension: x, alpha_star: 0}\n").empty());
  CHECK_FALSE(config_error("model: ode\nscale: {dimension: 0, alpha_star: 0}\n").empty());
  CHECK_FALSE(config_error("model: ode\nscale: {dimension: 4.5, alpha_star: 0}\n").empty());
  CHECK_FALSE(config_error("model: quantum\n").empty());
  CHECK_FALSE(config_error("model: ode\nscale: [1, 2\n").empty());
  CHECK_FALSE(config_error("").empty());
  // alpha_grid entries must exceed alpha_star.
  CHECK_FALSE(config_error("model: ode\nscale: {dimension: 4, alpha_star: 0, alpha_grid: [-1]}\n"
                           "death: {generator: affine, coefficients: [1]}\n")
                  .empty());
  // Negative death rates.
  CHECK_FALSE(config_error("model: ode\nscale: {dimension: 4, alpha_star: 0}\n"
                           "death: {generator: affine, coefficients: [-1]}\n")
                  .empty());
  // Schedule times must increase.
  CHECK_FALSE(config_error(std::string(kMinimalOde) + "schedule: {times: [0, 0], scales: [1, 2]}\n").empty());
  // A logistic model whose kernels are not nonnegative.
  CHECK_FALSE(config_error("model: logistic\nlogistic: {cells: 3}\n"
                           "kernel_plus: {generator: values, values: [1, -1, -1]}\n"
                           "kernel_minus: {generator: zero}\n")
                  .empty());
}

TEST_CASE("missing files are configuration errors") {
  try {
    load_model("/nonexistent/model.yaml");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("matrix generators produce the documented entries") {
  const auto cfg = parse_model(std::string(kMinimalOde) +
                               "birth: {generator: shift, offset: 1, value: 0.5, relative: 0.25}\n"
                               "coupling: {generator: coo, entries: [[0, 2, 1.5], [3, 1, -2]]}\n");
  // b_{k+1,k} = 0.5 + 0.25 d_k with d_k = 1 + k.
  const auto& b = cfg.ode.b;
  for (std::size_t k = 0; k + 1 < 8; ++k) {
    REQUIRE(b.column(k).size() == 1);
    CHECK(b.column(k)[0].row == k + 1);
    CHECK(b.column(k)[0].value == doctest::Approx(0.5 + 0.25 * (1.0 + static_cast<double>(k))));
  }
  CHECK(cfg.ode.c.nnz() == 2);
  const auto num = parse_model(std::string(kMinimalOde) + "coupling: {generator: number, factor: 2}\n");
  CHECK(num.ode.c.diagonal_entries(8)[5] == 10.0);
}

TEST_CASE("schedule scales the coupling in time") {
  const auto cfg = parse_model(std::string(kMinimalOde) +
                               "coupling: {generator: diagonal, values: [1, 1]}\n"
                               "schedule: {times: [0, 1], scales: [0, 2], interpolation: linear}\n");
  REQUIRE(cfg.schedule.has_value());
  const auto fam = coupling_family(cfg);
  const auto mid = fam.at(0.5);
  CHECK(mid.diagonal_entries(2)[0] == doctest::Approx(1.0));
  const auto pc = parse_model(std::string(kMinimalOde) +
                              "coupling: {generator: diagonal, values: [1, 1]}\n"
                              "schedule: {times: [0, 1], scales: [3, 2], interpolation: piecewise_constant}\n");
  CHECK(coupling_family(pc).at(0.5).diagonal_entries(2)[0] == doctest::Approx(3.0));
}

TEST_CASE("logistic model without the stability margin still parses; the check is separate") {
  const auto cfg = parse_model("model: logistic\nlogistic: {cells: 4, theta: 1, n_max: 3}\n"
                               "kernel_plus: {generator: tophat, amplitude: 1, width: 0.3}\n"
                               "kernel_minus: {generator: zero}\n"
                               "initial: {kind: quasiobservable, generator: indicator, level: 2}\n");
  CHECK(cfg.n_max == 3);
  CHECK_FALSE(check_G(cfg.logistic).pass);
  CHECK(cfg.hierarchy->comps[2][0] == 1.0);
  CHECK(cfg.hierarchy->comps[1][0] == 0.0);
}
