#include <cmath>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "scaleevo/scaleevo.h"

namespace {

std::string fixture(const char* name) { return std::string(SCALEEVO_FIXTURES_DIR) + "/" + name; }

struct Model {
  se_model* m = nullptr;
  explicit Model(const std::string& path) { REQUIRE(se_model_load(path.c_str(), &m) == SE_OK); }
  ~Model() { se_model_free(m); }
};

struct Result {
  se_result* r = nullptr;
  ~Result() { se_result_free(r); }
  nlohmann::json json() const { return nlohmann::json::parse(se_result_json(r)); }
};

se_options seeded(unsigned long long seed) {
  se_options o;
  se_options_default(&o);
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("capi: defaults and status names") {
  se_options o;
  se_options_default(&o);
  CHECK(o.tol == 1e-8);
  CHECK(o.panels == 64);
  CHECK(o.rho_max == 0.95);
  CHECK(std::isinf(o.defect_tol));
  CHECK(std::string(se_status_name(SE_OK)) == "OK");
  CHECK(se_exit_code(SE_OK) == 0);
  CHECK(se_exit_code(SE_CONFIG_ERROR) == 2);
  CHECK(se_exit_code(SE_INVALID_SCALE_PAIR) == 2);
  CHECK(se_exit_code(SE_EXISTENCE_HORIZON_EXCEEDED) == 1);
  CHECK(se_exit_code(SE_IO_ERROR) == 1);
}

TEST_CASE("capi: load failures report config errors with a position") {
  se_model* m = nullptr;
  CHECK(se_model_load("/no/such/model.yaml", &m) == SE_CONFIG_ERROR);
  CHECK(m == nullptr);
  CHECK(se_model_parse("model: ode\nscale:\n  dimension: 8\n  bogus: 1\n", "bad.yaml", &m) == SE_CONFIG_ERROR);
  CHECK(std::string(se_last_error()).rfind("bad.yaml:4:3:", 0) == 0);
  CHECK(se_model_load(nullptr, &m) == SE_INVALID_INPUT);
}

TEST_CASE("capi: horizon report carries the certificate constants") {
  Model model(fixture("decaying_band.yaml"));
  CHECK(se_model_get_kind(model.m) == SE_MODEL_ODE);
  const auto o = seeded(5);
  Result res;
  REQUIRE(se_horizon(model.m, 3.0, 1.0, &o, &res.r) == SE_OK);
  const auto j = res.json();
  CHECK(j["command"] == "horizon");
  CHECK(j["seed"] == 5);
  const double T = j["T"].get<double>();
  const double K = j["K"].get<double>();
  const double M = j["M_alpha"].get<double>();
  CHECK(T == doctest::Approx(2.0 / (2.0 * K * std::exp(1.0) * M)).epsilon(1e-14));
  CHECK(se_result_csv(res.r) == nullptr);
  CHECK(se_result_passed(res.r) == -1);
}

TEST_CASE("capi: solve inside the horizon and refusal beyond it") {
  Model model(fixture("decaying_band.yaml"));
  const auto o = seeded(1);
  Result h;
  REQUIRE(se_horizon(model.m, 1.0, 0.0, &o, &h.r) == SE_OK);
  const double T = h.json()["T"].get<double>();

  Result fwd;
  REQUIRE(se_solve(model.m, 1.0, 0.0, 0.0, 0.5 * T, &o, &fwd.r) == SE_OK);
  CHECK(std::string(se_result_csv(fwd.r)).rfind("index,value", 0) == 0);
  CHECK(fwd.json()["command"] == "solve");

  Result far;
  CHECK(se_solve(model.m, 1.0, 0.0, 0.0, 10.0 * T, &o, &far.r) == SE_EXISTENCE_HORIZON_EXCEEDED);
  CHECK(far.r == nullptr);
  Result backwards;
  CHECK(se_solve(model.m, 1.0, 0.0, 1.0, 0.0, &o, &backwards.r) == SE_TIME_ORDER_VIOLATION);
  Result pair;
  CHECK(se_solve(model.m, 0.0, 1.0, 0.0, 0.0, &o, &pair.r) == SE_INVALID_SCALE_PAIR);
}

TEST_CASE("capi: commands check the model kind") {
  Model logistic(fixture("mortality_only.yaml"));
  CHECK(se_model_get_kind(logistic.m) == SE_MODEL_LOGISTIC);
  Result r;
  CHECK(se_solve(logistic.m, 1.0, 0.0, 0.0, 0.1, nullptr, &r.r) == SE_INVALID_INPUT);
  Model ode(fixture("lowering.yaml"));
  CHECK(se_logistic_check_g(ode.m, nullptr, &r.r) == SE_INVALID_INPUT);
}

TEST_CASE("capi: truncation study CSV lists N ascending") {
  Model model(fixture("lowering.yaml"));
  const size_t sizes[] = {4, 8, 16};
  Result r;
  REQUIRE(se_truncation_study(model.m, 1.0, 0.0, 0.05, sizes, 3, nullptr, &r.r) == SE_OK);
  const std::string csv = se_result_csv(r.r);
  CHECK(csv.rfind("N,e_N\n4,", 0) == 0);
  CHECK(csv.find("\n8,") < csv.find("\n16,"));
}

TEST_CASE("capi: mortality-only hierarchy evolves and reports the hierarchy as CSV") {
  Model model(fixture("mortality_only.yaml"));
  Result r;
  REQUIRE(se_logistic_evolve(model.m, 1.3, 1.0, 0.1, nullptr, &r.r) == SE_OK);
  CHECK(se_result_csv(r.r) != nullptr);
  CHECK(r.json()["command"] == "logistic evolve");
  // Output levels must lie strictly above |ln theta| = 0.
  Result below;
  CHECK(se_logistic_evolve(model.m, 1.0, 0.0, 0.1, nullptr, &below.r) == SE_INVALID_SCALE_PAIR);
}

TEST_CASE("capi: verify results are byte-stable for a fixed seed") {
  const auto o = seeded(42);
  Result a;
  Result b;
  REQUIRE(se_verify_criterion(1, &o, &a.r) == SE_OK);
  REQUIRE(se_verify_criterion(1, &o, &b.r) == SE_OK);
  CHECK(std::string(se_result_json(a.r)) == se_result_json(b.r));
  CHECK(se_result_passed(a.r) == 1);
  CHECK(std::string(se_result_csv(a.r)).rfind("id,pass,measured,threshold", 0) == 0);
  Result bad;
  CHECK(se_verify_criterion(12, &o, &bad.r) == SE_INVALID_INPUT);
  CHECK(se_verify("everything", nullptr, &o, &bad.r) == SE_INVALID_INPUT);
}
