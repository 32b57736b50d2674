#include "scaleevo/scaleevo.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "logistic_model.hpp"
#include "ode_system.hpp"
#include "ovcyannikov.hpp"
#include "report.hpp"
#include "verify.hpp"

struct se_model {
  scaleevo::ModelConfig cfg;
};

struct se_result {
  std::string json;
  std::optional<std::string> csv;
  std::optional<std::string> text;
  int passed = -1;
};

namespace {

using namespace scaleevo;
using Json = nlohmann::ordered_json;

thread_local std::string g_last_error;

se_status to_status(ErrorCode code) { return static_cast<se_status>(static_cast<int>(code)); }

// Runs body and converts every exception into a status and the thread's last error.
template <class F>
se_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SE_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SE_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SE_INTERNAL;
  }
}

se_options resolve(const se_options* opts) {
  se_options o;
  se_options_default(&o);
  return opts ? *opts : o;
}

EvolveOptions evolve_options(const se_options& o) {
  EvolveOptions e;
  e.tol = o.tol;
  e.panels = o.panels;
  e.rho_max = o.rho_max;
  e.max_terms = o.max_terms;
  if (!(e.tol > 0.0)) fail(ErrorCode::InvalidInput, "--tol must be positive");
  if (e.panels < 2 || e.panels % 2 != 0) fail(ErrorCode::InvalidInput, "--panels must be an even number >= 2");
  if (!(e.rho_max > 0.0 && e.rho_max < 1.0)) fail(ErrorCode::InvalidInput, "--rho-max must lie in (0, 1)");
  if (e.max_terms < 1) fail(ErrorCode::InvalidInput, "max_terms must be positive");
  return e;
}

void require(const se_model* m, ModelKind kind) {
  if (!m) fail(ErrorCode::InvalidInput, "no model given");
  if (m->cfg.kind != kind) {
    fail(ErrorCode::InvalidInput, m->cfg.source + ": this command needs " +
                                      (kind == ModelKind::Ode ? "an ODE model" : "a logistic model"));
  }
}

void set_out(se_result** out, se_result* r) {
  if (!out) {
    delete r;
    fail(ErrorCode::InvalidInput, "null output handle");
  }
  *out = r;
}

Json header(const char* command, const se_model* m, const se_options& o) {
  Json j;
  j["command"] = command;
  if (m) j["model"] = m->cfg.source;
  j["seed"] = o.seed;
  return j;
}

// Appends every key of body after the header keys.
se_result* make_result(Json head, const Json& body) {
  for (auto it = body.begin(); it != body.end(); ++it) head[it.key()] = it.value();
  auto* r = new se_result;
  r->json = to_report_json(head);
  return r;
}

Json certificate_json(const KCertificate& c) {
  Json j;
  j["K"] = c.K;
  j["sampled_max"] = c.sampled_max;
  j["sampled"] = c.sampled;
  j["log_norm_max"] = c.log_norm_max;
  j["contraction_by_log_norm"] = c.contraction_by_log_norm;
  return j;
}

std::vector<double> levels(double alpha, double alpha_prime) {
  return {alpha_prime, 0.5 * (alpha + alpha_prime), alpha};
}

const std::vector<double>& initial_of(const ModelConfig& cfg) {
  if (cfg.initial.empty()) fail(ErrorCode::ConfigError, cfg.source + ": the model has no 'initial' vector");
  return cfg.initial;
}

void check_times(double s, double t) {
  if (!std::isfinite(s) || !std::isfinite(t)) fail(ErrorCode::InvalidInput, "times must be finite");
  if (t < s) fail(ErrorCode::TimeOrderViolation, "need s <= t");
}

WConfig model_system(const ModelConfig& cfg, double alpha, double alpha_prime, double span, KCertificate* cert) {
  if (cfg.kind == ModelKind::Ode) return ode_wconfig(cfg, levels(alpha, alpha_prime), span, cert);
  const auto ops = build_discrete_operators(cfg.logistic, cfg.n_max);
  return logistic_wconfig(cfg.logistic, ops, alpha, alpha_prime, span, cert);
}

enum class Flow { Forward, Backward, Dual };

se_result* evolve(const se_model* m, Flow flow, double alpha, double ap, double s, double t, const se_options& o) {
  require(m, ModelKind::Ode);
  check_times(s, t);
  const auto& cfg = m->cfg;
  KCertificate cert;
  const WConfig w = ode_wconfig(cfg, levels(alpha, ap), t - s, &cert);
  const auto opts = evolve_options(o);
  EvolutionResult res;
  const char* command = "solve";
  if (flow == Flow::Forward) {
    res = forward_evolve(w, ScaleVector(initial_of(cfg)), s, t, alpha, ap, opts);
  } else if (flow == Flow::Backward) {
    command = "backward";
    res = backward_evolve(w, ScaleVector(initial_of(cfg)), s, t, alpha, ap, opts);
  } else {
    command = "dual";
    if (cfg.functional.empty()) fail(ErrorCode::ConfigError, cfg.source + ": the model has no 'functional' vector");
    res = dual_evolve(w, DualVector(cfg.functional), s, t, alpha, ap, opts);
  }
  res.extra["contraction_certificate"] = certificate_json(cert);
  auto* r = make_result(header(command, m, o), res.to_json());
  if (res.dual) {
    std::string csv = "index,value\n";
    for (std::size_t i = 0; i < res.value.size(); ++i) csv += std::to_string(i) + ',' + format_double(res.value[i]) + '\n';
    r->csv = csv;
  } else {
    r->csv = res.vector().to_csv();
  }
  return r;
}

}  // namespace

extern "C" {

void se_options_default(se_options* opts) {
  if (!opts) return;
  opts->tol = 1e-8;
  opts->panels = 64;
  opts->rho_max = 0.95;
  opts->max_terms = 200;
  opts->defect_tol = std::numeric_limits<double>::infinity();
  opts->seed = 1;
}

const char* se_version(void) { return "0.1.0"; }

const char* se_status_name(se_status status) {
  if (status == SE_OK) return "OK";
  if (status < SE_INVALID_INPUT || status > SE_INTERNAL) return "Unknown";
  return error_code_name(static_cast<ErrorCode>(status));
}

int se_exit_code(se_status status) {
  if (status == SE_OK) return 0;
  if (status < SE_INVALID_INPUT || status > SE_INTERNAL) return 1;
  return exit_code_for(static_cast<ErrorCode>(status));
}

const char* se_last_error(void) { return g_last_error.c_str(); }

se_status se_model_load(const char* path, se_model** out) {
  return guarded([&] {
    if (!path || !out) fail(ErrorCode::InvalidInput, "null argument");
    *out = new se_model{load_model(path)};
  });
}

se_status se_model_parse(const char* text, const char* source, se_model** out) {
  return guarded([&] {
    if (!text || !out) fail(ErrorCode::InvalidInput, "null argument");
    *out = new se_model{parse_model(text, source ? source : "<model>")};
  });
}

se_model_kind se_model_get_kind(const se_model* model) {
  return model && model->cfg.kind == ModelKind::Logistic ? SE_MODEL_LOGISTIC : SE_MODEL_ODE;
}

void se_model_free(se_model* model) { delete model; }

se_status se_horizon(const se_model* model, double alpha, double alpha_prime, const se_options* opts,
                     se_result** out) {
  return guarded([&] {
    if (!model) fail(ErrorCode::InvalidInput, "no model given");
    const auto o = resolve(opts);
    const WConfig w = model_system(model->cfg, alpha, alpha_prime, 0.0, nullptr);
    const auto table = horizon_table(w, alpha, alpha_prime);
    Json body;
    body["alpha"] = alpha;
    body["alpha_prime"] = alpha_prime;
    body["T"] = existence_time(alpha_prime, alpha, table);
    body["K"] = table.K;
    body["alpha_star"] = table.alpha_star;
    body["M_alpha"] = table.M.is_zero() ? 0.0 : table.M(alpha);
    body["M"] = table.M.to_json();
    set_out(out, make_result(header("horizon", model, o), body));
  });
}

se_status se_solve(const se_model* model, double alpha, double alpha_prime, double s, double t,
                   const se_options* opts, se_result** out) {
  return guarded([&] { set_out(out, evolve(model, Flow::Forward, alpha, alpha_prime, s, t, resolve(opts))); });
}

se_status se_backward(const se_model* model, double alpha, double alpha_prime, double s, double t,
                      const se_options* opts, se_result** out) {
  return guarded([&] { set_out(out, evolve(model, Flow::Backward, alpha, alpha_prime, s, t, resolve(opts))); });
}

se_status se_dual(const se_model* model, double alpha, double alpha_prime, double s, double t,
                  const se_options* opts, se_result** out) {
  return guarded([&] { set_out(out, evolve(model, Flow::Dual, alpha, alpha_prime, s, t, resolve(opts))); });
}

se_status se_stability(const se_model* model, const se_model* other, double alpha, double alpha1, double alpha0,
                       double alpha_prime, double s, double t, const se_options* opts, se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Ode);
    require(other, ModelKind::Ode);
    check_times(s, t);
    const auto o = resolve(opts);
    if (model->cfg.ode.dimension() != other->cfg.ode.dimension()) {
      fail(ErrorCode::InvalidInput, "the two models need the same working dimension");
    }
    const auto lv = levels(alpha, alpha_prime);
    const WConfig w1 = ode_wconfig(model->cfg, lv, t - s);
    const WConfig w2 = ode_wconfig(other->cfg, lv, t - s);
    const auto rep = stability_compare(w1, w2, s, t, alpha, alpha1, alpha0, alpha_prime,
                                       ScaleVector(initial_of(model->cfg)), evolve_options(o));
    Json body;
    body["other"] = other->cfg.source;
    body["alpha"] = alpha;
    body["alpha1"] = alpha1;
    body["alpha0"] = alpha0;
    body["alpha_prime"] = alpha_prime;
    body["s"] = s;
    body["t"] = t;
    body["report"] = rep.to_json();
    auto* r = make_result(header("stability", model, o), body);
    r->passed = rep.measured <= rep.bound + rep.budget ? 1 : 0;
    set_out(out, r);
  });
}

se_status se_truncation_study(const se_model* model, double alpha, double alpha_prime, double t,
                              const size_t* sizes, size_t count, const se_options* opts, se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Ode);
    const auto o = resolve(opts);
    if (model->cfg.schedule) fail(ErrorCode::InvalidInput, "truncation-study needs a time-independent coupling");
    if (!sizes || count == 0) fail(ErrorCode::InvalidInput, "truncation-study needs at least one N");
    std::vector<std::size_t> N(sizes, sizes + count);
    const auto rep = truncation_study(model->cfg.ode, ScaleVector(initial_of(model->cfg)), alpha, alpha_prime, t, N,
                                      evolve_options(o));
    Json body;
    body["alpha"] = alpha;
    body["alpha_prime"] = alpha_prime;
    body["t"] = t;
    const Json study = rep.to_json();
    for (auto it = study.begin(); it != study.end(); ++it) body[it.key()] = it.value();
    auto* r = make_result(header("truncation-study", model, o), body);
    r->csv = rep.to_csv();
    set_out(out, r);
  });
}

se_status se_global(const se_model* model, double alpha_prime, double alpha_ceiling, int steps, double s, double t,
                    const se_options* opts, se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Ode);
    check_times(s, t);
    if (steps < 0) fail(ErrorCode::InvalidInput, "--steps must be >= 0");
    const auto o = resolve(opts);
    KCertificate cert;
    const double top = std::max(alpha_ceiling, alpha_prime);
    const WConfig w = ode_wconfig(model->cfg, levels(top, alpha_prime), t - s, &cert);
    GlobalOptions g;
    g.alpha_ceiling = alpha_ceiling;
    g.steps = steps;
    auto res = global_evolve(w, ScaleVector(initial_of(model->cfg)), s, t, alpha_prime, g, evolve_options(o));
    res.extra["contraction_certificate"] = certificate_json(cert);
    auto* r = make_result(header("global", model, o), res.to_json());
    r->csv = res.vector().to_csv();
    set_out(out, r);
  });
}

se_status se_validate(const se_model* model, const se_options* opts, se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Ode);
    const auto o = resolve(opts);
    const auto& m = model->cfg.ode;
    auto grid = m.alpha_grid;
    if (grid.empty()) grid = {m.alpha_star + 0.5, m.alpha_star + 1.0};
    const auto rep = validate_conditions(m, grid, m.nu_grid);
    auto* r = make_result(header("validate", model, o), rep.to_json());
    r->passed = rep.all_pass() ? 1 : 0;
    set_out(out, r);
  });
}

se_status se_logistic_check_g(const se_model* model, const se_options* opts, se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Logistic);
    const auto o = resolve(opts);
    const auto rep = check_G(model->cfg.logistic, model->cfg.sampler);
    Json body;
    body["params"] = model->cfg.logistic.to_json();
    body["sampler"] = {{"n_max", model->cfg.sampler.n_max},
                       {"samples", model->cfg.sampler.samples},
                       {"seed", model->cfg.sampler.seed}};
    body["report"] = rep.to_json();
    auto* r = make_result(header("logistic check-g", model, o), body);
    r->passed = rep.pass ? 1 : 0;
    set_out(out, r);
  });
}

se_status se_logistic_bounds(const se_model* model, double alpha, double alpha_prime, const se_options* opts,
                             se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Logistic);
    const auto o = resolve(opts);
    const auto& p = model->cfg.logistic;
    const auto bounds = continuum_bounds(p, alpha, alpha_prime);
    const auto ops = build_discrete_operators(p, model->cfg.n_max);
    const auto grading = ops.layout.grading();
    Json body;
    body["alpha"] = alpha;
    body["alpha_prime"] = alpha_prime;
    body["n_max"] = model->cfg.n_max;
    body["alpha_star"] = p.alpha_star();
    body["kernel_norms"] = {{"a_plus_sup", kernel_sup(p.a_plus)},
                            {"a_plus_l1", kernel_l1(p.a_plus, p.spacing)},
                            {"a_minus_sup", kernel_sup(p.a_minus)},
                            {"a_minus_l1", kernel_l1(p.a_minus, p.spacing)}};
    body["bounds"] = bounds.to_json();
    const double measured = operator_norm(ops.lhat1, alpha, alpha_prime, grading);
    body["measured_L1"] = measured;
    body["within_bound"] = measured <= bounds.L1;
    auto* r = make_result(header("logistic bounds", model, o), body);
    r->passed = measured <= bounds.L1 ? 1 : 0;
    set_out(out, r);
  });
}

se_status se_logistic_evolve(const se_model* model, double alpha, double alpha_prime, double t,
                             const se_options* opts, se_result** out) {
  return guarded([&] {
    require(model, ModelKind::Logistic);
    const auto o = resolve(opts);
    if (!model->cfg.hierarchy) fail(ErrorCode::ConfigError, model->cfg.source + ": the model has no 'initial' hierarchy");
    HierarchyEvolveOptions ho;
    ho.evolve = evolve_options(o);
    ho.defect_tol = o.defect_tol;
    const auto res = evolve_hierarchy(model->cfg.logistic, *model->cfg.hierarchy, t, alpha, alpha_prime, ho);
    auto* r = make_result(header("logistic evolve", model, o), res.to_json());
    r->csv = res.value.to_csv();
    set_out(out, r);
  });
}

se_status se_verify(const char* suite, const char* fixtures_dir, const se_options* opts, se_result** out) {
  return guarded([&] {
    const auto o = resolve(opts);
    const auto rep = run_verify(suite ? suite : "all", o.seed, fixtures_dir ? fixtures_dir : "");
    auto* r = new se_result;
    r->json = to_report_json(rep.to_json());
    r->csv = rep.to_csv();
    r->text = rep.to_table();
    r->passed = rep.all_pass() ? 1 : 0;
    set_out(out, r);
  });
}

se_status se_verify_criterion(int id, const se_options* opts, se_result** out) {
  return guarded([&] {
    const auto o = resolve(opts);
    VerifyReport rep{"acceptance." + std::to_string(id), o.seed, {run_acceptance_criterion(id, o.seed)}};
    auto* r = new se_result;
    r->json = to_report_json(rep.to_json());
    r->csv = rep.to_csv();
    r->text = rep.to_table();
    r->passed = rep.all_pass() ? 1 : 0;
    set_out(out, r);
  });
}

const char* se_result_json(const se_result* result) { return result ? result->json.c_str() : nullptr; }

const char* se_result_csv(const se_result* result) {
  return result && result->csv ? result->csv->c_str() : nullptr;
}

const char* se_result_text(const se_result* result) {
  return result && result->text ? result->text->c_str() : nullptr;
}

int se_result_passed(const se_result* result) { return result ? result->passed : -1; }

void se_result_free(se_result* result) { delete result; }

}  // extern "C"
