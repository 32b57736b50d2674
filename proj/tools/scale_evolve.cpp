// scale_evolve: command-line front end over the C interface of the library.
//
// Exit status: 0 on success, 1 on a computational failure or a failed check, 2 on a usage or
// configuration error. Reports go to --out (or standard output); diagnostics go to standard
// error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scaleevo/scaleevo.h"

namespace {

struct ModelDeleter {
  void operator()(se_model* m) const { se_model_free(m); }
};
struct ResultDeleter {
  void operator()(se_result* r) const { se_result_free(r); }
};
using ModelPtr = std::unique_ptr<se_model, ModelDeleter>;
using ResultPtr = std::unique_ptr<se_result, ResultDeleter>;

struct Settings {
  std::string model;
  std::string other;
  double alpha = 1.0;
  double alpha_prime = 0.0;
  std::optional<double> alpha1;
  std::optional<double> alpha0;
  double alpha_ceiling = 0.0;
  int steps = 0;
  double s = 0.0;
  double t = 0.0;
  std::vector<std::size_t> sizes{16, 32, 64, 128};
  std::string suite = "all";
  std::string fixtures;
  int criterion = 0;
  std::string out;
  std::string format = "json";
  se_options opts{};
};

// Thrown inside dispatch to end the run with a given exit status.
struct Exit {
  int code;
};

[[noreturn]] void fail_with(se_status status, const std::string& context) {
  std::cerr << "scale_evolve: " << context << ": " << se_status_name(status) << ": " << se_last_error() << '\n';
  throw Exit{se_exit_code(status)};
}

void check(se_status status, const std::string& context) {
  if (status != SE_OK) fail_with(status, context);
}

ModelPtr load(const std::string& path) {
  se_model* raw = nullptr;
  check(se_model_load(path.c_str(), &raw), "loading " + path);
  return ModelPtr(raw);
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (f) f << text;
  if (!f) {
    std::cerr << "scale_evolve: cannot write " << path << '\n';
    throw Exit{1};
  }
}

// Writes the report in the requested format and turns failed checks into exit status 1.
int emit(const ResultPtr& r, const Settings& st) {
  const char* body = st.format == "csv" ? se_result_csv(r.get()) : se_result_json(r.get());
  if (!body) {
    std::cerr << "scale_evolve: this command has no " << st.format << " output\n";
    return 2;
  }
  write_output(body, st.out);
  if (const char* table = se_result_text(r.get())) (st.out.empty() ? std::cerr : std::cout) << table;
  if (se_result_passed(r.get()) == 0) {
    std::cerr << "scale_evolve: one or more checks failed\n";
    return 1;
  }
  return 0;
}

void add_numeric(CLI::App* cmd, Settings& st) {
  cmd->add_option("--tol", st.opts.tol, "Error target for series and quadrature")->capture_default_str();
  cmd->add_option("--panels", st.opts.panels, "Initial Simpson panel count")->capture_default_str();
  cmd->add_option("--rho-max", st.opts.rho_max, "Largest admissible (t - s) / T")->capture_default_str();
  cmd->add_option("--seed", st.opts.seed, "Seed recorded in the report")->capture_default_str();
  cmd->add_option("--out", st.out, "Output file (default: standard output)");
  cmd->add_option("--format", st.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

void add_model(CLI::App* cmd, Settings& st) {
  cmd->add_option("--model", st.model, "Model file (YAML)")->required();
}

void add_levels(CLI::App* cmd, Settings& st) {
  cmd->add_option("--alpha", st.alpha, "Input level alpha")->capture_default_str();
  cmd->add_option("--alpha-prime", st.alpha_prime, "Output level alpha'")->capture_default_str();
}

void add_times(CLI::App* cmd, Settings& st, bool with_s) {
  if (with_s) cmd->add_option("--s", st.s, "Start time")->capture_default_str();
  cmd->add_option("--t", st.t, "End time")->required();
}

std::string default_fixtures() {
  if (const char* env = std::getenv("SCALE_EVOLVE_FIXTURES")) return env;
#ifdef SCALE_EVOLVE_FIXTURES_DIR
  if (std::filesystem::is_directory(SCALE_EVOLVE_FIXTURES_DIR)) return SCALE_EVOLVE_FIXTURES_DIR;
#endif
  return std::filesystem::is_directory("fixtures") ? "fixtures" : "";
}

}  // namespace

int main(int argc, char** argv) {
  Settings st;
  se_options_default(&st.opts);

  CLI::App app{"Evolution equations in scales of Banach spaces: horizons, perturbation series, "
               "infinite ODE systems and the spatial logistic hierarchy"};
  app.set_version_flag("--version", std::string(se_version()));
  app.require_subcommand(1);

  auto* horizon = app.add_subcommand("horizon", "Existence horizon T(alpha', alpha)");
  add_model(horizon, st);
  add_levels(horizon, st);
  add_numeric(horizon, st);

  auto* solve = app.add_subcommand("solve", "Forward evolution of the model's initial vector");
  auto* backward = app.add_subcommand("backward", "Backward evolution of the model's initial vector");
  auto* dual = app.add_subcommand("dual", "Dual evolution of the model's functional");
  for (auto* cmd : {solve, backward, dual}) {
    add_model(cmd, st);
    add_levels(cmd, st);
    add_times(cmd, st, true);
    add_numeric(cmd, st);
  }

  auto* stability = app.add_subcommand("stability", "Compare the evolutions of two models");
  add_model(stability, st);
  stability->add_option("--other", st.other, "Second model file")->required();
  add_levels(stability, st);
  stability->add_option("--alpha1", st.alpha1, "Upper intermediate level (default: alpha' + 2/3 (alpha - alpha'))");
  stability->add_option("--alpha0", st.alpha0, "Lower intermediate level (default: alpha' + 1/3 (alpha - alpha'))");
  add_times(stability, st, true);
  add_numeric(stability, st);

  auto* study = app.add_subcommand("truncation-study", "Errors of N-dimensional truncations against a reference");
  add_model(study, st);
  add_levels(study, st);
  add_times(study, st, false);
  study->add_option("--N", st.sizes, "Truncation sizes")->delimiter(',')->capture_default_str();
  add_numeric(study, st);

  auto* global = app.add_subcommand("global", "Evolution beyond one horizon by stepping through levels");
  add_model(global, st);
  global->add_option("--alpha-prime", st.alpha_prime, "Output level alpha'")->capture_default_str();
  global->add_option("--alpha-ceiling", st.alpha_ceiling, "Highest level available")->required();
  global->add_option("--steps", st.steps, "Number of steps (0: automatic)")->capture_default_str();
  add_times(global, st, true);
  add_numeric(global, st);

  auto* validate = app.add_subcommand("validate", "Check the structural conditions of an ODE model");
  add_model(validate, st);
  add_numeric(validate, st);

  auto* logistic = app.add_subcommand("logistic", "Spatial logistic model");
  logistic->require_subcommand(1);
  auto* check_g = logistic->add_subcommand("check-g", "Sample the kernel stability condition");
  add_model(check_g, st);
  add_numeric(check_g, st);
  auto* bounds = logistic->add_subcommand("bounds", "Generator norm estimates and the measured discrete norm");
  add_model(bounds, st);
  add_levels(bounds, st);
  add_numeric(bounds, st);
  auto* levolve = logistic->add_subcommand("evolve", "Evolve the model's initial hierarchy");
  add_model(levolve, st);
  add_levels(levolve, st);
  add_times(levolve, st, false);
  levolve->add_option("--defect-tol", st.opts.defect_tol, "Largest admissible closure defect");
  add_numeric(levolve, st);

  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  verify->add_option("--suite", st.suite, "Which checks to run")
      ->check(CLI::IsMember({"acceptance", "invariants", "fixtures", "all"}))
      ->capture_default_str();
  verify->add_option("--fixtures", st.fixtures, "Directory with the shipped model files");
  verify->add_option("--criterion", st.criterion, "Run a single acceptance criterion (1-11)");
  add_numeric(verify, st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    se_result* raw = nullptr;
    const se_options* o = &st.opts;
    if (*horizon) {
      const auto m = load(st.model);
      check(se_horizon(m.get(), st.alpha, st.alpha_prime, o, &raw), "horizon");
    } else if (*solve) {
      const auto m = load(st.model);
      check(se_solve(m.get(), st.alpha, st.alpha_prime, st.s, st.t, o, &raw), "solve");
    } else if (*backward) {
      const auto m = load(st.model);
      check(se_backward(m.get(), st.alpha, st.alpha_prime, st.s, st.t, o, &raw), "backward");
    } else if (*dual) {
      const auto m = load(st.model);
      check(se_dual(m.get(), st.alpha, st.alpha_prime, st.s, st.t, o, &raw), "dual");
    } else if (*stability) {
      const auto m = load(st.model);
      const auto other = load(st.other);
      const double span = st.alpha - st.alpha_prime;
      const double a1 = st.alpha1.value_or(st.alpha_prime + 2.0 * span / 3.0);
      const double a0 = st.alpha0.value_or(st.alpha_prime + span / 3.0);
      check(se_stability(m.get(), other.get(), st.alpha, a1, a0, st.alpha_prime, st.s, st.t, o, &raw), "stability");
    } else if (*study) {
      const auto m = load(st.model);
      check(se_truncation_study(m.get(), st.alpha, st.alpha_prime, st.t, st.sizes.data(), st.sizes.size(), o, &raw),
            "truncation-study");
    } else if (*global) {
      const auto m = load(st.model);
      check(se_global(m.get(), st.alpha_prime, st.alpha_ceiling, st.steps, st.s, st.t, o, &raw), "global");
    } else if (*validate) {
      const auto m = load(st.model);
      check(se_validate(m.get(), o, &raw), "validate");
    } else if (*check_g) {
      const auto m = load(st.model);
      check(se_logistic_check_g(m.get(), o, &raw), "logistic check-g");
    } else if (*bounds) {
      const auto m = load(st.model);
      check(se_logistic_bounds(m.get(), st.alpha, st.alpha_prime, o, &raw), "logistic bounds");
    } else if (*levolve) {
      const auto m = load(st.model);
      check(se_logistic_evolve(m.get(), st.alpha, st.alpha_prime, st.t, o, &raw), "logistic evolve");
    } else if (*verify) {
      if (st.criterion != 0) {
        check(se_verify_criterion(st.criterion, o, &raw), "verify");
      } else {
        const auto dir = st.fixtures.empty() ? default_fixtures() : st.fixtures;
        if (!dir.empty() && !std::filesystem::is_directory(dir)) {
          std::cerr << "scale_evolve: fixtures directory " << dir << " does not exist\n";
          return 2;
        }
        check(se_verify(st.suite.c_str(), dir.empty() ? nullptr : dir.c_str(), o, &raw), "verify");
      }
    }
    const ResultPtr result(raw);
    return emit(result, st);
  } catch (const Exit& e) {
    return e.code;
  }
}
