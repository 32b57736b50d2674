#pragma once

// C interface to the scale-evolution library. Models and results are opaque handles owned by
// the caller and released with the matching *_free function. Every operation returns an
// se_status; on failure the message of the most recent error on the calling thread is
// available from se_last_error().
//
// Results carry a JSON report (always), a CSV rendering (when the command has one) and a
// plain-text summary (for verify). Strings returned by accessors live as long as the result.

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SE_API __declspec(dllexport)
#else
#define SE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum se_status {
  SE_OK = 0,
  SE_INVALID_INPUT = 1,
  SE_INVALID_SCALE_PAIR = 2,
  SE_RANGE_OVERFLOW = 3,
  SE_TIME_ORDER_VIOLATION = 4,
  SE_EXISTENCE_HORIZON_EXCEEDED = 5,
  SE_HORIZON_TOO_TIGHT = 6,
  SE_HORIZON_EXHAUSTED = 7,
  SE_ORACLE_FAILURE = 8,
  SE_CONTRACTION_CERTIFICATE_FAILED = 9,
  SE_CLOSURE_UNSOUND = 10,
  SE_CONFIG_ERROR = 11,
  SE_IO_ERROR = 12,
  SE_INTERNAL = 13
} se_status;

typedef enum se_model_kind { SE_MODEL_ODE = 0, SE_MODEL_LOGISTIC = 1 } se_model_kind;

typedef struct se_model se_model;
typedef struct se_result se_result;

typedef struct se_options {
  double tol;        // target for the series tail and the quadrature error
  int panels;        // initial Simpson panel count
  double rho_max;    // largest admissible (t - s) / T
  int max_terms;     // cap on the number of series terms
  double defect_tol; // largest admissible closure defect for hierarchies
  uint64_t seed;     // seed for sampled quantities; recorded in every report
} se_options;

// tol 1e-8, panels 64, rho_max 0.95, max_terms 200, defect_tol +inf, seed 1.
SE_API void se_options_default(se_options* opts);

SE_API const char* se_version(void);
SE_API const char* se_status_name(se_status status);
// 0 for SE_OK, 2 for input, scale-pair, time-order and configuration errors, 1 otherwise.
SE_API int se_exit_code(se_status status);
SE_API const char* se_last_error(void);

SE_API se_status se_model_load(const char* path, se_model** out);
SE_API se_status se_model_parse(const char* text, const char* source, se_model** out);
SE_API se_model_kind se_model_get_kind(const se_model* model);
SE_API void se_model_free(se_model* model);

// Existence horizon T(alpha', alpha) with the constants K and M behind it.
SE_API se_status se_horizon(const se_model* model, double alpha, double alpha_prime, const se_options* opts,
                            se_result** out);
// Forward evolution W(t, s) of the model's initial vector from level alpha to alpha'.
SE_API se_status se_solve(const se_model* model, double alpha, double alpha_prime, double s, double t,
                          const se_options* opts, se_result** out);
// Backward evolution W(s, t) of the initial vector.
SE_API se_status se_backward(const se_model* model, double alpha, double alpha_prime, double s, double t,
                             const se_options* opts, se_result** out);
// Dual evolution W(t, s)^* of the model's functional, measured at alpha' on input and alpha on output.
SE_API se_status se_dual(const se_model* model, double alpha, double alpha_prime, double s, double t,
                         const se_options* opts, se_result** out);
// Difference of two evolutions of the initial vector of `model`, against its a-priori bound.
// Requires alpha' < alpha0 < alpha1 < alpha.
SE_API se_status se_stability(const se_model* model, const se_model* other, double alpha, double alpha1,
                              double alpha0, double alpha_prime, double s, double t, const se_options* opts,
                              se_result** out);
SE_API se_status se_truncation_study(const se_model* model, double alpha, double alpha_prime, double t,
                                     const size_t* sizes, size_t count, const se_options* opts, se_result** out);
// Evolution over [s, t] beyond a single horizon by stepping through levels up to alpha_ceiling.
// steps = 0 chooses the number of steps automatically.
SE_API se_status se_global(const se_model* model, double alpha_prime, double alpha_ceiling, int steps, double s,
                           double t, const se_options* opts, se_result** out);
// Checks the structural conditions of an ODE model on its alpha and nu grids.
SE_API se_status se_validate(const se_model* model, const se_options* opts, se_result** out);

SE_API se_status se_logistic_check_g(const se_model* model, const se_options* opts, se_result** out);
SE_API se_status se_logistic_bounds(const se_model* model, double alpha, double alpha_prime, const se_options* opts,
                                    se_result** out);
SE_API se_status se_logistic_evolve(const se_model* model, double alpha, double alpha_prime, double t,
                                    const se_options* opts, se_result** out);

// suite: "acceptance", "invariants", "fixtures" or "all"; fixtures_dir may be NULL.
SE_API se_status se_verify(const char* suite, const char* fixtures_dir, const se_options* opts, se_result** out);
// One acceptance criterion, 1 to 11.
SE_API se_status se_verify_criterion(int id, const se_options* opts, se_result** out);

SE_API const char* se_result_json(const se_result* result);
// NULL when the command has no CSV rendering.
SE_API const char* se_result_csv(const se_result* result);
// NULL when the command has no text summary.
SE_API const char* se_result_text(const se_result* result);
// 1 when every check in the result passed, 0 when one failed, -1 for results without checks.
SE_API int se_result_passed(const se_result* result);
SE_API void se_result_free(se_result* result);

#ifdef __cplusplus
}
#endif
