/* C interface to the structured-LQR design library: opaque handles, integer
 * status codes, thread-local error messages. All matrix buffers are row-major
 * double arrays. */
#ifndef LQRLR_H
#define LQRLR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LQRLR_API __declspec(dllexport)
#else
#define LQRLR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lqrlr_status {
  LQRLR_OK = 0,
  LQRLR_ERR_ARG = 1,        /* invalid argument / configuration */
  LQRLR_ERR_PARSE = 2,      /* file or schema violation */
  LQRLR_ERR_SOLVER = 3,     /* numerical failure, stall, non-convergence */
  LQRLR_ERR_INFEASIBLE = 4, /* no stabilizing design */
  LQRLR_ERR_IO = 5,         /* filesystem failure */
  LQRLR_ERR_INTERNAL = 6
} lqrlr_status;

typedef enum lqrlr_variant {
  LQRLR_VARIANT_STANDARD = 0,
  LQRLR_VARIANT_SPARSE = 1,
  LQRLR_VARIANT_LOWRANK_SOFT = 2,
  LQRLR_VARIANT_LOWRANK_HARD = 3
} lqrlr_variant;

typedef enum lqrlr_termination {
  LQRLR_TERM_CONVERGED = 0,
  LQRLR_TERM_MAX_ITER = 1,
  LQRLR_TERM_INFEASIBLE = 2
} lqrlr_termination;

typedef enum lqrlr_gain_kind {
  LQRLR_GAIN_K = 0,
  LQRLR_GAIN_K_DIAG = 1,
  LQRLR_GAIN_K_LOW = 2,
  LQRLR_GAIN_DUAL = 3
} lqrlr_gain_kind;

typedef struct lqrlr_model_s lqrlr_model;
typedef struct lqrlr_design_s lqrlr_design;
typedef struct lqrlr_report_s lqrlr_report;

LQRLR_API const char* lqrlr_version(void);
/* Message of the last failing call on this thread (empty string if none). */
LQRLR_API const char* lqrlr_last_error(void);
/* Short machine-parsable tag of the last failure, e.g. "E_PARSE". */
LQRLR_API const char* lqrlr_last_error_tag(void);

/* ---- models ---- */

LQRLR_API lqrlr_status lqrlr_model_load(const char* path, lqrlr_model** out);
/* Coupled multi-agent plant on an extent x extent plane, seeded layout. */
LQRLR_API lqrlr_status lqrlr_model_generate(int n_agents, double extent, uint64_t seed,
                                            int coupling_sign, lqrlr_model** out);
LQRLR_API lqrlr_status lqrlr_model_save(const lqrlr_model* model, const char* path);
LQRLR_API void lqrlr_model_free(lqrlr_model* model);

LQRLR_API int lqrlr_model_states(const lqrlr_model* model);
LQRLR_API int lqrlr_model_inputs(const lqrlr_model* model);
LQRLR_API int lqrlr_model_disturbances(const lqrlr_model* model);
LQRLR_API int lqrlr_model_agents(const lqrlr_model* model);

/* ---- gain design ---- */

typedef struct lqrlr_design_options {
  int variant; /* lqrlr_variant */
  double rho;
  double gamma;
  int rank; /* 0 = unset */
  double eps_pri;
  double eps_dual;
  int max_outer;
  int max_inner;
  double inner_tol;
} lqrlr_design_options;

LQRLR_API void lqrlr_design_options_defaults(lqrlr_design_options* opts);

LQRLR_API lqrlr_status lqrlr_design_run(const lqrlr_model* model,
                                        const lqrlr_design_options* opts, lqrlr_design** out);

LQRLR_API int lqrlr_design_termination(const lqrlr_design* design); /* lqrlr_termination */
LQRLR_API int lqrlr_design_iterations(const lqrlr_design* design);
LQRLR_API double lqrlr_design_cost(const lqrlr_design* design);
LQRLR_API double lqrlr_design_cost_standard(const lqrlr_design* design);
/* Copies the m x n gain row-major into buf (buf_len >= m * n). */
LQRLR_API lqrlr_status lqrlr_design_gain(const lqrlr_design* design, int kind, double* buf,
                                         size_t buf_len);
/* Residual history; *count receives the iteration count, at most `cap`
 * entries are copied into each buffer (either may be NULL). */
LQRLR_API lqrlr_status lqrlr_design_residuals(const lqrlr_design* design, double* primal,
                                              double* dual, size_t cap, size_t* count);
/* Full result document (gains, residuals, optimality diagnostics) as JSON. */
LQRLR_API lqrlr_status lqrlr_design_save(const lqrlr_design* design, const lqrlr_model* model,
                                         const char* path);
LQRLR_API void lqrlr_design_free(lqrlr_design* design);

/* ---- scenario sweeps ---- */

typedef struct lqrlr_scenario_options {
  int scenario_id; /* 1..4 */
  const int* agent_counts;
  size_t agent_counts_len;
  int trials_outer;
  int trials_inner;
  uint64_t seed;
  const double* noise_variances; /* scenario 2; NULL = library default */
  size_t noise_variances_len;
  const int* attack_counts; /* scenario 3; NULL = library default */
  size_t attack_counts_len;
  const int* ranks; /* scenario 4; NULL = library default */
  size_t ranks_len;
  int lowrank_rank;   /* broadcast design rank, scenarios 1-3 */
  int coupling_sign;  /* +1 or -1 */
  double extent;
  double link_tol_rel;
  double stability_margin;
  int noise_nonzero_only;
  int threads; /* 0 = hardware concurrency */
  int verbose; /* one stderr line per sweep point */
  double rho;
  double eps_pri;
  double eps_dual;
  int max_outer;
  int max_inner;
  double inner_tol;
} lqrlr_scenario_options;

LQRLR_API void lqrlr_scenario_options_defaults(lqrlr_scenario_options* opts, int scenario_id);

LQRLR_API lqrlr_status lqrlr_scenario_run(const lqrlr_scenario_options* opts,
                                          lqrlr_report** out);

LQRLR_API int lqrlr_report_row_count(const lqrlr_report* report);
LQRLR_API lqrlr_status lqrlr_report_write_csv(const lqrlr_report* report, const char* path);
LQRLR_API lqrlr_status lqrlr_report_write_json(const lqrlr_report* report, const char* path);
LQRLR_API lqrlr_status lqrlr_report_write_svg(const lqrlr_report* report, const char* path);
LQRLR_API void lqrlr_report_free(lqrlr_report* report);

#ifdef __cplusplus
}
#endif

#endif /* LQRLR_H */
