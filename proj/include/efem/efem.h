/*
 * efem: enriched finite elements for two-material electrostatics.
 *
 * Plain C interface. Objects are opaque and owned by the caller once created;
 * release them with the matching *_free function. Every call that can fail
 * returns an efem_status and leaves a message retrievable with
 * efem_last_error() on the calling thread.
 */
#ifndef EFEM_EFEM_H
#define EFEM_EFEM_H

#include <stddef.h>

#if defined(_WIN32)
#define EFEM_API __declspec(dllexport)
#else
#define EFEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum efem_status {
  EFEM_OK = 0,
  EFEM_ERR_INVALID_ARGUMENT = 1,
  EFEM_ERR_PARSE = 2,
  EFEM_ERR_CONFIG = 3,
  EFEM_ERR_ORIENTATION = 4,
  EFEM_ERR_INCOMPATIBLE = 5,
  EFEM_ERR_SINGULAR = 6,
  EFEM_ERR_NOT_CONVERGED = 7,
  EFEM_ERR_IO = 8,
  EFEM_ERR_OUTSIDE_DOMAIN = 9,
  EFEM_ERR_INTERNAL = 10
} efem_status;

typedef struct efem_case efem_case;
typedef struct efem_result efem_result;

typedef struct efem_solve_info {
  size_t unknowns;
  size_t elements;
  size_t cut_elements;
  size_t enriched_elements;
  int iterations;
  double residual;
  int converged;
  double wall_seconds;
} efem_solve_info;

EFEM_API const char* efem_version(void);

/* Message of the last failed call on this thread ("" if none). */
EFEM_API const char* efem_last_error(void);

/* Log threshold: trace, debug, info, warn, error, off. Default warn. */
EFEM_API efem_status efem_set_log_level(const char* level);

/* Process exit code used by the command-line tool for a status. */
EFEM_API int efem_exit_code(efem_status status);

EFEM_API efem_status efem_case_load(const char* path, efem_case** out);
/* base_dir resolves relative mesh paths; may be NULL. */
EFEM_API efem_status efem_case_parse(const char* text, const char* base_dir, efem_case** out);
EFEM_API void efem_case_free(efem_case* c);

/*
 * Override a setting. Keys: "mode" (standard | efem-nod | efem), "h", "tol",
 * "max_iter", "threads", "direct" (true | false).
 */
EFEM_API efem_status efem_case_set_option(efem_case* c, const char* key, const char* value);

/* Solve and evaluate the configured analysis lines without writing files. */
EFEM_API efem_status efem_solve(const efem_case* c, efem_result** out);

/*
 * Solve and write summary.json, timing.json, line CSVs and VTK into out_dir.
 * On EFEM_ERR_NOT_CONVERGED the result is still returned in *out.
 */
EFEM_API efem_status efem_run(const efem_case* c, const char* out_dir, efem_result** out);

EFEM_API efem_status efem_result_info(const efem_result* r, efem_solve_info* info);

/* Summary JSON text; release with efem_string_free. */
EFEM_API efem_status efem_result_summary_json(const efem_result* r, char** json);

/*
 * Potential and field (gradient of the potential) at x[3]. side selects the
 * material side for points on the interface (+1 or -1). E may be NULL.
 */
EFEM_API efem_status efem_result_eval(const efem_result* r, const double x[3], int side, double* phi, double E[3]);

/* Nodal potentials; copies min(capacity, unknowns) values, returns the count in *written. */
EFEM_API efem_status efem_result_nodal(const efem_result* r, double* values, size_t capacity, size_t* written);

EFEM_API void efem_result_free(efem_result* r);

/*
 * Error-versus-h sweep. modes is a space separated list; NULL uses the case
 * defaults, as does h_list == NULL. Outputs are released with efem_string_free;
 * either pointer may be NULL.
 */
EFEM_API efem_status efem_converge(const efem_case* c, const double* h_list, size_t n_h, const char* modes,
                                   char** json, char** table);

EFEM_API void efem_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* EFEM_EFEM_H */
