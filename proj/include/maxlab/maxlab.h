#ifndef MAXLAB_MAXLAB_H
#define MAXLAB_MAXLAB_H

/* C interface of the maxlab library.  Every call returns a status code; on
 * failure the context keeps a message and, for configuration errors, a JSON
 * detail naming the offending field.  Strings returned by the library stay
 * valid until the owning handle is destroyed or reused. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MAXLAB_API __declspec(dllexport)
#else
#define MAXLAB_API __attribute__((visibility("default")))
#endif

typedef enum maxlab_status {
  MAXLAB_OK = 0,
  MAXLAB_INVALID_ARGUMENT = 1,
  MAXLAB_CONFIG = 2,
  MAXLAB_DOMAIN = 3,
  MAXLAB_ADMISSIBILITY = 4,
  MAXLAB_NUMERICAL = 5,
  MAXLAB_IO = 6,
  MAXLAB_INTERNAL = 99
} maxlab_status;

typedef struct maxlab_context maxlab_context;
typedef struct maxlab_report maxlab_report;

MAXLAB_API const char* maxlab_version(void);
MAXLAB_API const char* maxlab_status_name(maxlab_status status);

MAXLAB_API maxlab_status maxlab_context_create(maxlab_context** out);
MAXLAB_API void maxlab_context_destroy(maxlab_context* ctx);
/* Overrides any "seed" in later requests. */
MAXLAB_API maxlab_status maxlab_context_set_seed(maxlab_context* ctx, uint64_t seed);
MAXLAB_API maxlab_status maxlab_context_clear_seed(maxlab_context* ctx);
MAXLAB_API const char* maxlab_context_last_error(const maxlab_context* ctx);
/* JSON object with witness data of the last error, "{}" when none. */
MAXLAB_API const char* maxlab_context_last_error_detail(const maxlab_context* ctx);

/* Runs a subcommand (constants, verify-operator, max-principle,
 * graph-geometry, busemann, spheres, splitting, curvature, weyl) on a JSON
 * request object.  On MAXLAB_OK *out owns the report. */
MAXLAB_API maxlab_status maxlab_run(maxlab_context* ctx, const char* subcommand, const char* request_json,
                                    maxlab_report** out);

MAXLAB_API void maxlab_report_destroy(maxlab_report* report);
/* Pretty-printed JSON report (indent 2, trailing newline). */
MAXLAB_API const char* maxlab_report_json(const maxlab_report* report);
MAXLAB_API const char* maxlab_report_verdict(const maxlab_report* report);
/* Per-point CSV table, "" for subcommands without one. */
MAXLAB_API const char* maxlab_report_table_csv(const maxlab_report* report);
/* 1 when the report holds a conclusion failure, else 0. */
MAXLAB_API int maxlab_report_exit_code(const maxlab_report* report);

/* Lorentzian distance d(p, q) in a model ("minkowski n=3", "strip",
 * "ads-strip dim=2"); p and q have n coordinates, time last. */
MAXLAB_API maxlab_status maxlab_lorentz_distance(maxlab_context* ctx, const char* model, const double* p,
                                                 const double* q, size_t n, double* out);

/* Mean curvature of the graph t = f(x) at x with f = r, Df = grad and
 * D^2 f = hess (row-major m x m) in a chart with n = m + 1. */
MAXLAB_API maxlab_status maxlab_graph_mean_curvature(maxlab_context* ctx, const char* chart, const double* x,
                                                     double r, const double* grad, const double* hess, size_t m,
                                                     double* out);

#ifdef __cplusplus
}
#endif

#endif
