/* Plain C client of the shared library: compiles as C and exercises handles,
 * status codes and error details. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "maxlab/maxlab.h"

static int failures = 0;

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: CHECK(%s)\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

int main(void) {
  maxlab_context* ctx = NULL;
  maxlab_report* rep = NULL;
  double d = 0.0, H = 0.0;
  const double p[3] = {0.0, 0.0, 0.0};
  const double q[3] = {0.3, 0.4, 1.3};
  const double x[2] = {0.0, 0.0};
  const double grad[2] = {0.0, 0.0};
  const double hess[4] = {1.0, 0.0, 0.0, 1.0};

  CHECK(strcmp(maxlab_version(), "1.0.0") == 0);
  CHECK(maxlab_context_create(&ctx) == MAXLAB_OK);

  CHECK(maxlab_run(ctx, "constants", "{\"r0\": \"1/3\"}", &rep) == MAXLAB_OK);
  CHECK(strcmp(maxlab_report_verdict(rep), "pass") == 0);
  CHECK(strstr(maxlab_report_json(rep), "\"alpha_bar\": 73") != NULL);
  CHECK(maxlab_report_exit_code(rep) == 0);
  maxlab_report_destroy(rep);

  rep = NULL;
  CHECK(maxlab_run(ctx, "constants", "{\"bogus\": 1}", &rep) == MAXLAB_CONFIG);
  CHECK(rep == NULL);
  CHECK(strstr(maxlab_context_last_error_detail(ctx), "bogus") != NULL);
  CHECK(maxlab_run(ctx, "constants", "{not json", &rep) == MAXLAB_CONFIG);
  CHECK(maxlab_run(NULL, "constants", "{}", &rep) == MAXLAB_INVALID_ARGUMENT);

  CHECK(maxlab_lorentz_distance(ctx, "minkowski n=3", p, q, 3, &d) == MAXLAB_OK);
  CHECK(fabs(d - sqrt(1.69 - 0.25)) < 1e-15);
  CHECK(maxlab_lorentz_distance(ctx, "minkowski n=3", p, q, 2, &d) == MAXLAB_INVALID_ARGUMENT);
  CHECK(maxlab_lorentz_distance(ctx, "no-such-model", p, q, 3, &d) == MAXLAB_CONFIG);
  CHECK(strlen(maxlab_context_last_error(ctx)) > 0);

  /* Hyperboloid at its vertex: f = 1, Df = 0, D^2 f = I. */
  CHECK(maxlab_graph_mean_curvature(ctx, "minkowski n=3", x, 1.0, grad, hess, 2, &H) == MAXLAB_OK);
  CHECK(fabs(H - 1.0) < 1e-15);

  CHECK(maxlab_context_set_seed(ctx, 5) == MAXLAB_OK);
  CHECK(maxlab_run(ctx, "busemann", "{\"x\": [-0.5, 0.5, 2], \"t\": [0, 0.5, 2], \"seed\": 9}", &rep) == MAXLAB_OK);
  CHECK(strstr(maxlab_report_json(rep), "\"seed\": 5") != NULL);
  CHECK(strlen(maxlab_report_table_csv(rep)) > 0);
  maxlab_report_destroy(rep);

  CHECK(strcmp(maxlab_status_name(MAXLAB_DOMAIN), "domain") == 0);
  maxlab_context_destroy(ctx);
  if (failures == 0) printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
