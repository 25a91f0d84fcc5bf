#include "maxlab/maxlab.h"

#include <optional>
#include <string>

#include "maxlab/error.hpp"
#include "maxlab/lorgraph.hpp"
#include "maxlab/modelspace.hpp"
#include "maxlab/runner.hpp"

struct maxlab_context {
  std::optional<std::uint64_t> seed;
  std::string error;
  std::string detail = "{}";
};

struct maxlab_report {
  std::string json;
  std::string verdict;
  std::string table;
  int exit_code = 0;
};

namespace {

maxlab_status status_of(maxlab::ErrorKind k) {
  using maxlab::ErrorKind;
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Dimension: return MAXLAB_INVALID_ARGUMENT;
    case ErrorKind::Config: return MAXLAB_CONFIG;
    case ErrorKind::Domain:
    case ErrorKind::NotSpacelike: return MAXLAB_DOMAIN;
    case ErrorKind::Admissibility: return MAXLAB_ADMISSIBILITY;
    case ErrorKind::Numerical: return MAXLAB_NUMERICAL;
    case ErrorKind::Io: return MAXLAB_IO;
  }
  return MAXLAB_INTERNAL;
}

// Runs f, translating exceptions into status codes recorded on ctx.
template <class F>
maxlab_status guarded(maxlab_context* ctx, F&& f) {
  if (!ctx) return MAXLAB_INVALID_ARGUMENT;
  ctx->error.clear();
  ctx->detail = "{}";
  try {
    f();
    return MAXLAB_OK;
  } catch (const maxlab::Error& e) {
    ctx->error = e.what();
    ctx->detail = e.witness().is_null() ? "{}" : e.witness().dump();
    return status_of(e.kind());
  } catch (const nlohmann::json::parse_error& e) {
    ctx->error = std::string("request is not valid JSON: ") + e.what();
    ctx->detail = nlohmann::json{{"byte", e.byte}}.dump();
    return MAXLAB_CONFIG;
  } catch (const std::exception& e) {
    ctx->error = e.what();
    return MAXLAB_INTERNAL;
  } catch (...) {
    ctx->error = "unknown exception";
    return MAXLAB_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw maxlab::Error(maxlab::ErrorKind::InvalidArgument, what);
}

}  // namespace

extern "C" {

const char* maxlab_version(void) { return "1.0.0"; }

const char* maxlab_status_name(maxlab_status s) {
  switch (s) {
    case MAXLAB_OK: return "ok";
    case MAXLAB_INVALID_ARGUMENT: return "invalid-argument";
    case MAXLAB_CONFIG: return "config";
    case MAXLAB_DOMAIN: return "domain";
    case MAXLAB_ADMISSIBILITY: return "admissibility";
    case MAXLAB_NUMERICAL: return "numerical";
    case MAXLAB_IO: return "io";
    case MAXLAB_INTERNAL: return "internal";
  }
  return "unknown";
}

maxlab_status maxlab_context_create(maxlab_context** out) {
  if (!out) return MAXLAB_INVALID_ARGUMENT;
  *out = new (std::nothrow) maxlab_context();
  return *out ? MAXLAB_OK : MAXLAB_INTERNAL;
}

void maxlab_context_destroy(maxlab_context* ctx) { delete ctx; }

maxlab_status maxlab_context_set_seed(maxlab_context* ctx, uint64_t seed) {
  if (!ctx) return MAXLAB_INVALID_ARGUMENT;
  ctx->seed = seed;
  return MAXLAB_OK;
}

maxlab_status maxlab_context_clear_seed(maxlab_context* ctx) {
  if (!ctx) return MAXLAB_INVALID_ARGUMENT;
  ctx->seed.reset();
  return MAXLAB_OK;
}

const char* maxlab_context_last_error(const maxlab_context* ctx) { return ctx ? ctx->error.c_str() : ""; }

const char* maxlab_context_last_error_detail(const maxlab_context* ctx) { return ctx ? ctx->detail.c_str() : "{}"; }

maxlab_status maxlab_run(maxlab_context* ctx, const char* subcommand, const char* request_json, maxlab_report** out) {
  return guarded(ctx, [&] {
    require(subcommand && out, "subcommand and out must be non-null");
    *out = nullptr;
    nlohmann::json req = request_json && *request_json ? nlohmann::json::parse(request_json) : nlohmann::json::object();
    if (!req.is_object()) throw maxlab::Error(maxlab::ErrorKind::Config, "request must be a JSON object");
    if (ctx->seed) req["seed"] = *ctx->seed;
    maxlab::RunResult r = maxlab::run_scenario(subcommand, req);
    auto* rep = new maxlab_report();
    rep->json = r.report.dump(2) + "\n";
    rep->verdict = r.report.at("verdict").get<std::string>();
    rep->table = std::move(r.table_csv);
    rep->exit_code = r.exit_code;
    *out = rep;
  });
}

void maxlab_report_destroy(maxlab_report* report) { delete report; }
const char* maxlab_report_json(const maxlab_report* r) { return r ? r->json.c_str() : ""; }
const char* maxlab_report_verdict(const maxlab_report* r) { return r ? r->verdict.c_str() : ""; }
const char* maxlab_report_table_csv(const maxlab_report* r) { return r ? r->table.c_str() : ""; }
int maxlab_report_exit_code(const maxlab_report* r) { return r ? r->exit_code : 0; }

maxlab_status maxlab_lorentz_distance(maxlab_context* ctx, const char* model, const double* p, const double* q,
                                      size_t n, double* out) {
  return guarded(ctx, [&] {
    require(model && p && q && out, "null argument");
    const maxlab::ModelSpacetime m = maxlab::ModelSpacetime::parse(model);
    if (static_cast<int>(n) != m.n()) throw maxlab::Error(maxlab::ErrorKind::Dimension, "point dimension does not match the model");
    const maxlab::Vec P = Eigen::Map<const maxlab::Vec>(p, static_cast<Eigen::Index>(n));
    const maxlab::Vec Q = Eigen::Map<const maxlab::Vec>(q, static_cast<Eigen::Index>(n));
    *out = maxlab::lorentz_distance(m, P, Q);
  });
}

maxlab_status maxlab_graph_mean_curvature(maxlab_context* ctx, const char* chart, const double* x, double r,
                                          const double* grad, const double* hess, size_t m, double* out) {
  return guarded(ctx, [&] {
    require(chart && x && grad && hess && out, "null argument");
    const maxlab::MetricChart c = maxlab::MetricChart::parse(chart);
    if (static_cast<int>(m) + 1 != c.n()) throw maxlab::Error(maxlab::ErrorKind::Dimension, "graph dimension must be n - 1");
    const auto k = static_cast<Eigen::Index>(m);
    maxlab::Jet2 jet{Eigen::Map<const maxlab::Vec>(x, k), r, Eigen::Map<const maxlab::Vec>(grad, k),
                     maxlab::SymMatrix::from(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                                            Eigen::RowMajor>>(hess, k, k))};
    *out = maxlab::graph_geometry(c, jet).H;
  });
}

}  // extern "C"
