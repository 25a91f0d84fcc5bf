#include <gtest/gtest.h>

#include "maxlab/error.hpp"
#include "maxlab/runner.hpp"

namespace maxlab {
namespace {

using json = nlohmann::json;

TEST(Runner, ListsSubcommands) {
  const auto subs = subcommands();
  EXPECT_EQ(subs.size(), 9u);
  EXPECT_NE(std::find(subs.begin(), subs.end(), "weyl"), subs.end());
}

TEST(Runner, ConstantsReport) {
  const RunResult r = run_scenario("constants", json::object());
  EXPECT_EQ(r.report["verdict"], "pass");
  EXPECT_EQ(r.report["ledger"]["C_H"], 8.0);
  EXPECT_EQ(r.report["ledger"]["alpha_bar"], 73.0);
  EXPECT_EQ(r.exit_code, 0);
}

TEST(Runner, UnknownFieldIsConfigError) {
  try {
    run_scenario("constants", {{"rO", "1/3"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    EXPECT_EQ(e.witness()["field"], "rO");
  }
}

TEST(Runner, BadChartIsConfigError) {
  try {
    run_scenario("graph-geometry", {{"chart", "torus"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    EXPECT_EQ(e.witness()["field"], "chart");
  }
}

TEST(Runner, UnknownSubcommand) { EXPECT_THROW(run_scenario("prove-everything", json::object()), Error); }

TEST(Runner, SeededRunsAreDeterministic) {
  const json req = {{"seed", 42}, {"samples", 300}, {"pairs", 40}, {"rho", 0.9}};
  const RunResult a = run_scenario("verify-operator", req);
  const RunResult b = run_scenario("verify-operator", req);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.report["seed"], 42);
  const RunResult c = run_scenario("verify-operator", {{"seed", 43}, {"samples", 300}, {"pairs", 40}, {"rho", 0.9}});
  EXPECT_NE(a.report["checks"].dump(), c.report["checks"].dump());
}

TEST(Runner, ContradictionExitCodes) {
  EXPECT_EQ(run_scenario("max-principle", {{"instance", "identical-hyperboloid"}, {"nodes", 21}}).exit_code, 0);
  const RunResult fab = run_scenario("max-principle", {{"instance", "fabricated-strict-gap"}});
  EXPECT_EQ(fab.report["verdict"], "INCONSISTENT-HYPOTHESES");
  EXPECT_EQ(fab.exit_code, 0);
}

TEST(Runner, BusemannTable) {
  const RunResult r = run_scenario("busemann", {{"x", {-0.5, 0.5, 3}}, {"t", {-0.5, 0.5, 3}}});
  EXPECT_EQ(r.report["verdict"], "pass");
  EXPECT_EQ(std::count(r.table_csv.begin(), r.table_csv.end(), '\n'), 10);
  EXPECT_EQ(r.table_csv.rfind("x1,t,b_plus", 0), 0u) << r.table_csv.substr(0, 40);
}

}  // namespace
}  // namespace maxlab
