#include <gtest/gtest.h>

#include <sstream>

#include "maxlab/error.hpp"
#include "maxlab/grid.hpp"

namespace maxlab {
namespace {

GridFunction quadratic() {
  Vec o(2), h(2);
  o << -1.0, -0.5;
  h << 0.1, 0.05;
  return GridFunction::sample({21, 21}, o, h, [](const Vec& x) {
    return 1.0 + 2.0 * x(0) - x(1) + 0.5 * x(0) * x(0) + 0.3 * x(0) * x(1) - 1.5 * x(1) * x(1);
  });
}

TEST(Grid, CsvRoundTrip) {
  const GridFunction g = quadratic();
  std::stringstream ss;
  g.write_csv(ss);
  const GridFunction r = GridFunction::read_csv(ss);
  ASSERT_TRUE(r.same_layout(g));
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(r[k], g[k]);
}

TEST(Grid, IndexFlatRoundTrip) {
  const GridFunction g = quadratic();
  for (std::size_t k = 0; k < g.size(); k += 37) EXPECT_EQ(g.flat(g.index(k)), k);
  EXPECT_EQ(g.index(1), (std::vector<int>{0, 1}));  // last index fastest
}

TEST(Grid, StencilsExactOnQuadratics) {
  const GridFunction g = quadratic();
  const std::size_t k = g.flat({7, 12});
  const Vec x = g.node(k);
  const Vec d = g.gradient(k);
  EXPECT_NEAR(d(0), 2.0 + x(0) + 0.3 * x(1), 1e-12);
  EXPECT_NEAR(d(1), -1.0 + 0.3 * x(0) - 3.0 * x(1), 1e-12);
  const SymMatrix h = g.hessian(k);
  EXPECT_NEAR(h(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(h(0, 1), 0.3, 1e-10);
  EXPECT_NEAR(h(1, 1), -3.0, 1e-10);
}

TEST(Grid, InterpolationReproducesNodesAndClamps) {
  const GridFunction g = quadratic();
  const std::size_t k = g.flat({3, 4});
  EXPECT_NEAR(g.interpolate(g.node(k)), g[k], 1e-14);
  Vec far(2);
  far << 100.0, 100.0;
  EXPECT_DOUBLE_EQ(g.interpolate(far), g[g.size() - 1]);
}

TEST(Grid, MalformedCsvRejected) {
  std::stringstream ss("# maxlab-grid v1\n# dims: 1\n# shape: 3\n# origin: 0\n# spacing: 1\n1\n2\n");
  EXPECT_THROW(GridFunction::read_csv(ss), Error);
  std::stringstream bad("not a grid\n");
  EXPECT_THROW(GridFunction::read_csv(bad), Error);
}

}  // namespace
}  // namespace maxlab
