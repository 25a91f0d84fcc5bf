#include <cmath>
#include <limits>

#include "maxlab/error.hpp"
#include "maxlab/principle.hpp"

namespace maxlab {

nlohmann::json ContactResult::to_json() const {
  nlohmann::json j = {{"verdict", std::string(maxlab::to_string(verdict))},
                      {"message", message},
                      {"contact_count", contact.size()}};
  if (found()) {
    j["x0"] = maxlab::to_json(x0);
    j["x1"] = maxlab::to_json(x1);
    j["x0_index"] = x0_index;
    j["x1_index"] = x1_index;
    j["r0"] = r0;
  }
  return j;
}

ContactResult contact_locator(const GridFunction& u0, const GridFunction& u1, double tol_scale) {
  if (!u0.same_layout(u1)) throw Error(ErrorKind::Dimension, "u0 and u1 are not on the same grid");
  ContactResult out;
  const std::size_t N = u0.size();

  // Ordering u1 <= u0, reported at the worst node.
  double worst = 0.0;
  std::size_t worst_at = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const double excess = u1[k] - u0[k] - tol_scale * (1.0 + std::abs(u0[k]));
    if (excess > worst) {
      worst = excess;
      worst_at = k;
    }
    if (u0[k] - u1[k] <= tol_scale * (1.0 + std::abs(u0[k]))) out.contact.push_back(k);
  }
  if (worst > 0.0) {
    out.verdict = Verdict::HypothesisFailure;
    out.message = "u1 <= u0 violated at node " + std::to_string(worst_at);
    return out;
  }
  if (out.contact.empty()) {
    out.verdict = Verdict::HypothesisFailure;
    out.message = "no contact: u1 < u0 at every node";
    return out;
  }
  if (out.contact.size() == N) {
    out.verdict = Verdict::Identical;
    out.message = "u0 and u1 agree at every node";
    return out;
  }

  const Vec lo = u0.lower(), hi = u0.upper();
  std::vector<bool> in_contact(N, false);
  for (std::size_t k : out.contact) in_contact[k] = true;

  double best_r0 = -1.0;
  for (std::size_t c = 0; c < N; ++c) {
    if (in_contact[c]) continue;
    const Vec xc = u0.node(c);
    double d_min = std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    int ties = 0;
    for (std::size_t k : out.contact) {
      const double d = (u0.node(k) - xc).norm();
      if (d < d_min * (1.0 - 1e-12)) {
        d_min = d;
        nearest = k;
        ties = 1;
      } else if (d <= d_min * (1.0 + 1e-12)) {
        ++ties;
      }
    }
    if (ties != 1) continue;
    const double r0 = 0.5 * d_min;
    if (3.0 * r0 > 1.0 + 1e-12 || r0 <= best_r0) continue;
    bool inside = true;
    for (int a = 0; a < xc.size() && inside; ++a) {
      inside = xc(a) - 3.0 * r0 >= lo(a) - 1e-12 && xc(a) + 3.0 * r0 <= hi(a) + 1e-12;
    }
    if (!inside) continue;
    best_r0 = r0;
    out.x0_index = c;
    out.x1_index = nearest;
  }
  if (best_r0 < 0.0) {
    out.verdict = Verdict::HypothesisFailure;
    out.message = "no ball B(x0, 2 r0) touching the contact set at a single node fits the grid";
    return out;
  }
  out.r0 = best_r0;
  out.x0 = u0.node(out.x0_index);
  out.x1 = u0.node(out.x1_index);
  out.message = "contact ball located";
  return out;
}

SupportParaboloid support_paraboloid(const GridFunction& v, std::size_t node, double C, std::optional<Vec> slope,
                                     double tol) {
  if (node >= v.size()) throw Error(ErrorKind::InvalidArgument, "support node out of range", {{"node", node}});
  if (!(C >= 0.0)) throw Error(ErrorKind::InvalidArgument, "C must be nonnegative", {{"C", C}});
  SupportParaboloid out;
  out.a = slope ? *slope : v.gradient(node);
  if (out.a.size() != v.dims()) throw Error(ErrorKind::Dimension, "slope has wrong dimension");

  Report& rep = out.report;
  rep.check = "support-paraboloid";
  rep.params = {{"node", node}, {"C", C}, {"tol", tol}, {"slope_supplied", slope.has_value()}};
  const Vec x0 = v.node(node);
  const double v0 = v[node];
  double scale = 1.0;
  for (double val : v.values()) scale = std::max(scale, std::abs(val));

  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_at = node;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec d = v.node(k) - x0;
    const double slack = v[k] - (v0 + d.dot(out.a) - 0.5 * C * d.squaredNorm());
    if (slack < worst) {
      worst = slack;
      worst_at = k;
    }
  }
  rep.residual = {{"min_slack", worst}};
  rep.witness = {{"a", to_json(out.a)}, {"worst_node", worst_at}, {"worst_x", to_json(v.node(worst_at))}};
  if (worst < -tol * scale) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "v drops below the support paraboloid";
  }
  return out;
}

}  // namespace maxlab
