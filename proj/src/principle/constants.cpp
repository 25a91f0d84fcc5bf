#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "maxlab/error.hpp"
#include "maxlab/principle.hpp"

namespace maxlab {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

// Largest alpha for which r0^(alpha+2) is expanded exactly.
constexpr long kMaxExactPower = 5000;

Rational parse_rational(const std::string& text, const char* what) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " is not a decimal or p/q number: '" + text + "'");
  };
  if (text.empty()) return fail();
  try {
    if (const auto slash = text.find('/'); slash != std::string::npos) {
      const Integer num(text.substr(0, slash));
      const Integer den(text.substr(slash + 1));
      if (den == 0) return fail();
      return Rational(num, den);
    }
    std::string s = text;
    bool negative = false;
    if (s[0] == '-' || s[0] == '+') {
      negative = s[0] == '-';
      s = s.substr(1);
    }
    std::string digits = s;
    Integer den = 1;
    if (const auto dot = s.find('.'); dot != std::string::npos) {
      const std::string frac = s.substr(dot + 1);
      digits = s.substr(0, dot) + frac;
      for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return fail();
    Rational r(Integer(digits), den);
    return negative ? Rational(-r) : r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    return fail();
  }
}

std::string str(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

void check_domain(int m, double C_E, double C_S, double r0) {
  nlohmann::json p = {{"m", m}, {"C_E", C_E}, {"C_S", C_S}, {"r0", r0}};
  if (m < 1) throw Error(ErrorKind::Domain, "m must be >= 1", p);
  if (!(C_E >= 1.0)) throw Error(ErrorKind::Domain, "C_E must be >= 1", p);
  if (!(C_S >= 0.0)) throw Error(ErrorKind::Domain, "C_S must be >= 0", p);
  if (!(r0 > 0.0 && 3.0 * r0 <= 1.0 + 1e-12)) throw Error(ErrorKind::Domain, "r0 must satisfy 0 < 3 r0 <= 1", p);
}

}  // namespace

double ComparisonFunction::log_value(const Vec& x) const { return -alpha * std::log(x.norm()); }

double ComparisonFunction::log_scale(const Vec& x) const {
  return std::log(alpha) - (alpha + 2.0) * std::log(x.norm());
}

SymMatrix ComparisonFunction::unit_hessian(const Vec& x) const {
  const int n = static_cast<int>(x.size());
  return SymMatrix::outer(x) * ((alpha + 2.0) / x.squaredNorm()) - SymMatrix::identity(n);
}

Jet2 ComparisonFunction::jet(const Vec& x) const {
  const double nx = x.norm();
  if (!(nx > 0.0)) throw Error(ErrorKind::Domain, "comparison function is singular at x = 0");
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const double s = std::exp(log_scale(x));
  return Jet2{x, std::pow(nx, -alpha), unit_gradient(x) * s, unit_hessian(x) * s};
}

Jet2 comparison_jet(double alpha, const Vec& x) { return ComparisonFunction{alpha}.jet(x); }

double log_delta_bar(double alpha, double r0) { return (alpha + 2.0) * std::log(r0) - std::log(alpha); }
double delta_bar(double alpha, double r0) { return std::exp(log_delta_bar(alpha, r0)); }

nlohmann::json ExactLedger::to_json() const {
  nlohmann::json j = {{"C_H", C_H}, {"alpha_bar", alpha_bar}, {"alpha", alpha}};
  j["delta_bar"] = delta_bar ? nlohmann::json(*delta_bar) : nlohmann::json(nullptr);
  j["r1"] = r1 ? nlohmann::json(*r1) : nlohmann::json(nullptr);
  return j;
}

ExactLedger derive_constants_exact(int m, const std::string& C_E_text, const std::string& C_S_text,
                                   const std::string& r0_text, const std::optional<std::string>& alpha_text) {
  const Rational C_E = parse_rational(C_E_text, "C_E");
  const Rational C_S = parse_rational(C_S_text, "C_S");
  const Rational r0 = parse_rational(r0_text, "r0");
  check_domain(m, C_E.convert_to<double>(), C_S.convert_to<double>(), r0.convert_to<double>());
  if (3 * r0 > 1) throw Error(ErrorKind::Domain, "r0 must satisfy 3 r0 <= 1", {{"r0", r0_text}});

  const Rational C_H = 2 * (C_E * C_E * ((m - 1) * (C_S + 1) + 2) + 1);
  const Rational alpha = -2 + C_E * (1 + m * C_E + Rational(m) * m * m * C_E * (C_H + 1));

  ExactLedger out;
  out.C_H = str(C_H);
  out.alpha_bar = str(alpha);
  const Rational used = alpha_text ? parse_rational(*alpha_text, "alpha") : alpha;
  if (used <= 0) throw Error(ErrorKind::Domain, "alpha must be positive", {{"alpha", *alpha_text}});
  out.alpha = str(used);
  if (denominator(used) == 1 && used <= kMaxExactPower) {
    const long a = numerator(used).convert_to<long>();
    Rational pw = 1;
    for (long k = 0; k < a + 2; ++k) pw *= r0;
    out.delta_bar = str(pw / used);
    const Rational k = 4 * Rational(m) * m * C_E * (C_H + 1);
    const Rational cand = pw / (k * used);
    out.r1 = str(cand < r0 ? cand : r0);
  }
  return out;
}

double ConstantLedger::log_gradient_scale() const { return std::log(alpha) - (alpha + 2.0) * std::log(r0); }

double ConstantLedger::b_norm_bound() const { return double(m) * m * m * C_E * (C_H + 1.0); }

nlohmann::json ConstantLedger::to_json() const {
  nlohmann::json j = {{"m", m},
                      {"C_E", C_E},
                      {"C_S", C_S},
                      {"r0", r0},
                      {"C_H", C_H},
                      {"alpha_bar", alpha_bar},
                      {"alpha", alpha},
                      {"delta_bar", delta_bar},
                      {"log_delta_bar", log_delta_bar},
                      {"r1", r1},
                      {"log_r1", log_r1}};
  if (exact) j["exact"] = exact->to_json();
  return j;
}

ConstantLedger derive_constants(int m, double C_E, double C_S, double r0, std::optional<double> alpha) {
  check_domain(m, C_E, C_S, r0);
  ConstantLedger L;
  L.m = m;
  L.C_E = C_E;
  L.C_S = C_S;
  L.r0 = r0;
  L.C_H = 2.0 * (C_E * C_E * ((m - 1) * (C_S + 1.0) + 2.0) + 1.0);
  L.alpha_bar = -2.0 + C_E * (1.0 + m * C_E + double(m) * m * m * C_E * (L.C_H + 1.0));
  L.alpha = alpha.value_or(L.alpha_bar);
  if (!(L.alpha > 0.0)) throw Error(ErrorKind::Domain, "alpha must be positive", {{"alpha", L.alpha}});
  L.log_delta_bar = log_delta_bar(L.alpha, r0);
  L.delta_bar = std::exp(L.log_delta_bar);
  const double log_k = std::log(4.0 * m * m * C_E * (L.C_H + 1.0));
  L.log_r1 = std::min(std::log(r0), L.log_delta_bar - log_k);
  L.r1 = std::exp(L.log_r1);
  return L;
}

}  // namespace maxlab
