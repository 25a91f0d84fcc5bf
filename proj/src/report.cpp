#include "maxlab/report.hpp"

#include <stdexcept>

namespace maxlab {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::HypothesisFailure: return "hypothesis-failure";
    case Verdict::ConclusionFailure: return "conclusion-failure";
    case Verdict::NumericalQuality: return "numerical-quality";
    case Verdict::InconsistentHypotheses: return "INCONSISTENT-HYPOTHESES";
    case Verdict::Identical: return "identical";
  }
  return "unknown";
}

Verdict verdict_from_string(std::string_view s) {
  for (Verdict v : {Verdict::Pass, Verdict::HypothesisFailure, Verdict::ConclusionFailure,
                    Verdict::NumericalQuality, Verdict::InconsistentHypotheses, Verdict::Identical}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown verdict: " + std::string(s));
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["verdict"] = std::string(to_string(verdict));
  if (!message.empty()) j["message"] = message;
  j["witness"] = witness;
  j["residual"] = residual;
  j["params"] = params;
  return j;
}

Report combine(std::string check, const std::vector<Report>& parts) {
  Report out;
  out.check = std::move(check);
  auto rank = [](Verdict v) {
    switch (v) {
      case Verdict::ConclusionFailure: return 4;
      case Verdict::NumericalQuality: return 3;
      case Verdict::HypothesisFailure: return 2;
      case Verdict::InconsistentHypotheses: return 1;
      default: return 0;
    }
  };
  int worst = 0;
  nlohmann::json sub = nlohmann::json::array();
  for (const auto& p : parts) {
    sub.push_back(p.to_json());
    if (rank(p.verdict) > worst) {
      worst = rank(p.verdict);
      out.verdict = p.verdict;
      out.message = p.check + ": " + p.message;
      out.witness = p.witness;
    }
  }
  out.residual["parts"] = std::move(sub);
  return out;
}

}  // namespace maxlab
