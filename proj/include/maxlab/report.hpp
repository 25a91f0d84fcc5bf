#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace maxlab {

inline constexpr int kReportSchemaVersion = 1;

enum class Verdict {
  Pass,
  HypothesisFailure,
  ConclusionFailure,
  NumericalQuality,
  InconsistentHypotheses,
  Identical,
};

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

// Machine-readable outcome of one checker.  `witness` carries the point or
// index that decided the verdict, `residual` the measured slack.
struct Report {
  std::string check;
  Verdict verdict = Verdict::Pass;
  std::string message;
  nlohmann::json witness = nlohmann::json::object();
  nlohmann::json residual = nlohmann::json::object();
  nlohmann::json params = nlohmann::json::object();

  bool passed() const { return verdict == Verdict::Pass || verdict == Verdict::Identical; }
  bool conclusion_failure() const { return verdict == Verdict::ConclusionFailure; }

  nlohmann::json to_json() const;
};

// Folds a list of sub-reports into one: the first conclusion failure wins,
// then numerical-quality, then hypothesis failures; otherwise pass.
Report combine(std::string check, const std::vector<Report>& parts);

}  // namespace maxlab
