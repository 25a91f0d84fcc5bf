#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace maxlab {

enum class ErrorKind {
  InvalidArgument,
  Dimension,
  Domain,
  Admissibility,
  NotSpacelike,
  Numerical,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind (mapped onto C status
// codes at the API boundary) and optional witness data, e.g. the offending
// point of an admissibility failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, nlohmann::json witness = {})
      : std::runtime_error(what), kind_(kind), witness_(std::move(witness)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::json& witness() const noexcept { return witness_; }

 private:
  ErrorKind kind_;
  nlohmann::json witness_;
};

}  // namespace maxlab
