#include "maxlab/error.hpp"

namespace maxlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Dimension: return "dimension-mismatch";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Admissibility: return "admissibility";
    case ErrorKind::NotSpacelike: return "not-spacelike";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace maxlab
