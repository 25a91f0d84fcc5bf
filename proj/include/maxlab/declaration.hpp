#pragma once

// "name key=value ..." declarations used for charts, models and metrics in
// configs.  Unknown or malformed keys are configuration errors.

#include <map>
#include <string>

#include "maxlab/warped.hpp"

namespace maxlab {

class Declaration {
 public:
  explicit Declaration(const std::string& text);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }

  // Removes and returns a key, or the fallback when absent.
  std::string take(const std::string& key, const std::string& fallback);
  int take_int(const std::string& key, int fallback);
  double take_double(const std::string& key, double fallback);
  // Throws if any key was not consumed.
  void finish() const;

 private:
  std::string text_;
  std::string name_;
  std::map<std::string, std::string> kv_;
};

// Reads fiber=, dim=, amplitude= and warp=cos|unit with the given defaults.
WarpedProduct take_warped(Declaration& d, FiberKind default_fiber, int default_dim, WarpKind default_warp);

}  // namespace maxlab
