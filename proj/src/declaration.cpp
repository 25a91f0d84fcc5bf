#include "maxlab/declaration.hpp"

#include <sstream>

#include "maxlab/error.hpp"

namespace maxlab {

Declaration::Declaration(const std::string& text) : text_(text) {
  std::istringstream ss(text);
  ss >> name_;
  if (name_.empty()) throw Error(ErrorKind::Config, "empty declaration");
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::Config, "malformed parameter '" + tok + "' in '" + text + "'");
    }
    kv_[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
}

std::string Declaration::take(const std::string& key, const std::string& fallback) {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string v = it->second;
  kv_.erase(it);
  return v;
}

int Declaration::take_int(const std::string& key, int fallback) {
  const std::string s = take(key, std::to_string(fallback));
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, "parameter " + key + " must be an integer, got '" + s + "'");
}

double Declaration::take_double(const std::string& key, double fallback) {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string s = take(key, "");
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, "parameter " + key + " must be a number, got '" + s + "'");
}

void Declaration::finish() const {
  if (!kv_.empty()) {
    throw Error(ErrorKind::Config, "unknown parameter '" + kv_.begin()->first + "' in '" + text_ + "'");
  }
}

WarpedProduct take_warped(Declaration& d, FiberKind default_fiber, int default_dim, WarpKind default_warp) {
  WarpedProduct w;
  w.fiber.kind = fiber_kind_from_string(d.take("fiber", to_string(default_fiber)));
  w.fiber.dim = d.take_int("dim", default_dim);
  w.fiber.amplitude = d.take_double("amplitude", 0.05);
  const std::string warp = d.take("warp", default_warp == WarpKind::Cosine ? "cos" : "unit");
  if (warp == "cos") {
    w.warp = WarpKind::Cosine;
  } else if (warp == "unit") {
    w.warp = WarpKind::Unit;
  } else {
    throw Error(ErrorKind::Config, "warp must be 'cos' or 'unit', got '" + warp + "'");
  }
  if (w.fiber.dim < 1) throw Error(ErrorKind::Config, "fiber dim must be >= 1");
  return w;
}

}  // namespace maxlab
