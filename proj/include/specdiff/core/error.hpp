#pragma once

#include <stdexcept>
#include <string>

namespace specdiff {

/// Invalid input: bad dimensions, out-of-range parameters, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced or encountered non-finite or singular values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace specdiff
