#pragma once

#include <stdexcept>
#include <string>

namespace curv4 {

// Bad user input: malformed specs, out-of-range parameters.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A geometric object could not be built or evaluated (degenerate metric,
// loss of positive definiteness, non-minimal surface, ...).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curv4
