#pragma once

#include <stdexcept>
#include <string>

namespace rramcim {

// Operand shapes do not agree (matrix/vector widths, slice sizes).
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed BMV1 text or config content.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Filesystem read/write failure.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Redundancy steering could not place every compute column on a fault-free
// physical column.
class DeploymentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A configuration value violates a documented invariant.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace rramcim
