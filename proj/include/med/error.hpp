#pragma once

#include <stdexcept>
#include <string>

namespace med {

/// Violated shape or argument precondition.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid user-facing configuration (bad key, out-of-range value, missing file).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared in a forward or backward result, or a fit diverged.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string op, const std::string& what)
      : std::runtime_error(what), op_(std::move(op)) {}

  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

/// Unreadable, malformed or unsupported file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph misuse: backward on a non-scalar root, repeated backward, cycles.
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace med
