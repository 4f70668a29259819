#pragma once

#include <stdexcept>
#include <string>

namespace curvfunc {

/// Invalid configuration or precondition violation (maps to CLI exit code 2).
class config_error : public std::invalid_argument {
public:
  explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure: SPD violation, solver breakdown, non-convergence
/// (maps to CLI exit code 1).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

class spd_violation : public numerical_error {
public:
  explicit spd_violation(const std::string& msg) : numerical_error(msg) {}
};

class solver_failure : public numerical_error {
public:
  explicit solver_failure(const std::string& msg) : numerical_error(msg) {}
};

}  // namespace curvfunc
