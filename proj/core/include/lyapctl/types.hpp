#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace lyapctl {

/// Flat real state. Multi-block flows pack their blocks contiguously.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Invalid configuration or precondition violation. `field()` names the
/// offending parameter when there is one.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A state of the wrong length was handed to an evaluator.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lyapctl
