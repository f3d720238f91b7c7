#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stppm {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that violates a schema or shape requirement.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or recursion failed mid-run. Carries a textual dump of the
/// sampler state at the time of failure so the run can be diagnosed.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::string state_dump = {})
      : std::runtime_error(what), state_dump_(std::move(state_dump)) {}

  const std::string& state_dump() const noexcept { return state_dump_; }

 private:
  std::string state_dump_;
};

}  // namespace stppm
