#pragma once

#include <stdexcept>
#include <string>

namespace adascale {

/// Invalid or inconsistent user-supplied configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The requested operation is not supported by this object
/// (e.g. analytic moments of a data-driven objective).
class CapabilityError : public std::logic_error {
 public:
  explicit CapabilityError(const std::string& what) : std::logic_error(what) {}
};

/// A mathematical precondition of a bound or estimator does not hold.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace adascale
