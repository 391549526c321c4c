#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mdpdesign {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths that do not match the model they are used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// One or more invariants of a domain object are violated. `violations()`
/// holds one human-readable line per failed check.
class InvariantError : public Error {
 public:
  explicit InvariantError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// The design space has a shape an algorithm cannot handle (e.g. continuous
/// variables passed to the enumeration oracle).
class UnsupportedDesignError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (enumeration box, product state space) is exceeded.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// A big-M bound cannot be computed because a cost-coupled design variable is
/// unbounded.
class UnboundedDesignError : public Error {
 public:
  UnboundedDesignError(std::size_t variable, const std::string& what);

  std::size_t variable() const { return variable_; }

 private:
  std::size_t variable_;
};

/// The MIP objective disagrees with the objective re-derived by solving every
/// scenario MDP at the MIP's design.
class BigMValidityError : public Error {
 public:
  BigMValidityError(double mip_objective, double rederived_objective);

  double mip_objective() const { return mip_objective_; }
  double rederived_objective() const { return rederived_objective_; }

 private:
  double mip_objective_;
  double rederived_objective_;
};

}  // namespace mdpdesign
