#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gdfactor {

/// Precondition or argument violation (bad shape, out-of-range rank, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// sigma_r == sigma_{r+1}: the best rank-r approximation is not unique.
class GapAbsent : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An iterative method ran out of budget.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient descent produced a non-finite iterate.
class NumericalOverflow : public NumericalFailure {
 public:
  NumericalOverflow(const std::string& what, std::size_t iteration)
      : NumericalFailure(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gdfactor
