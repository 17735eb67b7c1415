#pragma once

#include <stdexcept>
#include <string>

namespace jtree {

/// Malformed input: structural invariant or parameter precondition broken.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method failed to reach its tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Spectral parameter or energy outside an operation's domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The analysis declines to classify (ambiguous weights, non-isolated
/// eigenvalue, fractional local order).
class RefusedClassification : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jtree
