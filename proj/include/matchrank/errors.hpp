#pragma once

#include <stdexcept>
#include <string>

namespace matchrank {

// Solver / numerical failures (no perfect matching on a claimed doubly
// stochastic matrix, Sinkhorn budget exhausted where convergence is required,
// non-finite gradients, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace matchrank
