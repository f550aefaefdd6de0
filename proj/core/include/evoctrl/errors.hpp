#pragma once

#include <stdexcept>
#include <string>

namespace evoctrl {

// Raised when a computation detects that its own output is unusable
// (integrator blow-up, non-finite quadrature, violated growth envelope).
// Distinct from std::invalid_argument, which rejects bad inputs up front.
class DiagnosticError : public std::runtime_error {
 public:
  explicit DiagnosticError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario file could not be parsed or failed schema validation.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evoctrl
