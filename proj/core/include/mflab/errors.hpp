#pragma once

#include <stdexcept>
#include <string>

namespace mflab {

/// Invalid configuration (bad parameter ranges, k >= n, nonpositive horizon, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Two vectors with different neighbor counts were combined.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A long-run quantity was requested for an unstable system (lambda >= mu).
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed its own sanity monitor (non-convergence,
/// mass drift, asymmetry beyond tolerance). The message carries the residual.
struct DiagnosticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structural defect in an assembled chain (reducible generator, zero pivot,
/// state-space guard exceeded).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mflab
