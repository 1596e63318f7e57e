#pragma once

#include <stdexcept>
#include <string>

namespace losc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation requested outside the manifold domain (metric factor <= 0,
// wrong side of the critical radius, ...).
struct DomainError : Error {
  using Error::Error;
};

// State or radius inside the guard band around the critical radius r_c,
// where the metric degenerates and the curvature diverges.
struct SingularityError : Error {
  using Error::Error;
};

// Invalid model parameters (n_dim < 2, omega < 0, lambda of the wrong sign
// for the requested quantity, ...).
struct ParameterError : Error {
  using Error::Error;
};

// Construction that needs lambda != 0 was asked for the flat limit.
struct FlatLimitError : Error {
  using Error::Error;
};

// Implicit solve did not reach its fixed-point tolerance within the
// configured iteration cap.
struct ConvergenceError : Error {
  using Error::Error;
};

// A trajectory left the domain of its declared manifold type; carries the
// integration time at which that happened.
struct DomainExitError : Error {
  double t_exit;
  DomainExitError(const std::string& what, double t) : Error(what), t_exit(t) {}
};

struct UnboundOrbitError : Error {
  using Error::Error;
};

// Requested value outside the image of a monotone map (e.g. Q past Q_c).
struct RangeError : Error {
  using Error::Error;
};

// Hyperspherical chart singularities.
struct OriginError : Error {
  using Error::Error;
};
struct ChartError : Error {
  using Error::Error;
};

// Jacobian rank collapsed at a non-generic phase point.
struct DegenerateStateError : Error {
  using Error::Error;
};

}  // namespace losc
