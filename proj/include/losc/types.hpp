#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "losc/errors.hpp"

namespace losc {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecXd = VecX<double>;
using MatXd = MatX<double>;

// Defining constants of the deformed oscillator, in natural units: unit
// particle mass, dimensionless lambda and omega; hbar enters only through
// the discrete spectrum.
template <typename Scalar>
struct Parameters {
  Scalar lambda{0};
  Scalar omega{1};
  int n_dim{3};
  Scalar hbar{1};
};

using Parametersd = Parameters<double>;

template <typename Scalar>
void validate(const Parameters<Scalar>& par) {
  if (par.n_dim < 2) throw ParameterError("parameters: n_dim must be >= 2");
  if (!(par.omega >= Scalar(0))) throw ParameterError("parameters: omega must be >= 0");
  if (!(par.hbar > Scalar(0))) throw ParameterError("parameters: hbar must be > 0");
}

// The three manifolds carrying the model, plus the flat limit:
//   Hyperbolic        lambda > 0, all of R^N
//   SphericalInterior lambda < 0, |q| < r_c
//   Exterior          lambda < 0, |q| > r_c  (metric and Hamiltonian sign-reversed)
//   Flat              lambda = 0
enum class ManifoldKind { Flat, Hyperbolic, SphericalInterior, Exterior };

inline const char* to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::Flat: return "flat";
    case ManifoldKind::Hyperbolic: return "hyperbolic";
    case ManifoldKind::SphericalInterior: return "spherical-interior";
    case ManifoldKind::Exterior: return "exterior";
  }
  return "?";
}

template <typename Scalar>
struct ManifoldType {
  ManifoldKind kind{ManifoldKind::Flat};
  // critical radius 1/sqrt(|lambda|); NaN unless lambda < 0
  Scalar r_c{std::numeric_limits<Scalar>::quiet_NaN()};
};

using ManifoldTyped = ManifoldType<double>;

template <typename Scalar>
struct PhaseState {
  VecX<Scalar> q;
  VecX<Scalar> p;
};

using PhaseStated = PhaseState<double>;

}  // namespace losc
