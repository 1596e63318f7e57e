#pragma once

// Discrete spectrum of the quantized hyperbolic oscillator (lambda > 0):
//
//   E_n = -hbar^2 lambda m^2 + hbar m sqrt(hbar^2 lambda^2 m^2 + omega^2),
//   m = n + N/2 ,
//
// evaluated in the rationalized form
//
//   E_n = hbar m omega^2 / (sqrt(hbar^2 lambda^2 m^2 + omega^2) + hbar lambda m)
//
// which avoids the cancellation of the two O(m^2) terms at large n. Levels
// increase strictly with n and accumulate at omega^2 / (2 lambda). The
// spherical case (lambda < 0) has no closed-form spectrum here.

#include <cmath>

#include "losc/errors.hpp"
#include "losc/types.hpp"

namespace losc {

template <typename Scalar>
Scalar spectrum_asymptote(const Parameters<Scalar>& par) {
  if (!(par.lambda > Scalar(0)))
    throw ParameterError("spectrum_asymptote: lambda must be > 0");
  return par.omega * par.omega / (Scalar(2) * par.lambda);
}

template <typename Scalar>
Scalar energy_level(const Parameters<Scalar>& par, long n) {
  if (!(par.lambda > Scalar(0)))
    throw ParameterError(
        "energy_level: the closed-form spectrum exists for lambda > 0 only "
        "(no discrete levels are provided for the spherical case)");
  if (n < 0) throw ParameterError("energy_level: n must be >= 0");
  const Scalar m = Scalar(n) + Scalar(par.n_dim) / Scalar(2);
  const Scalar am = par.hbar * par.lambda * m;
  const Scalar s = std::sqrt(am * am + par.omega * par.omega);
  return par.hbar * m * par.omega * par.omega / (s + am);
}

template <typename Scalar>
VecX<Scalar> spectrum(const Parameters<Scalar>& par, long n_levels) {
  if (n_levels < 1) throw ParameterError("spectrum: n_levels must be >= 1");
  VecX<Scalar> out(n_levels);
  for (long n = 0; n < n_levels; ++n) out[n] = energy_level(par, n);
  return out;
}

}  // namespace losc
