#pragma once

// Hyperspherical reduction and the radial picture. The chart is
//
//   q_j = r cos(theta_j) prod_{k<j} sin(theta_k)   (j < N),
//   q_N = r prod_{k<N} sin(theta_k),
//
// under which the Hamiltonian reduces to the 1D system
//
//   H(r, p_r) = (p_r^2 + L^2 / r^2 + omega^2 r^2) / (2 g(r)) ,
//
// with g the manifold's metric factor and L^2 the total squared angular
// momentum. A canonical transformation with dQ = sqrt(g) dr and
// P = p_r / sqrt(g) flattens the kinetic term, H = P^2/2 + U_eff(Q).

#include <cmath>
#include <limits>
#include <optional>

#include "losc/errors.hpp"
#include "losc/model.hpp"
#include "losc/types.hpp"

namespace losc {

template <typename Scalar>
struct RadialState {
  Scalar r;
  Scalar p_r;
  Scalar c_n;  // L^2 >= 0
};

using RadialStated = RadialState<double>;

struct Hyperspherical {
  double r;
  VecXd angles;         // theta_1 .. theta_{N-1}
  double p_r;
  VecXd angle_momenta;  // p_theta_1 .. p_theta_{N-1}
};

namespace detail {

// Jacobian dq/d(r, theta); column j > 0 differentiates with respect to
// theta_j. Entry (i, j) for j < i replaces the sin(theta_j) factor of q_i
// by cos(theta_j); entry (j, j) swaps cos(theta_j) for -sin(theta_j).
inline MatXd chart_jacobian(double r, const VecXd& angles) {
  const Eigen::Index n = angles.size() + 1;
  VecXd s(n - 1), c(n - 1);
  for (Eigen::Index k = 0; k < n - 1; ++k) {
    s[k] = std::sin(angles[k]);
    c[k] = std::cos(angles[k]);
  }
  // prod[k] = prod_{l<k} sin(theta_l)
  VecXd prod(n);
  prod[0] = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) prod[k] = prod[k - 1] * s[k - 1];
  VecXd q(n);
  for (Eigen::Index i = 0; i < n - 1; ++i) q[i] = r * c[i] * prod[i];
  q[n - 1] = r * prod[n - 1];

  MatXd jac(n, n);
  jac.col(0) = q / r;
  for (Eigen::Index j = 0; j < n - 1; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i < j) {
        jac(i, j + 1) = 0.0;
      } else if (i == j) {
        jac(i, j + 1) = -r * s[j] * prod[j];
      } else {
        // replace the sin(theta_j) factor by cos(theta_j)
        double v = r * c[j];
        for (Eigen::Index k = 0; k < i && k < n - 1; ++k)
          if (k != j) v *= s[k];
        if (i < n - 1) v *= c[i];
        jac(i, j + 1) = v;
      }
    }
  }
  return jac;
}

}  // namespace detail

// Cartesian -> hyperspherical, including the conjugate momenta
// p_y = J^T p for the point transformation q = q(r, theta).
template <typename DerivedQ, typename DerivedP>
Hyperspherical to_hyperspherical(const Eigen::MatrixBase<DerivedQ>& q,
                                 const Eigen::MatrixBase<DerivedP>& p) {
  const Eigen::Index n = q.size();
  const double r = q.norm();
  if (r == 0.0) throw OriginError("to_hyperspherical: q = 0");
  Hyperspherical h;
  h.r = r;
  h.angles.resize(n - 1);
  // tails[k] = |(q_k, ..., q_{N-1})|; a vanishing tail is the
  // sin(theta) = 0 chart singularity, where the remaining angles are
  // conventional (atan2 returns 0 or pi there)
  VecXd tails(n);
  tails[n - 1] = std::abs(q[n - 1]);
  for (Eigen::Index k = n - 2; k >= 0; --k)
    tails[k] = std::hypot(static_cast<double>(q[k]), tails[k + 1]);
  for (Eigen::Index j = 0; j < n - 2; ++j)
    h.angles[j] = std::atan2(tails[j + 1], static_cast<double>(q[j]));
  h.angles[n - 2] = std::atan2(static_cast<double>(q[n - 1]),
                               static_cast<double>(q[n - 2]));

  const MatXd jac = detail::chart_jacobian(r, h.angles);
  VecXd py = jac.transpose() * p;
  h.p_r = py[0];
  h.angle_momenta = py.tail(n - 1);
  return h;
}

inline Hyperspherical to_hyperspherical(const PhaseStated& s) {
  return to_hyperspherical(s.q, s.p);
}

inline PhaseStated from_hyperspherical(const Hyperspherical& h) {
  const Eigen::Index n = h.angles.size() + 1;
  for (Eigen::Index k = 0; k < n - 2; ++k)
    if (std::sin(h.angles[k]) == 0.0)
      throw ChartError("from_hyperspherical: singular chart point (sin(theta) = 0)");
  PhaseStated s;
  s.q.resize(n);
  double prod = 1.0;
  for (Eigen::Index j = 0; j < n - 1; ++j) {
    s.q[j] = h.r * std::cos(h.angles[j]) * prod;
    prod *= std::sin(h.angles[j]);
  }
  s.q[n - 1] = h.r * prod;
  const MatXd jac = detail::chart_jacobian(h.r, h.angles);
  VecXd py(n);
  py[0] = h.p_r;
  py.tail(n - 1) = h.angle_momenta;
  s.p = jac.transpose().partialPivLu().solve(py);
  return s;
}

// L^2 = sum_j p_theta_j^2 prod_{k<j} 1/sin^2(theta_k). Terms with exactly
// vanishing momentum are dropped, so phase points sitting on a chart
// singularity with no motion across it still get their (smooth) L^2.
inline double angular_momentum_sq_from_chart(const Hyperspherical& h) {
  double l2 = 0.0;
  double inv = 1.0;
  for (Eigen::Index j = 0; j < h.angle_momenta.size(); ++j) {
    if (h.angle_momenta[j] != 0.0) {
      if (!std::isfinite(inv))
        throw ChartError("angular momentum: sin(theta) = 0 with momentum across the singularity");
      l2 += h.angle_momenta[j] * h.angle_momenta[j] * inv;
    }
    const double s = std::sin(h.angles[j]);
    inv /= s * s;
  }
  return l2;
}

// ---- canonical transforms (Q, P) per manifold ----
//
// Flat:      Q = r
// Hyperbolic Q = r sqrt(1 + a r^2)/2 + asinh(sqrt(a) r) / (2 sqrt(a)),  a = lambda
// Interior   Q = r sqrt(1 - a r^2)/2 + asin(sqrt(a) r) / (2 sqrt(a)),   a = |lambda|
// Exterior   Q = r sqrt(a r^2 - 1)/2 - acosh(sqrt(a) r) / (2 sqrt(a)),  a = |lambda|
//
// each with dQ/dr = sqrt(g(r)); the exterior branch is anchored at
// Q(r_c) = 0 (the acosh form equals the log form up to an additive
// constant).

template <typename Scalar>
Scalar canonical_Q(const Parameters<Scalar>& par, Scalar r, ManifoldKind kind) {
  if (!(r >= Scalar(0))) throw DomainError("canonical_Q: r must be >= 0");
  const Scalar a = std::abs(par.lambda);
  const Scalar sa = std::sqrt(a);
  switch (kind) {
    case ManifoldKind::Flat:
      return r;
    case ManifoldKind::Hyperbolic:
      return Scalar(0.5) * r * std::sqrt(Scalar(1) + a * r * r) +
             std::asinh(sa * r) / (Scalar(2) * sa);
    case ManifoldKind::SphericalInterior: {
      const Scalar g = Scalar(1) - a * r * r;
      if (g < Scalar(0)) throw DomainError("canonical_Q: r beyond the critical radius");
      return Scalar(0.5) * r * std::sqrt(g) + std::asin(sa * r) / (Scalar(2) * sa);
    }
    case ManifoldKind::Exterior: {
      const Scalar g = a * r * r - Scalar(1);
      if (g < Scalar(0)) throw DomainError("canonical_Q: r inside the critical radius");
      return Scalar(0.5) * r * std::sqrt(g) - std::acosh(sa * r) / (Scalar(2) * sa);
    }
  }
  throw DomainError("canonical_Q: bad kind");
}

template <typename Scalar>
Scalar dQ_dr(const Parameters<Scalar>& par, Scalar r, ManifoldKind kind) {
  const Scalar g = metric_factor(par, r, kind);
  if (!(g >= Scalar(0))) throw DomainError("dQ_dr: outside the manifold domain");
  return std::sqrt(g);
}

template <typename Scalar>
Scalar canonical_P(const Parameters<Scalar>& par, Scalar r, Scalar p_r,
                   ManifoldKind kind) {
  const Scalar g = metric_factor(par, r, kind);
  if (!(g > Scalar(0))) throw DomainError("canonical_P: outside the manifold domain");
  return p_r / std::sqrt(g);
}

// Q_c markers: upper end of the interior image, lower anchor of the
// exterior image.
template <typename Scalar>
std::optional<Scalar> critical_Q(const Parameters<Scalar>& par, ManifoldKind kind) {
  if (kind == ManifoldKind::SphericalInterior)
    return Scalar(3.14159265358979323846L / 4.0) / std::sqrt(std::abs(par.lambda));
  if (kind == ManifoldKind::Exterior) return Scalar(0);
  return std::nullopt;
}

// Monotone inversion r(Q): bisection bracket with Newton polish on
// Q(r) - Q0 = 0, using the analytic slope dQ/dr = sqrt(g).
inline double invert_Q(const Parametersd& par, double q_target, ManifoldKind kind) {
  if (kind == ManifoldKind::Flat) {
    if (q_target < 0.0) throw RangeError("invert_Q: Q < 0");
    return q_target;
  }
  if (q_target < 0.0) throw RangeError("invert_Q: Q < 0");
  double lo = 0.0, hi = 0.0;
  switch (kind) {
    case ManifoldKind::Hyperbolic:
      // dQ/dr >= 1, so the root lies in [0, Q]
      lo = 0.0;
      hi = q_target;
      break;
    case ManifoldKind::SphericalInterior: {
      const double qc = *critical_Q(par, kind);
      if (q_target >= qc) throw RangeError("invert_Q: Q >= Q_c");
      // dQ/dr <= 1 here, so r >= Q
      lo = q_target;
      hi = critical_radius(par);
      break;
    }
    case ManifoldKind::Exterior: {
      lo = critical_radius(par);
      hi = lo;
      double step = std::max(lo, 1.0);
      while (canonical_Q(par, hi, kind) < q_target) {
        hi += step;
        step *= 2.0;
      }
      break;
    }
    default:
      throw DomainError("invert_Q: bad kind");
  }
  if (q_target == 0.0) return lo;

  const double tol = 8.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1.0, std::abs(q_target));
  double r = 0.5 * (lo + hi);
  double fr = canonical_Q(par, r, kind) - q_target;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fr) <= tol) return r;
    if (fr > 0.0)
      hi = r;
    else
      lo = r;
    const double slope = dQ_dr(par, r, kind);
    double next = slope > 0.0 ? r - fr / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r) break;
    r = next;
    fr = canonical_Q(par, r, kind) - q_target;
  }
  if (std::abs(fr) <= 100.0 * tol) return r;  // bracket exhausted at roundoff
  throw ConvergenceError("invert_Q: no convergence");
}

// ---- effective potential U_eff(Q(r)) = (c_N / r^2 + omega^2 r^2) / (2 g(r)) ----

template <typename Scalar>
Scalar effective_potential(const Parameters<Scalar>& par, Scalar r, Scalar c_n,
                           ManifoldKind kind) {
  if (c_n < Scalar(0)) throw ParameterError("effective_potential: c_n must be >= 0");
  const Scalar g = metric_factor(par, r, kind);
  if (!(g > Scalar(0)))
    throw DomainError("effective_potential: outside the manifold domain");
  if (r == Scalar(0)) {
    if (c_n > Scalar(0))
      throw DomainError("effective_potential: centrifugal divergence at r = 0");
    return Scalar(0);
  }
  return (c_n / (r * r) + par.omega * par.omega * r * r) / (Scalar(2) * g);
}

// Radial Hamiltonian (p_r^2 + c_N / r^2 + omega^2 r^2) / (2 g(r)); equals
// the Cartesian H at (r, p_r, L^2), with the exterior sign convention
// built into g.
template <typename Scalar>
Scalar radial_hamiltonian(const Parameters<Scalar>& par,
                          const RadialState<Scalar>& s, ManifoldKind kind) {
  const Scalar g = metric_factor(par, s.r, kind);
  if (!(g > Scalar(0)))
    throw DomainError("radial_hamiltonian: outside the manifold domain");
  const Scalar cent = s.c_n == Scalar(0) ? Scalar(0) : s.c_n / (s.r * s.r);
  return (s.p_r * s.p_r + cent + par.omega * par.omega * s.r * s.r) / (Scalar(2) * g);
}

template <typename Scalar>
struct PotentialMinimum {
  Scalar r_min;
  Scalar u_min;
};

// Closed-form minimum of U_eff:
//   hyperbolic: r_min^2 = (lambda c + sqrt(lambda^2 c^2 + omega^2 c)) / omega^2,
//               U_min = -lambda c + sqrt(lambda^2 c^2 + omega^2 c)
//   interior:   same with lambda -> -|lambda| in r_min^2 and the sign of the
//               lambda c term flipped in U_min
//   flat:       r_min^2 = sqrt(c)/omega, U_min = omega sqrt(c)
//   exterior:   none (U_eff is strictly decreasing)
// c = 0 with lambda >= 0 degenerates to the boundary minimum r = 0, U = 0,
// which is what the closed forms return.
template <typename Scalar>
std::optional<PotentialMinimum<Scalar>> potential_minimum(
    const Parameters<Scalar>& par, Scalar c_n, ManifoldKind kind) {
  if (!(par.omega > Scalar(0)))
    throw ParameterError("potential_minimum: omega must be > 0");
  if (c_n < Scalar(0)) throw ParameterError("potential_minimum: c_n must be >= 0");
  const Scalar w2 = par.omega * par.omega;
  const Scalar root = std::sqrt(par.lambda * par.lambda * c_n * c_n + w2 * c_n);
  PotentialMinimum<Scalar> m;
  switch (kind) {
    case ManifoldKind::Flat:
      m.r_min = std::sqrt(std::sqrt(c_n) / par.omega);
      m.u_min = par.omega * std::sqrt(c_n);
      return m;
    case ManifoldKind::Hyperbolic:
      m.r_min = std::sqrt((par.lambda * c_n + root) / w2);
      m.u_min = -par.lambda * c_n + root;
      return m;
    case ManifoldKind::SphericalInterior: {
      const Scalar al = std::abs(par.lambda);
      m.r_min = std::sqrt((-al * c_n + root) / w2);
      m.u_min = al * c_n + root;
      return m;
    }
    case ManifoldKind::Exterior:
      return std::nullopt;
  }
  return std::nullopt;
}

template <typename Scalar>
struct PotentialLimits {
  Scalar low;   // r -> 0+ (or r -> r_c+ on the exterior)
  Scalar high;  // r -> infinity (or r -> r_c- on the interior)
};

template <typename Scalar>
PotentialLimits<Scalar> potential_limits(const Parameters<Scalar>& par,
                                         Scalar c_n, ManifoldKind kind) {
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Scalar low0 = c_n > Scalar(0) ? inf : Scalar(0);
  switch (kind) {
    case ManifoldKind::Flat:
      return {low0, inf};
    case ManifoldKind::Hyperbolic:
      return {low0, par.omega * par.omega / (Scalar(2) * par.lambda)};
    case ManifoldKind::SphericalInterior:
      return {low0, inf};
    case ManifoldKind::Exterior:
      return {inf, par.omega * par.omega / (Scalar(2) * std::abs(par.lambda))};
  }
  return {low0, inf};
}

// Profile summary used by the CLI sidecars.
struct EffectivePotentialProfile {
  ManifoldKind kind;
  std::optional<double> r_min, u_min;
  std::optional<double> r_c, q_c;
  double limit_low, limit_high;
};

inline EffectivePotentialProfile potential_profile(const Parametersd& par,
                                                   double c_n,
                                                   ManifoldKind kind) {
  EffectivePotentialProfile prof;
  prof.kind = kind;
  if (auto m = potential_minimum(par, c_n, kind)) {
    prof.r_min = m->r_min;
    prof.u_min = m->u_min;
  }
  if (par.lambda < 0.0) prof.r_c = critical_radius(par);
  if (auto qc = critical_Q(par, kind)) prof.q_c = *qc;
  const auto lims = potential_limits(par, c_n, kind);
  prof.limit_low = lims.low;
  prof.limit_high = lims.high;
  return prof;
}

}  // namespace losc
