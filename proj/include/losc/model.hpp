#pragma once

// Hamiltonian, metric factor and scalar curvature of the lambda-deformed
// isotropic oscillator
//
//   H = (p^2 + omega^2 q^2) / (2 (1 + lambda q^2)) ,
//
// together with manifold classification and analytic phase-space gradients.
// On the exterior domain (lambda < 0, |q| > r_c) the metric factor and the
// Hamiltonian are sign-reversed so that both stay positive.

#include <cmath>
#include <optional>
#include <utility>

#include "losc/errors.hpp"
#include "losc/types.hpp"

namespace losc {

template <typename Scalar>
Scalar critical_radius(const Parameters<Scalar>& par) {
  return Scalar(1) / std::sqrt(std::abs(par.lambda));
}

// Guard band around r_c inside which states are rejected rather than
// evaluated (the metric degenerates and the curvature diverges there).
template <typename Scalar>
Scalar default_guard(const Parameters<Scalar>& par) {
  return Scalar(1e-9) * critical_radius(par);
}

// Signed conformal factor 1 + lambda r^2; for the exterior manifold the
// metric is the sign-reversed |lambda| r^2 - 1. Callers check the sign.
template <typename Scalar>
Scalar metric_factor(const Parameters<Scalar>& par, Scalar r,
                     ManifoldKind kind) {
  const Scalar f = Scalar(1) + par.lambda * r * r;
  return kind == ManifoldKind::Exterior ? -f : f;
}

template <typename Scalar>
Scalar metric_factor(const Parameters<Scalar>& par, Scalar r) {
  return metric_factor(par, r, ManifoldKind::Hyperbolic);
}

template <typename Derived>
typename Derived::Scalar metric_factor(
    const Parameters<typename Derived::Scalar>& par,
    const Eigen::MatrixBase<Derived>& q,
    ManifoldKind kind = ManifoldKind::Hyperbolic) {
  using Scalar = typename Derived::Scalar;
  const Scalar f = Scalar(1) + par.lambda * q.squaredNorm();
  return kind == ManifoldKind::Exterior ? -f : f;
}

template <typename Scalar>
ManifoldType<Scalar> classify_manifold(const Parameters<Scalar>& par, Scalar r,
                                       Scalar guard = Scalar(-1)) {
  ManifoldType<Scalar> m;
  if (par.lambda == Scalar(0)) {
    m.kind = ManifoldKind::Flat;
    return m;
  }
  if (par.lambda > Scalar(0)) {
    m.kind = ManifoldKind::Hyperbolic;
    return m;
  }
  const Scalar rc = critical_radius(par);
  if (guard < Scalar(0)) guard = default_guard(par);
  if (std::abs(r - rc) < guard)
    throw SingularityError("classify_manifold: |q| within guard band of the critical radius");
  m.r_c = rc;
  m.kind = r < rc ? ManifoldKind::SphericalInterior : ManifoldKind::Exterior;
  return m;
}

template <typename Derived>
ManifoldType<typename Derived::Scalar> classify_manifold(
    const Parameters<typename Derived::Scalar>& par,
    const Eigen::MatrixBase<Derived>& q,
    typename Derived::Scalar guard = typename Derived::Scalar(-1)) {
  return classify_manifold(par, q.norm(), guard);
}

// Throws unless r lies strictly inside the domain of the declared manifold
// (guard band around r_c respected for lambda < 0).
template <typename Scalar>
void validate_domain(const Parameters<Scalar>& par, Scalar r, ManifoldKind kind,
                     Scalar guard = Scalar(-1)) {
  switch (kind) {
    case ManifoldKind::Flat:
      if (par.lambda != Scalar(0)) throw DomainError("validate_domain: flat kind needs lambda = 0");
      return;
    case ManifoldKind::Hyperbolic:
      if (!(par.lambda > Scalar(0))) throw DomainError("validate_domain: hyperbolic kind needs lambda > 0");
      return;
    case ManifoldKind::SphericalInterior:
    case ManifoldKind::Exterior: {
      if (!(par.lambda < Scalar(0))) throw DomainError("validate_domain: interior/exterior kinds need lambda < 0");
      const Scalar rc = critical_radius(par);
      if (guard < Scalar(0)) guard = default_guard(par);
      if (std::abs(r - rc) < guard)
        throw SingularityError("validate_domain: within guard band of the critical radius");
      const bool inside = r < rc;
      if (inside != (kind == ManifoldKind::SphericalInterior))
        throw DomainError("validate_domain: radius on the wrong side of the critical radius");
      return;
    }
  }
}

template <typename Derived>
void validate_domain(const Parameters<typename Derived::Scalar>& par,
                     const Eigen::MatrixBase<Derived>& q, ManifoldKind kind,
                     typename Derived::Scalar guard = typename Derived::Scalar(-1)) {
  validate_domain(par, q.norm(), kind, guard);
}

// H = (p^2 + omega^2 q^2) / (2 g) with g the manifold's metric factor; on
// the exterior domain g = |lambda| q^2 - 1, which is the sign reversal that
// keeps the kinetic term positive there.
template <typename DerivedQ, typename DerivedP>
typename DerivedQ::Scalar evaluate_H(
    const Parameters<typename DerivedQ::Scalar>& par,
    const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedP>& p,
    ManifoldKind kind) {
  using Scalar = typename DerivedQ::Scalar;
  const Scalar q2 = q.squaredNorm();
  const Scalar g = metric_factor(par, std::sqrt(q2), kind);
  if (!(g > Scalar(0)))
    throw DomainError("evaluate_H: metric factor not positive on the declared manifold");
  return (p.squaredNorm() + par.omega * par.omega * q2) / (Scalar(2) * g);
}

template <typename DerivedQ, typename DerivedP>
typename DerivedQ::Scalar evaluate_H(
    const Parameters<typename DerivedQ::Scalar>& par,
    const Eigen::MatrixBase<DerivedQ>& q,
    const Eigen::MatrixBase<DerivedP>& p) {
  return evaluate_H(par, q, p, classify_manifold(par, q).kind);
}

template <typename Scalar>
Scalar evaluate_H(const Parameters<Scalar>& par, const PhaseState<Scalar>& s,
                  ManifoldKind kind) {
  return evaluate_H(par, s.q, s.p, kind);
}

template <typename Scalar>
Scalar evaluate_H(const Parameters<Scalar>& par, const PhaseState<Scalar>& s) {
  return evaluate_H(par, s.q, s.p);
}

// Analytic partial derivatives of H, written into dq and dp.
//
// With f = 1 + lambda q^2 and A = p^2 + omega^2 q^2, H = A/(2f) gives
//   dH/dp_i = p_i / f ,
//   dH/dq_i = q_i (omega^2 f - lambda A) / f^2 = q_i (omega^2 - lambda p^2) / f^2 .
// Exterior domain: H = A/(2g) with g = -f = |lambda| q^2 - 1, so the same
// algebra with g in place of f yields
//   dH/dp_i = p_i / g ,
//   dH/dq_i = q_i (omega^2 g - |lambda| A) / g^2 = -q_i (omega^2 + |lambda| p^2) / g^2 ,
// i.e. exactly the negative of the generic expressions, as expected for the
// sign-reversed Hamiltonian.
template <typename DerivedQ, typename DerivedP>
void gradient_H(const Parameters<typename DerivedQ::Scalar>& par,
                const Eigen::MatrixBase<DerivedQ>& q,
                const Eigen::MatrixBase<DerivedP>& p, ManifoldKind kind,
                Eigen::Ref<VecX<typename DerivedQ::Scalar>> dq,
                Eigen::Ref<VecX<typename DerivedQ::Scalar>> dp) {
  using Scalar = typename DerivedQ::Scalar;
  const Scalar q2 = q.squaredNorm();
  const Scalar p2 = p.squaredNorm();
  const Scalar f = Scalar(1) + par.lambda * q2;
  const Scalar g = kind == ManifoldKind::Exterior ? -f : f;
  if (!(g > Scalar(0)))
    throw DomainError("gradient_H: metric factor not positive on the declared manifold");
  const Scalar sign = kind == ManifoldKind::Exterior ? Scalar(-1) : Scalar(1);
  dp = (sign / f) * p;
  dq = (sign * (par.omega * par.omega - par.lambda * p2) / (f * f)) * q;
}

template <typename Scalar>
std::pair<VecX<Scalar>, VecX<Scalar>> gradient_H(const Parameters<Scalar>& par,
                                                 const PhaseState<Scalar>& s,
                                                 ManifoldKind kind) {
  std::pair<VecX<Scalar>, VecX<Scalar>> out;
  out.first.resize(s.q.size());
  out.second.resize(s.p.size());
  gradient_H(par, s.q, s.p, kind, out.first, out.second);
  return out;
}

template <typename Scalar>
std::pair<VecX<Scalar>, VecX<Scalar>> gradient_H(const Parameters<Scalar>& par,
                                                 const PhaseState<Scalar>& s) {
  return gradient_H(par, s, classify_manifold(par, s.q).kind);
}

// Scalar curvature profile R(r); the exterior variant is the sign reversal
// of the generic formula, matching its sign-reversed metric:
//   generic:  R = -lambda (N-1) (2N + 3(N-2) lambda r^2) / (1 + lambda r^2)^3
//   exterior: R = |lambda| (N-1) (2N - 3(N-2) |lambda| r^2) / (|lambda| r^2 - 1)^3
template <typename Scalar>
Scalar scalar_curvature(const Parameters<Scalar>& par, Scalar r,
                        ManifoldKind kind) {
  if (!(r >= Scalar(0))) throw DomainError("scalar_curvature: r must be >= 0");
  const int n = par.n_dim;
  if (par.lambda < Scalar(0)) {
    const Scalar rc = critical_radius(par);
    if (std::abs(r - rc) < default_guard(par))
      throw SingularityError("scalar_curvature: diverges at the critical radius");
  }
  const Scalar lr2 = par.lambda * r * r;
  const Scalar f = Scalar(1) + lr2;
  const Scalar generic =
      -par.lambda * Scalar(n - 1) * (Scalar(2 * n) + Scalar(3 * (n - 2)) * lr2) / (f * f * f);
  return kind == ManifoldKind::Exterior ? -generic : generic;
}

template <typename Scalar>
Scalar scalar_curvature(const Parameters<Scalar>& par, Scalar r) {
  ManifoldKind kind =
      par.lambda < Scalar(0) ? classify_manifold(par, r).kind
                             : (par.lambda > Scalar(0) ? ManifoldKind::Hyperbolic
                                                       : ManifoldKind::Flat);
  return scalar_curvature(par, r, kind);
}

template <typename Scalar>
struct CurvatureExtremum {
  Scalar r;
  Scalar value;
  bool is_maximum;
};

// Interior extremum of R(r) for lambda < 0, when the dimension admits one:
//   interior manifold, N >= 7: positive maximum
//   exterior manifold, 3 <= N <= 5: negative minimum
// both located at r = sqrt((N+2) / (2 (N-2) |lambda|)) with
// |R| = 4 |lambda| (N-1) (N-2)^3 / (N-6)^2. Other dimensions are monotone.
template <typename Scalar>
std::optional<CurvatureExtremum<Scalar>> curvature_extrema(
    const Parameters<Scalar>& par, ManifoldKind kind) {
  if (!(par.lambda < Scalar(0)))
    throw ParameterError("curvature_extrema: defined for lambda < 0 only");
  const int n = par.n_dim;
  const Scalar al = std::abs(par.lambda);
  const bool interior = kind == ManifoldKind::SphericalInterior;
  if (interior && n < 7) return std::nullopt;
  if (!interior && (n < 3 || n > 5)) return std::nullopt;
  CurvatureExtremum<Scalar> e;
  e.r = std::sqrt(Scalar(n + 2) / (Scalar(2 * (n - 2)) * al));
  e.value = Scalar(4) * al * Scalar(n - 1) * Scalar((n - 2) * (n - 2) * (n - 2)) /
            Scalar((n - 6) * (n - 6));
  e.is_maximum = interior;
  if (!interior) e.value = -e.value;
  return e;
}

}  // namespace losc
