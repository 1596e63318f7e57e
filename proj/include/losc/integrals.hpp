#pragma once

// Constants of motion of the deformed oscillator: the ascending/descending
// sums of squared angular momenta C^(m), C_(m) and the curved Fradkin tensor
//
//   I_ij = p_i p_j - (2 lambda H - omega^2) q_i q_j ,     1/2 tr I = H .

#include <Eigen/Dense>

#include "losc/model.hpp"
#include "losc/types.hpp"

namespace losc {

// Sum of squared angular momenta over a contiguous coordinate block S:
//   sum_{i<j in S} (q_i p_j - q_j p_i)^2 = |q_S|^2 |p_S|^2 - (q_S . p_S)^2 .
template <typename DerivedQ, typename DerivedP>
typename DerivedQ::Scalar angular_block(const Eigen::MatrixBase<DerivedQ>& q,
                                        const Eigen::MatrixBase<DerivedP>& p,
                                        Eigen::Index start, Eigen::Index len) {
  auto qs = q.segment(start, len);
  auto ps = p.segment(start, len);
  const auto d = qs.dot(ps);
  return qs.squaredNorm() * ps.squaredNorm() - d * d;
}

// c_upper[m-2] = C^(m) over the first m coordinates, m = 2..N;
// c_lower[m-2] = C_(m) over the last m coordinates. C^(N) == C_(N).
template <typename DerivedQ, typename DerivedP>
std::pair<VecX<typename DerivedQ::Scalar>, VecX<typename DerivedQ::Scalar>>
angular_blocks(const Eigen::MatrixBase<DerivedQ>& q,
               const Eigen::MatrixBase<DerivedP>& p) {
  using Scalar = typename DerivedQ::Scalar;
  const Eigen::Index n = q.size();
  VecX<Scalar> upper(n - 1), lower(n - 1);
  for (Eigen::Index m = 2; m <= n; ++m) {
    upper[m - 2] = angular_block(q, p, 0, m);
    lower[m - 2] = angular_block(q, p, n - m, m);
  }
  return {upper, lower};
}

// Total squared angular momentum L^2 = C^(N) = C_(N).
template <typename DerivedQ, typename DerivedP>
typename DerivedQ::Scalar total_angular_momentum_sq(
    const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedP>& p) {
  return angular_block(q, p, 0, q.size());
}

// Curved Fradkin tensor. On the flat/hyperbolic/interior manifolds this is
// the displayed I_ij with H the Hamiltonian value. On the exterior domain
// the whole tensor is sign-reversed along with the Hamiltonian, which keeps
// both the half-trace identity (against the sign-reversed H) and the
// conservation along the sign-reversed flow.
template <typename DerivedQ, typename DerivedP>
MatX<typename DerivedQ::Scalar> fradkin_tensor(
    const Parameters<typename DerivedQ::Scalar>& par,
    const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedP>& p,
    ManifoldKind kind) {
  using Scalar = typename DerivedQ::Scalar;
  const Scalar h = evaluate_H(par, q, p, kind);
  const Scalar sign = kind == ManifoldKind::Exterior ? Scalar(-1) : Scalar(1);
  const Scalar h_generic = sign * h;
  const Scalar k = Scalar(2) * par.lambda * h_generic - par.omega * par.omega;
  const Eigen::Index n = q.size();
  MatX<Scalar> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      out(i, j) = sign * (p[i] * p[j] - k * q[i] * q[j]);
      out(j, i) = out(i, j);
    }
  return out;
}

template <typename DerivedQ, typename DerivedP>
MatX<typename DerivedQ::Scalar> fradkin_tensor(
    const Parameters<typename DerivedQ::Scalar>& par,
    const Eigen::MatrixBase<DerivedQ>& q,
    const Eigen::MatrixBase<DerivedP>& p) {
  return fradkin_tensor(par, q, p, classify_manifold(par, q).kind);
}

// Every monitored constant of motion evaluated at one phase point.
template <typename Scalar>
struct IntegralSet {
  VecX<Scalar> c_upper;   // C^(m), m = 2..N
  VecX<Scalar> c_lower;   // C_(m), m = 2..N
  MatX<Scalar> fradkin;   // I_ij
  Scalar h;               // Hamiltonian value (sign-reversed on the exterior)
};

using IntegralSetd = IntegralSet<double>;

template <typename Scalar>
IntegralSet<Scalar> evaluate_integral_set(const Parameters<Scalar>& par,
                                          const PhaseState<Scalar>& s,
                                          ManifoldKind kind) {
  IntegralSet<Scalar> out;
  auto blocks = angular_blocks(s.q, s.p);
  out.c_upper = std::move(blocks.first);
  out.c_lower = std::move(blocks.second);
  out.fradkin = fradkin_tensor(par, s.q, s.p, kind);
  out.h = evaluate_H(par, s.q, s.p, kind);
  return out;
}

template <typename Scalar>
IntegralSet<Scalar> evaluate_integral_set(const Parameters<Scalar>& par,
                                          const PhaseState<Scalar>& s) {
  return evaluate_integral_set(par, s, classify_manifold(par, s.q).kind);
}

}  // namespace losc
