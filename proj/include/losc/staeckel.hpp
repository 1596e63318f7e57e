#pragma once

// Coupling-constant-metamorphosis engine for natural Hamiltonians
//
//   H = p^2 / mu(q) + V(q)   --->   H~ = H / U = p^2 / (mu U) + V / U ,
//
// which transports every second-order symmetry S = S_0 + W of H to a
// symmetry of H~ through an intermediate symmetry S_U = S_0 + W_U of
// H_U = p^2/mu + U:
//
//   S~ = S_0 - W_U H~ + H~ .
//
// Instantiated on the chain (free Euclidean motion - alpha) -> isotropic
// oscillator -> deformed oscillator, which carries the full Fradkin tensor
// and all angular blocks to the deformed model.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "losc/bracket.hpp"
#include "losc/errors.hpp"
#include "losc/types.hpp"

namespace losc {

struct ScalarField {
  std::function<double(const VecXd&)> value;
  std::function<VecXd(const VecXd&)> gradient;

  double operator()(const VecXd& q) const { return value(q); }
};

inline ScalarField constant_field(double c) {
  ScalarField f;
  f.value = [c](const VecXd&) { return c; };
  f.gradient = [](const VecXd& q) { return VecXd(VecXd::Zero(q.size())); };
  return f;
}

// H(q, p) = p^2 / mu(q) + V(q); mu > 0 on the working domain.
struct NaturalHamiltonian {
  ScalarField mu;
  ScalarField v;

  double value(const VecXd& q, const VecXd& p) const {
    return p.squaredNorm() / mu.value(q) + v.value(q);
  }

  void gradient(const VecXd& q, const VecXd& p, VecXd& dq, VecXd& dp) const {
    const double m = mu.value(q);
    const double p2 = p.squaredNorm();
    dq = -(p2 / (m * m)) * mu.gradient(q) + v.gradient(q);
    dp = (2.0 / m) * p;
  }

  PhaseFunction as_phase_function(std::string label) const {
    PhaseFunction f;
    f.label = std::move(label);
    auto self = *this;
    f.value = [self](const VecXd& q, const VecXd& p) { return self.value(q, p); };
    f.gradient = [self](const VecXd& q, const VecXd& p, VecXd& dq, VecXd& dp) {
      self.gradient(q, p, dq, dp);
    };
    return f;
  }
};

// S = sum a^{ij}(q) p_i p_j + W(q), kept as closures: s0 is the momentum
// part with its phase gradient, w / w_u the initial and intermediate
// potential parts, coeff the (symmetric) a^{ij} for inspection.
struct SecondOrderSymmetry {
  PhaseFunction s0;
  ScalarField w;
  ScalarField w_u;
  std::function<MatXd(const VecXd&)> coeff;
};

inline double checked_u(const ScalarField& u, const VecXd& q) {
  const double uq = u.value(q);
  if (!(uq > 0.0)) throw DomainError("staeckel: U(q) <= 0 on the working domain");
  return uq;
}

// mu~ = mu U, V~ = V / U; pointwise H~(q,p) = H(q,p)/U(q).
inline NaturalHamiltonian staeckel_transform(const NaturalHamiltonian& h,
                                             const ScalarField& u) {
  NaturalHamiltonian out;
  out.mu.value = [mu = h.mu, u](const VecXd& q) {
    return mu.value(q) * checked_u(u, q);
  };
  out.mu.gradient = [mu = h.mu, u](const VecXd& q) {
    const double uq = checked_u(u, q);
    return VecXd(mu.gradient(q) * uq + mu.value(q) * u.gradient(q));
  };
  out.v.value = [v = h.v, u](const VecXd& q) {
    return v.value(q) / checked_u(u, q);
  };
  out.v.gradient = [v = h.v, u](const VecXd& q) {
    const double uq = checked_u(u, q);
    return VecXd(v.gradient(q) / uq -
                 (v.value(q) / (uq * uq)) * u.gradient(q));
  };
  return out;
}

// S~ = S_0 + (1 - W_U) H~, with gradient assembled by the product rule.
inline PhaseFunction transform_symmetry(const SecondOrderSymmetry& s,
                                        const NaturalHamiltonian& h_tilde,
                                        const ScalarField& u) {
  PhaseFunction f;
  f.label = s.s0.label.empty() ? "S~" : s.s0.label + "~";
  f.value = [s, h_tilde, u](const VecXd& q, const VecXd& p) {
    checked_u(u, q);
    const double ht = h_tilde.value(q, p);
    return s.s0.value(q, p) + (1.0 - s.w_u.value(q)) * ht;
  };
  f.gradient = [s, h_tilde, u](const VecXd& q, const VecXd& p, VecXd& dq,
                               VecXd& dp) {
    checked_u(u, q);
    const double ht = h_tilde.value(q, p);
    const double wu = s.w_u.value(q);
    VecXd hq, hp;
    h_tilde.gradient(q, p, hq, hp);
    VecXd s0q(q.size()), s0p(p.size());
    s.s0.gradient(q, p, s0q, s0p);
    dq = s0q - ht * s.w_u.gradient(q) + (1.0 - wu) * hq;
    dp = s0p + (1.0 - wu) * hp;
  };
  return f;
}

// The deformed-oscillator chain: initial free motion shifted by
// alpha = omega^2 / (2 lambda), conformal factor U = 1 + lambda q^2,
// intermediate isotropic oscillator H_U = p^2/2 + lambda q^2 + 1, and the
// final Hamiltonian H~ = H_lambda - alpha.
struct StaeckelInstance {
  Parametersd params;
  double alpha;
  ScalarField u;
  NaturalHamiltonian h_init;
  NaturalHamiltonian h_intermediate;
  NaturalHamiltonian h_final;
  std::vector<SecondOrderSymmetry> symmetries;
};

inline StaeckelInstance make_oscillator_instance(const Parametersd& par) {
  if (par.lambda == 0.0)
    throw FlatLimitError("staeckel instance needs lambda != 0 (alpha = omega^2 / (2 lambda))");
  StaeckelInstance inst;
  inst.params = par;
  inst.alpha = par.omega * par.omega / (2.0 * par.lambda);

  const double lambda = par.lambda;
  inst.u.value = [lambda](const VecXd& q) { return 1.0 + lambda * q.squaredNorm(); };
  inst.u.gradient = [lambda](const VecXd& q) { return VecXd(2.0 * lambda * q); };

  inst.h_init.mu = constant_field(2.0);
  inst.h_init.v = constant_field(-inst.alpha);
  inst.h_intermediate.mu = constant_field(2.0);
  inst.h_intermediate.v = inst.u;
  inst.h_final = staeckel_transform(inst.h_init, inst.u);

  const int n = par.n_dim;
  ScalarField zero = constant_field(0.0);

  auto block_coeff = [](Eigen::Index start, Eigen::Index len) {
    return [start, len](const VecXd& q) {
      // a = |q_S|^2 Id - q_S q_S^T on the block, zero elsewhere
      MatXd a = MatXd::Zero(q.size(), q.size());
      auto qs = q.segment(start, len);
      a.block(start, start, len, len) =
          qs.squaredNorm() * MatXd::Identity(len, len) - qs * qs.transpose();
      return a;
    };
  };

  for (int m = 2; m <= n; ++m) {
    SecondOrderSymmetry s;
    s.s0 = make_angular_block_upper(n, m);
    s.w = zero;
    s.w_u = zero;
    s.coeff = block_coeff(0, m);
    inst.symmetries.push_back(std::move(s));
  }
  for (int m = 2; m <= n; ++m) {
    SecondOrderSymmetry s;
    s.s0 = make_angular_block_lower(n, m);
    s.w = zero;
    s.w_u = zero;
    s.coeff = block_coeff(n - m, m);
    inst.symmetries.push_back(std::move(s));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      SecondOrderSymmetry s;
      s.s0.label = "S(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      s.s0.value = [i, j](const VecXd&, const VecXd& p) { return p[i] * p[j]; };
      s.s0.gradient = [i, j](const VecXd&, const VecXd& p, VecXd& dq, VecXd& dp) {
        dq.setZero();
        dp.setZero();
        dp[i] += p[j];
        dp[j] += p[i];
      };
      s.w = zero;
      // intermediate oscillator needs W_U = 2 lambda q_i q_j to commute
      s.w_u.value = [lambda, i, j](const VecXd& q) { return 2.0 * lambda * q[i] * q[j]; };
      s.w_u.gradient = [lambda, i, j](const VecXd& q) {
        VecXd g = VecXd::Zero(q.size());
        g[i] += 2.0 * lambda * q[j];
        g[j] += 2.0 * lambda * q[i];
        return g;
      };
      s.coeff = [i, j](const VecXd& q) {
        MatXd a = MatXd::Zero(q.size(), q.size());
        a(i, j) += 0.5;
        a(j, i) += 0.5;
        return a;
      };
      inst.symmetries.push_back(std::move(s));
    }
  }
  return inst;
}

}  // namespace losc
