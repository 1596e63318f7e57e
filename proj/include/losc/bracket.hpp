#pragma once

// Poisson-bracket engine over canonical phase space:
//   {f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i).
// Functions carry an optional analytic gradient; without one, central finite
// differences are used (step max(1,|x|) * eps^(1/3) per component).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "losc/integrals.hpp"
#include "losc/model.hpp"
#include "losc/types.hpp"

namespace losc {

struct PhaseFunction {
  std::function<double(const VecXd&, const VecXd&)> value;
  std::function<void(const VecXd&, const VecXd&, VecXd&, VecXd&)> gradient;
  std::string label;

  bool has_gradient() const { return static_cast<bool>(gradient); }
  double operator()(const VecXd& q, const VecXd& p) const { return value(q, p); }
};

inline void fd_phase_gradient(const PhaseFunction& f, const VecXd& q,
                              const VecXd& p, VecXd& dq, VecXd& dp) {
  static const double step_scale = std::cbrt(std::numeric_limits<double>::epsilon());
  const Eigen::Index n = q.size();
  dq.resize(n);
  dp.resize(n);
  VecXd qw = q, pw = p;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = std::max(1.0, std::abs(q[i])) * step_scale;
    qw[i] = q[i] + h;
    const double fp = f.value(qw, p);
    qw[i] = q[i] - h;
    const double fm = f.value(qw, p);
    qw[i] = q[i];
    dq[i] = (fp - fm) / (2 * h);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = std::max(1.0, std::abs(p[i])) * step_scale;
    pw[i] = p[i] + h;
    const double fp = f.value(q, pw);
    pw[i] = p[i] - h;
    const double fm = f.value(q, pw);
    pw[i] = p[i];
    dp[i] = (fp - fm) / (2 * h);
  }
}

inline void phase_gradient(const PhaseFunction& f, const VecXd& q,
                           const VecXd& p, VecXd& dq, VecXd& dp) {
  if (f.has_gradient()) {
    dq.resize(q.size());
    dp.resize(p.size());
    f.gradient(q, p, dq, dp);
  } else {
    fd_phase_gradient(f, q, p, dq, dp);
  }
}

inline double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                              const VecXd& q, const VecXd& p) {
  VecXd fq, fp, gq, gp;
  phase_gradient(f, q, p, fq, fp);
  phase_gradient(g, q, p, gq, gp);
  return fq.dot(gp) - fp.dot(gq);
}

inline double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                              const PhaseStated& s) {
  return poisson_bracket(f, g, s.q, s.p);
}

// ---- canonical function factories (analytic gradients) ----

inline PhaseFunction make_coordinate(Eigen::Index i) {
  PhaseFunction f;
  f.label = "q" + std::to_string(i + 1);
  f.value = [i](const VecXd& q, const VecXd&) { return q[i]; };
  f.gradient = [i](const VecXd&, const VecXd&, VecXd& dq, VecXd& dp) {
    dq.setZero();
    dp.setZero();
    dq[i] = 1.0;
  };
  return f;
}

inline PhaseFunction make_momentum(Eigen::Index i) {
  PhaseFunction f;
  f.label = "p" + std::to_string(i + 1);
  f.value = [i](const VecXd& q, const VecXd& p) { (void)q; return p[i]; };
  f.gradient = [i](const VecXd&, const VecXd&, VecXd& dq, VecXd& dp) {
    dq.setZero();
    dp.setZero();
    dp[i] = 1.0;
  };
  return f;
}

inline PhaseFunction make_hamiltonian(const Parametersd& par, ManifoldKind kind) {
  PhaseFunction f;
  f.label = "H";
  f.value = [par, kind](const VecXd& q, const VecXd& p) {
    return evaluate_H(par, q, p, kind);
  };
  f.gradient = [par, kind](const VecXd& q, const VecXd& p, VecXd& dq, VecXd& dp) {
    gradient_H(par, q, p, kind, dq, dp);
  };
  return f;
}

// Block sum over coordinates [start, start+len); gradient from the closed
// form C = A B - D^2 (A = |q_S|^2, B = |p_S|^2, D = q_S . p_S):
//   dC/dq_S = 2 (B q_S - D p_S),  dC/dp_S = 2 (A p_S - D q_S).
inline PhaseFunction make_angular_block(Eigen::Index start, Eigen::Index len,
                                        std::string label) {
  PhaseFunction f;
  f.label = std::move(label);
  f.value = [start, len](const VecXd& q, const VecXd& p) {
    return angular_block(q, p, start, len);
  };
  f.gradient = [start, len](const VecXd& q, const VecXd& p, VecXd& dq, VecXd& dp) {
    dq.setZero();
    dp.setZero();
    auto qs = q.segment(start, len);
    auto ps = p.segment(start, len);
    const double a = qs.squaredNorm();
    const double b = ps.squaredNorm();
    const double d = qs.dot(ps);
    dq.segment(start, len) = 2.0 * (b * qs - d * ps);
    dp.segment(start, len) = 2.0 * (a * ps - d * qs);
  };
  return f;
}

inline PhaseFunction make_angular_block_upper([[maybe_unused]] int n_dim, int m) {
  return make_angular_block(0, m, "C^(" + std::to_string(m) + ")");
}

inline PhaseFunction make_angular_block_lower(int n_dim, int m) {
  return make_angular_block(n_dim - m, m, "C_(" + std::to_string(m) + ")");
}

// Fradkin component; the exterior sign reversal follows fradkin_tensor.
inline PhaseFunction make_fradkin_component(const Parametersd& par,
                                            ManifoldKind kind, Eigen::Index i,
                                            Eigen::Index j) {
  PhaseFunction f;
  f.label = "I(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
  const double sign = kind == ManifoldKind::Exterior ? -1.0 : 1.0;
  f.value = [par, kind, sign, i, j](const VecXd& q, const VecXd& p) {
    const double hg = sign * evaluate_H(par, q, p, kind);
    const double k = 2.0 * par.lambda * hg - par.omega * par.omega;
    return sign * (p[i] * p[j] - k * q[i] * q[j]);
  };
  f.gradient = [par, sign, i, j](const VecXd& q, const VecXd& p, VecXd& dq,
                                 VecXd& dp) {
    // generic-H gradient (valid for either sign of the factor)
    const double q2 = q.squaredNorm();
    const double p2 = p.squaredNorm();
    const double fm = 1.0 + par.lambda * q2;
    const double hg = (p2 + par.omega * par.omega * q2) / (2.0 * fm);
    const double k = 2.0 * par.lambda * hg - par.omega * par.omega;
    const double cq = (par.omega * par.omega - par.lambda * p2) / (fm * fm);
    const double two_l_qq = 2.0 * par.lambda * q[i] * q[j];
    dq = (-two_l_qq * cq) * q;
    dq[i] += -k * q[j];
    dq[j] += -k * q[i];
    dp = (-two_l_qq / fm) * p;
    dp[i] += p[j];
    dp[j] += p[i];
    dq *= sign;
    dp *= sign;
  };
  return f;
}

// ---- functional independence ----

struct RankReport {
  VecXd singular_values;
  int rank = 0;
  // all gradients vanished (e.g. q = p = 0, where every even integral is
  // stationary); the rank says nothing about generic independence there
  bool degenerate = false;
};

inline RankReport independence_rank(const std::vector<PhaseFunction>& fns,
                                    const VecXd& q, const VecXd& p,
                                    double rel_threshold = 1e-10) {
  const Eigen::Index n = q.size();
  MatXd jac(static_cast<Eigen::Index>(fns.size()), 2 * n);
  VecXd dq, dp;
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(fns.size()); ++r) {
    phase_gradient(fns[r], q, p, dq, dp);
    jac.row(r).head(n) = dq.transpose();
    jac.row(r).tail(n) = dp.transpose();
  }
  Eigen::JacobiSVD<MatXd> svd(jac);
  RankReport rep;
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
  if (smax <= 0.0) {
    rep.rank = 0;
    rep.degenerate = true;
    return rep;
  }
  const double thresh = rel_threshold * smax;
  rep.rank = static_cast<int>((rep.singular_values.array() > thresh).count());
  rep.degenerate = rep.rank == 0;
  return rep;
}

inline RankReport independence_rank(const std::vector<PhaseFunction>& fns,
                                    const PhaseStated& s,
                                    double rel_threshold = 1e-10) {
  return independence_rank(fns, s.q, s.p, rel_threshold);
}

// The 2N-1 member set {H, C^(m), C_(m), I_ii} (m = 2..N, fixed i).
inline std::vector<PhaseFunction> independent_set(const Parametersd& par,
                                                  ManifoldKind kind,
                                                  Eigen::Index diag_index = 0) {
  std::vector<PhaseFunction> fns;
  fns.push_back(make_hamiltonian(par, kind));
  for (int m = 2; m <= par.n_dim; ++m) fns.push_back(make_angular_block_upper(par.n_dim, m));
  for (int m = 2; m <= par.n_dim; ++m) fns.push_back(make_angular_block_lower(par.n_dim, m));
  fns.push_back(make_fradkin_component(par, kind, diag_index, diag_index));
  return fns;
}

}  // namespace losc
