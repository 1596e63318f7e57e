#pragma once

// Flow of the deformed oscillator in Cartesian phase space. The kinetic
// factor couples q and p multiplicatively, so the Hamiltonian does not split
// and explicit leapfrog is out; the symplectic schemes are the implicit
// midpoint rule (order 2) and the 2-stage Gauss-Legendre collocation
// (order 4), both solved by fixed-point iteration. An embedded
// Dormand-Prince 5(4) pair is the adaptive non-symplectic fallback.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "losc/errors.hpp"
#include "losc/integrals.hpp"
#include "losc/model.hpp"
#include "losc/types.hpp"

namespace losc {

enum class Scheme { ImplicitMidpoint, Gauss4, RkAdaptive };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::ImplicitMidpoint: return "midpoint";
    case Scheme::Gauss4: return "gauss4";
    case Scheme::RkAdaptive: return "rk45";
  }
  return "?";
}

struct IntegratorConfig {
  Scheme scheme = Scheme::ImplicitMidpoint;
  double dt = 1e-3;             // fixed step / output spacing
  double rel_tol = 1e-10;       // adaptive scheme
  double abs_tol = 1e-12;       // adaptive scheme
  int max_fixed_point_iters = 50;
  double fixed_point_tol = 1e-13;
  int output_stride = 1;        // record every output_stride-th step
};

struct DriftReport {
  std::vector<std::string> labels;
  VecXd max_rel_drift;  // max_t |F(t) - F(0)| / max(1, |F(0)|), per integral

  double overall() const {
    return max_rel_drift.size() ? max_rel_drift.maxCoeff() : 0.0;
  }
};

struct Trajectory {
  Parametersd params;
  ManifoldTyped manifold;
  std::vector<double> times;
  std::vector<PhaseStated> states;
  std::vector<double> sample_drift;  // per recorded sample, max over integrals
  DriftReport drift;
};

namespace detail {

// Hamilton's equations dq/dt = dH/dp, dp/dt = -dH/dq, written straight into
// the output buffer.
struct Flow {
  Parametersd par;
  ManifoldKind kind;
  Eigen::Index n;

  Flow(const Parametersd& p, ManifoldKind k) : par(p), kind(k), n(p.n_dim) {}

  void operator()(const VecXd& z, VecXd& dz) const {
    gradient_H(par, z.head(n), z.tail(n), kind, dz.tail(n), dz.head(n));
    dz.tail(n) *= -1.0;
  }
};

inline double inf_norm(const VecXd& v) { return v.lpNorm<Eigen::Infinity>(); }

class Stepper {
 public:
  Stepper(const Parametersd& par, ManifoldKind kind, const IntegratorConfig& cfg)
      : flow_(par, kind), cfg_(cfg), dim_(2 * par.n_dim) {
    k_.resize(dim_);
    y_.resize(dim_);
    mid_.resize(dim_);
    k1_.resize(dim_);
    k2_.resize(dim_);
    g1_.resize(dim_);
    g2_.resize(dim_);
    for (auto& s : rk_) s.resize(dim_);
    ytmp_.resize(dim_);
    yerr_.resize(dim_);
    h_adaptive_ = cfg.dt;
  }

  // advances z in place by dt; t_end (the time being stepped to) is only
  // used to stamp domain-exit reports
  void advance(VecXd& z, double t_end, double dt) {
    try {
      switch (cfg_.scheme) {
        case Scheme::ImplicitMidpoint: midpoint(z, dt); break;
        case Scheme::Gauss4: gauss4(z, dt); break;
        case Scheme::RkAdaptive: rk45(z, dt); break;
      }
    } catch (const DomainError& e) {
      throw DomainExitError(std::string("step left the manifold domain: ") + e.what(), t_end);
    }
  }

 private:
  void midpoint(VecXd& z, double dt) {
    const double tol = cfg_.fixed_point_tol * std::max(1.0, inf_norm(z));
    y_ = z;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg_.max_fixed_point_iters; ++it) {
      mid_ = 0.5 * (z + y_);
      flow_(mid_, k_);
      mid_ = z + dt * k_;  // reuse as the new iterate
      const double delta = inf_norm(mid_ - y_);
      y_.swap(mid_);
      if (delta <= tol) {
        z = y_;
        return;
      }
      // stalled at roundoff
      if (delta >= prev && delta <= 1e3 * tol) {
        z = y_;
        return;
      }
      prev = delta;
    }
    throw ConvergenceError("implicit midpoint: fixed-point iteration did not converge");
  }

  void gauss4(VecXd& z, double dt) {
    static const double s3 = std::sqrt(3.0);
    const double a11 = 0.25, a12 = 0.25 - s3 / 6.0;
    const double a21 = 0.25 + s3 / 6.0, a22 = 0.25;
    const double tol = cfg_.fixed_point_tol * std::max(1.0, inf_norm(z));
    flow_(z, k1_);
    k2_ = k1_;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg_.max_fixed_point_iters; ++it) {
      g1_ = z + dt * (a11 * k1_ + a12 * k2_);
      g2_ = z + dt * (a21 * k1_ + a22 * k2_);
      flow_(g1_, y_);
      flow_(g2_, mid_);
      const double delta = dt * std::max(inf_norm(y_ - k1_), inf_norm(mid_ - k2_));
      k1_.swap(y_);
      k2_.swap(mid_);
      if (delta <= tol || (delta >= prev && delta <= 1e3 * tol)) {
        z += dt * 0.5 * (k1_ + k2_);
        return;
      }
      prev = delta;
    }
    throw ConvergenceError("gauss4: fixed-point iteration did not converge");
  }

  // Dormand-Prince 5(4) with standard step control; substeps until the
  // requested interval is covered.
  void rk45(VecXd& z, double dt) {
    static const double a[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double e[7] = {35.0 / 384 - 5179.0 / 57600,
                                0,
                                500.0 / 1113 - 7571.0 / 16695,
                                125.0 / 192 - 393.0 / 640,
                                -2187.0 / 6784 + 92097.0 / 339200,
                                11.0 / 84 - 187.0 / 2100,
                                -1.0 / 40};
    double remaining = dt;
    double h = std::min(h_adaptive_, dt);
    int guard = 0;
    while (remaining > 0.0) {
      if (++guard > 100000) throw ConvergenceError("rk45: too many substeps");
      h = std::min(h, remaining);
      flow_(z, rk_[0]);
      bool accepted = false;
      while (!accepted) {
        for (int s = 1; s < 7; ++s) {
          ytmp_ = z;
          for (int j = 0; j < s; ++j)
            if (a[s][j] != 0.0) ytmp_ += (h * a[s][j]) * rk_[j];
          flow_(ytmp_, rk_[s]);
        }
        // stage 7 uses the 5th-order weights, so ytmp_ is the candidate
        yerr_.setZero();
        for (int s = 0; s < 7; ++s)
          if (e[s] != 0.0) yerr_ += (h * e[s]) * rk_[s];
        double err2 = 0.0;
        for (Eigen::Index i = 0; i < dim_; ++i) {
          const double sc =
              cfg_.abs_tol +
              cfg_.rel_tol * std::max(std::abs(z[i]), std::abs(ytmp_[i]));
          const double r = yerr_[i] / sc;
          err2 += r * r;
        }
        const double err = std::sqrt(err2 / static_cast<double>(dim_));
        if (err <= 1.0 || h <= 1e-14 * dt) {
          z = ytmp_;
          remaining -= h;
          accepted = true;
          h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 5.0);
        } else {
          h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9);
        }
      }
    }
    h_adaptive_ = std::max(h, 1e-14 * dt);
  }

  Flow flow_;
  IntegratorConfig cfg_;
  Eigen::Index dim_;
  VecXd k_, y_, mid_, k1_, k2_, g1_, g2_;
  VecXd rk_[7], ytmp_, yerr_;
  double h_adaptive_;
};

// Flat list of every monitored integral at a phase point.
inline std::vector<std::string> integral_labels(int n) {
  std::vector<std::string> labels;
  labels.push_back("H");
  for (int m = 2; m <= n; ++m) labels.push_back("C^(" + std::to_string(m) + ")");
  for (int m = 2; m <= n; ++m) labels.push_back("C_(" + std::to_string(m) + ")");
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      labels.push_back("I(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  return labels;
}

inline VecXd integral_values(const Parametersd& par, const VecXd& z,
                             ManifoldKind kind) {
  const Eigen::Index n = par.n_dim;
  PhaseStated s{z.head(n), z.tail(n)};
  const IntegralSetd set = evaluate_integral_set(par, s, kind);
  VecXd out(1 + 2 * (n - 1) + n * (n + 1) / 2);
  Eigen::Index at = 0;
  out[at++] = set.h;
  for (Eigen::Index k = 0; k < n - 1; ++k) out[at++] = set.c_upper[k];
  for (Eigen::Index k = 0; k < n - 1; ++k) out[at++] = set.c_lower[k];
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) out[at++] = set.fradkin(i, j);
  return out;
}

inline void check_inside(const Parametersd& par, const VecXd& z,
                         ManifoldKind kind, double t) {
  if (par.lambda >= 0.0) return;
  const double r = z.head(par.n_dim).norm();
  const double rc = critical_radius(par);
  if (std::abs(r - rc) < default_guard(par) ||
      (r < rc) != (kind == ManifoldKind::SphericalInterior))
    throw DomainExitError("trajectory crossed the critical-radius guard", t);
}

}  // namespace detail

// One integration step.
inline PhaseStated step(const Parametersd& par, const PhaseStated& s,
                        const IntegratorConfig& cfg, ManifoldKind kind) {
  validate_domain(par, s.q, kind);
  detail::Stepper stepper(par, kind, cfg);
  VecXd z(2 * par.n_dim);
  z.head(par.n_dim) = s.q;
  z.tail(par.n_dim) = s.p;
  stepper.advance(z, cfg.dt, cfg.dt);
  detail::check_inside(par, z, kind, cfg.dt);
  return {z.head(par.n_dim), z.tail(par.n_dim)};
}

inline PhaseStated step(const Parametersd& par, const PhaseStated& s,
                        const IntegratorConfig& cfg) {
  return step(par, s, cfg, classify_manifold(par, s.q).kind);
}

inline Trajectory integrate(const Parametersd& par, const PhaseStated& s0,
                            double t_end, const IntegratorConfig& cfg,
                            ManifoldKind kind) {
  if (!(t_end > 0.0)) throw ParameterError("integrate: t_end must be > 0");
  if (!(cfg.dt > 0.0)) throw ParameterError("integrate: dt must be > 0");
  validate_domain(par, s0.q, kind);

  Trajectory traj;
  traj.params = par;
  traj.manifold.kind = kind;
  if (par.lambda < 0.0) traj.manifold.r_c = critical_radius(par);
  traj.drift.labels = detail::integral_labels(par.n_dim);

  const Eigen::Index n = par.n_dim;
  VecXd z(2 * n);
  z.head(n) = s0.q;
  z.tail(n) = s0.p;

  const VecXd f0 = detail::integral_values(par, z, kind);
  VecXd fmax = VecXd::Zero(f0.size());
  VecXd scale(f0.size());
  for (Eigen::Index i = 0; i < f0.size(); ++i)
    scale[i] = std::max(1.0, std::abs(f0[i]));

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back({z.head(n), z.tail(n)});
    const VecXd f = detail::integral_values(par, z, kind);
    const VecXd rel = ((f - f0).array().abs() / scale.array()).matrix();
    fmax = fmax.cwiseMax(rel);
    traj.sample_drift.push_back(rel.maxCoeff());
  };

  record(0.0);
  detail::Stepper stepper(par, kind, cfg);
  const long n_steps = static_cast<long>(std::ceil(t_end / cfg.dt - 1e-9));
  const int stride = std::max(1, cfg.output_stride);
  for (long i = 1; i <= n_steps; ++i) {
    const double t_prev = (i - 1) * cfg.dt;
    const double t_next = std::min(i * cfg.dt, t_end);
    stepper.advance(z, t_next, t_next - t_prev);
    detail::check_inside(par, z, kind, t_next);
    if (i % stride == 0 || i == n_steps) record(t_next);
  }
  traj.drift.max_rel_drift = fmax;
  return traj;
}

inline Trajectory integrate(const Parametersd& par, const PhaseStated& s0,
                            double t_end, const IntegratorConfig& cfg) {
  return integrate(par, s0, t_end, cfg, classify_manifold(par, s0.q).kind);
}

struct OrbitDiagnostics {
  double radial_period = 0.0;
  double angular_advance = 0.0;   // |Delta phi| of the in-plane angle per T_r
  double closure_residual = 0.0;  // min_k || z(t0 + k T_r) - z(t0) ||
  int closure_k = 0;
  int pericenter_count = 0;
  bool circular = false;
};

namespace detail {

// 3-point quadratic interpolation of a sampled scalar series.
class SeriesInterp {
 public:
  SeriesInterp(const std::vector<double>& t, std::vector<double> v)
      : t_(t), v_(std::move(v)) {}

  double operator()(double t) const {
    const auto& ts = t_;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    Eigen::Index i = std::distance(ts.begin(), it);
    i = std::clamp<Eigen::Index>(i, 1, static_cast<Eigen::Index>(ts.size()) - 2);
    const double t0 = ts[i - 1], t1 = ts[i], t2 = ts[i + 1];
    const double l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    const double l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    const double l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    return v_[i - 1] * l0 + v_[i] * l1 + v_[i + 1] * l2;
  }

 private:
  const std::vector<double>& t_;
  std::vector<double> v_;
};

// vertex of the parabola through three samples
inline double parabola_vertex(double t0, double y0, double t1, double y1,
                              double t2, double y2) {
  const double d1 = (y1 - y0) / (t1 - t0);
  const double d2 = (y2 - y1) / (t2 - t1);
  const double curv = (d2 - d1) / (t2 - t0);
  if (curv == 0.0) return t1;
  return std::clamp(0.5 * (t0 + t1 - d1 / curv), t0, t2);
}

}  // namespace detail

// Radial period from successive pericenters (sign change of q.p with local
// quadratic refinement of r(t)), in-plane angular advance per period, and
// the recurrence residual min_k ||z(t0 + k T_r) - z(t0)||. Circular orbits
// (radial amplitude below detection) fall back to the angular revolution
// period. Throws UnboundOrbitError when no pericenter structure exists.
inline OrbitDiagnostics orbit_diagnostics(const Trajectory& traj, int k_max = 64) {
  const auto& times = traj.times;
  const auto& states = traj.states;
  const std::size_t n = times.size();
  if (n < 5) throw UnboundOrbitError("orbit_diagnostics: trajectory too short");

  std::vector<double> r(n), qdotp(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = states[i].q.norm();
    qdotp[i] = states[i].q.dot(states[i].p);
  }
  const double rmin = *std::min_element(r.begin(), r.end());
  const double rmax = *std::max_element(r.begin(), r.end());

  // in-plane angle against the (q0, p0) frame; the motion conserves all
  // angular-momentum blocks, so it stays in that plane
  const VecXd e1 = states[0].q.normalized();
  VecXd w = states[0].p - states[0].p.dot(e1) * e1;
  const bool have_plane = w.norm() > 1e-12;
  std::vector<double> phi(n, 0.0);
  if (have_plane) {
    const VecXd e2 = w.normalized();
    double prev = std::atan2(states[0].q.dot(e2), states[0].q.dot(e1));
    phi[0] = prev;
    for (std::size_t i = 1; i < n; ++i) {
      const double raw = std::atan2(states[i].q.dot(e2), states[i].q.dot(e1));
      double d = raw - prev;
      while (d > 3.14159265358979323846) d -= 2 * 3.14159265358979323846;
      while (d < -3.14159265358979323846) d += 2 * 3.14159265358979323846;
      phi[i] = phi[i - 1] + d;
      prev = raw;
    }
  }
  detail::SeriesInterp phi_interp(times, phi);

  auto state_at = [&](double t) {
    const Eigen::Index dim = states[0].q.size();
    VecXd z(2 * dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      std::vector<double> comp_q(n), comp_p(n);
      for (std::size_t i = 0; i < n; ++i) {
        comp_q[i] = states[i].q[c];
        comp_p[i] = states[i].p[c];
      }
      z[c] = detail::SeriesInterp(times, std::move(comp_q))(t);
      z[dim + c] = detail::SeriesInterp(times, std::move(comp_p))(t);
    }
    return z;
  };

  OrbitDiagnostics diag;

  const double r_scale = std::max(1.0, 0.5 * (rmin + rmax));
  if (rmax - rmin <= 1e-5 * r_scale) {
    // circular: report the angular revolution period instead
    if (!have_plane) throw UnboundOrbitError("orbit_diagnostics: degenerate circular data");
    const double omega_phi = (phi[n - 1] - phi[0]) / (times[n - 1] - times[0]);
    if (std::abs(omega_phi) < 1e-12)
      throw UnboundOrbitError("orbit_diagnostics: no angular motion");
    diag.circular = true;
    diag.radial_period = 2 * 3.14159265358979323846 / std::abs(omega_phi);
    diag.angular_advance = 2 * 3.14159265358979323846;
    const double t0 = times[0];
    if (t0 + diag.radial_period <= times[n - 1]) {
      VecXd z0 = state_at(t0);
      diag.closure_residual = (state_at(t0 + diag.radial_period) - z0).norm();
      diag.closure_k = 1;
    }
    return diag;
  }

  std::vector<double> peri;
  for (std::size_t i = 1; i + 2 < n; ++i) {
    if (qdotp[i] < 0.0 && qdotp[i + 1] >= 0.0) {
      std::size_t j = r[i] <= r[i + 1] ? i : i + 1;
      j = std::clamp<std::size_t>(j, 1, n - 2);
      peri.push_back(detail::parabola_vertex(times[j - 1], r[j - 1], times[j],
                                             r[j], times[j + 1], r[j + 1]));
    }
  }
  if (peri.size() < 3)
    throw UnboundOrbitError("orbit_diagnostics: fewer than 3 pericenter passages");

  diag.pericenter_count = static_cast<int>(peri.size());
  diag.radial_period = (peri.back() - peri.front()) / static_cast<double>(peri.size() - 1);
  if (have_plane)
    diag.angular_advance = std::abs(phi_interp(peri.back()) - phi_interp(peri.front())) /
                           static_cast<double>(peri.size() - 1);

  const double t0 = peri.front();
  const VecXd z0 = state_at(t0);
  const int k_avail = static_cast<int>((times[n - 1] - t0) / diag.radial_period);
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 1; k <= std::min(k_max, k_avail); ++k) {
    const double d = (state_at(t0 + k * diag.radial_period) - z0).norm();
    if (d < best) {
      best = d;
      best_k = k;
    }
  }
  if (best_k == 0) throw UnboundOrbitError("orbit_diagnostics: trajectory shorter than one radial period");
  diag.closure_residual = best;
  diag.closure_k = best_k;
  return diag;
}

}  // namespace losc
