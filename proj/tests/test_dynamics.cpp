#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "losc/dynamics.hpp"
#include "losc/radial.hpp"
#include "losc/sampling.hpp"
#include "test_util.hpp"

using namespace losc;

namespace {

constexpr double kPi = 3.14159265358979323846;

Parametersd params(double lambda, double omega = 1.0, int n = 2) {
  Parametersd par;
  par.lambda = lambda;
  par.omega = omega;
  par.n_dim = n;
  return par;
}

PhaseStated state2(double q1, double q2, double p1, double p2) {
  PhaseStated s;
  s.q.resize(2);
  s.p.resize(2);
  s.q << q1, q2;
  s.p << p1, p2;
  return s;
}

IntegratorConfig config(Scheme sch, double dt, int stride = 1) {
  IntegratorConfig cfg;
  cfg.scheme = sch;
  cfg.dt = dt;
  cfg.output_stride = stride;
  return cfg;
}

// closed-form flow of the flat isotropic oscillator
PhaseStated harmonic_flow(const Parametersd& par, const PhaseStated& s0, double t) {
  PhaseStated s;
  const double w = par.omega;
  s.q = s0.q * std::cos(w * t) + s0.p * (std::sin(w * t) / w);
  s.p = s0.p * std::cos(w * t) - s0.q * (w * std::sin(w * t));
  return s;
}

}  // namespace

TEST_CASE("flat limit: midpoint tracks the closed-form oscillator") {
  auto par = params(0.0);
  PhaseStated s0 = state2(1, 0, 0, 0);
  auto traj = integrate(par, s0, 10.0, config(Scheme::ImplicitMidpoint, 1e-3, 100),
                        ManifoldKind::Flat);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    PhaseStated ref = harmonic_flow(par, s0, traj.times[i]);
    const double err = std::max((traj.states[i].q - ref.q).cwiseAbs().maxCoeff(),
                                (traj.states[i].p - ref.p).cwiseAbs().maxCoeff());
    CHECK(err <= 1e-6 * std::max(1.0, traj.times[i]));
  }
}

TEST_CASE("flat limit: gauss4 and rk45 reproduce a generic ellipse") {
  auto par = params(0.0, 1.3);
  PhaseStated s0 = state2(1.1, -0.4, 0.3, 0.9);
  for (auto sch : {Scheme::Gauss4, Scheme::RkAdaptive}) {
    auto cfg = config(sch, 1e-2, 10);
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    auto traj = integrate(par, s0, 10.0, cfg, ManifoldKind::Flat);
    PhaseStated ref = harmonic_flow(par, s0, traj.times.back());
    CHECK((traj.states.back().q - ref.q).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((traj.states.back().p - ref.p).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("implicit midpoint is time-reversible to 1e-10") {
  auto par = params(0.02);
  PhaseStated s0 = state2(1.4, 0.2, -0.3, 1.0);
  auto cfg = config(Scheme::ImplicitMidpoint, 5e-3);
  cfg.fixed_point_tol = 1e-15;
  PhaseStated fwd = step(par, s0, cfg, ManifoldKind::Hyperbolic);
  fwd.p = -fwd.p;
  PhaseStated back = step(par, fwd, cfg, ManifoldKind::Hyperbolic);
  back.p = -back.p;
  CHECK((back.q - s0.q).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((back.p - s0.p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("circular initial data stays on the analytic circle") {
  auto par = params(0.02);
  const double c = 100.0;
  const double rm = potential_minimum(par, c, ManifoldKind::Hyperbolic)->r_min;
  PhaseStated s0 = state2(rm, 0, 0, std::sqrt(c) / rm);
  auto traj = integrate(par, s0, 20.0, config(Scheme::Gauss4, 1e-3, 50),
                        ManifoldKind::Hyperbolic);
  double worst = 0.0;
  for (const auto& s : traj.states)
    worst = std::max(worst, std::abs(s.q.norm() - rm));
  CHECK(worst < 1e-8);
}

TEST_CASE("symplectic schemes: energy error amplitude scales as dt^2 / dt^4") {
  auto par = params(0.02);
  PhaseStated s0 = state2(2.5, 0, 0, 1.0);
  auto amplitude = [&](Scheme sch, double dt) {
    auto traj = integrate(par, s0, 10.0, config(sch, dt, 5), ManifoldKind::Hyperbolic);
    const double h0 = evaluate_H(par, traj.states.front(), ManifoldKind::Hyperbolic);
    double amp = 0.0;
    for (const auto& s : traj.states)
      amp = std::max(amp, std::abs(evaluate_H(par, s, ManifoldKind::Hyperbolic) - h0));
    return amp;
  };
  const double m1 = amplitude(Scheme::ImplicitMidpoint, 0.01);
  const double m2 = amplitude(Scheme::ImplicitMidpoint, 0.005);
  CHECK(m1 / m2 > 3.0);
  CHECK(m1 / m2 < 5.0);
  const double g1 = amplitude(Scheme::Gauss4, 0.05);
  const double g2 = amplitude(Scheme::Gauss4, 0.025);
  CHECK(g1 / g2 > 10.0);
  CHECK(g1 / g2 < 22.0);
}

TEST_CASE("no secular drift: every integral conserved along the flow") {
  // one bound orbit per manifold kind, the full integral set
  Rng rng(7);
  for (auto [lam, kind] : {std::pair{0.02, ManifoldKind::Hyperbolic},
                           std::pair{-0.02, ManifoldKind::SphericalInterior},
                           std::pair{-0.02, ManifoldKind::Exterior},
                           std::pair{0.0, ManifoldKind::Flat}}) {
    auto par = params(lam, 1.0, 3);
    PhaseStated s0 = sample_generic_state(par, kind, rng);
    auto traj = integrate(par, s0, 10.0, config(Scheme::Gauss4, 1e-3, 100), kind);
    INFO("kind = ", to_string(kind));
    CHECK(traj.drift.overall() <= 1e-8);
  }
}

TEST_CASE("long hyperbolic run: energy drift at the 1e-10 level") {
  auto par = params(0.02, 1.0, 3);
  Rng rng(12);
  PhaseStated s0 = sample_generic_state(par, ManifoldKind::Hyperbolic, rng);
  auto traj = integrate(par, s0, 100.0, config(Scheme::Gauss4, 1e-3, 1000),
                        ManifoldKind::Hyperbolic);
  CHECK(traj.drift.max_rel_drift[0] <= 1e-10);  // H is the first label
  CHECK(traj.drift.overall() <= 1e-8);
  CHECK(traj.drift.labels.size() ==
        static_cast<std::size_t>(traj.drift.max_rel_drift.size()));
}

TEST_CASE("leaving the interior domain raises DomainExitError with the time") {
  auto par = params(-0.02);
  // large outward momentum and a coarse step jump the barrier numerically
  PhaseStated s0 = state2(6.9, 0, 50.0, 0);
  auto cfg = config(Scheme::ImplicitMidpoint, 1.0);
  bool thrown = false;
  try {
    integrate(par, s0, 5.0, cfg, ManifoldKind::SphericalInterior);
  } catch (const DomainExitError& e) {
    thrown = true;
    CHECK(e.t_exit > 0.0);
    CHECK(e.t_exit <= 5.0);
  }
  CHECK(thrown);

  // a state inside the guard band is rejected before the first step
  PhaseStated s_guard = state2(critical_radius(par), 0, 0, 0.1);
  CHECK_THROWS_AS(integrate(par, s_guard, 1.0, cfg), SingularityError);
}

TEST_CASE("orbit diagnostics: flat ellipse has advance pi and recurs at k = 2") {
  auto par = params(0.0);
  PhaseStated s0 = state2(1.0, 0, 0.2, 0.7);
  auto traj = integrate(par, s0, 25.0, config(Scheme::Gauss4, 1e-3, 2),
                        ManifoldKind::Flat);
  auto diag = orbit_diagnostics(traj);
  CHECK(diag.radial_period == doctest::Approx(kPi).epsilon(1e-6));
  CHECK(diag.angular_advance == doctest::Approx(kPi).epsilon(1e-5));
  CHECK(diag.closure_k == 2);  // after one radial period the state is -z
  CHECK(diag.closure_residual < 1e-6);
  CHECK_FALSE(diag.circular);
  CHECK(diag.pericenter_count >= 3);
}

TEST_CASE("orbit diagnostics: deformed bound orbit closes within 64 periods") {
  auto par = params(0.02);
  PhaseStated s0 = state2(1.2, 0.3, -0.2, 1.1);
  auto traj = integrate(par, s0, 30.0, config(Scheme::Gauss4, 1e-3, 2),
                        ManifoldKind::Hyperbolic);
  auto diag = orbit_diagnostics(traj);
  CHECK(diag.closure_k <= 64);
  CHECK(diag.closure_residual <= 1e-4);
}

TEST_CASE("orbit diagnostics: circular fallback and unbound detection") {
  auto par = params(0.02);
  const double c = 100.0;
  const double rm = potential_minimum(par, c, ManifoldKind::Hyperbolic)->r_min;
  PhaseStated circ = state2(rm, 0, 0, std::sqrt(c) / rm);
  auto traj = integrate(par, circ, 40.0, config(Scheme::Gauss4, 2e-3, 2),
                        ManifoldKind::Hyperbolic);
  auto diag = orbit_diagnostics(traj);
  CHECK(diag.circular);
  CHECK(diag.radial_period > 0.0);
  CHECK(diag.closure_residual < 1e-5);

  // energy above the potential plateau: the orbit escapes, r grows forever
  PhaseStated esc = state2(0.1, 0, 8.0, 0);
  auto traj2 = integrate(par, esc, 20.0, config(Scheme::Gauss4, 1e-3, 10),
                         ManifoldKind::Hyperbolic);
  CHECK_THROWS_AS(orbit_diagnostics(traj2), UnboundOrbitError);
}

TEST_CASE("orbit diagnostics: radial line orbit through the origin") {
  auto par = params(0.0);
  PhaseStated s0 = state2(1.0, 0, 0, 0);  // oscillates through q = 0
  auto traj = integrate(par, s0, 20.0, config(Scheme::Gauss4, 1e-3, 2),
                        ManifoldKind::Flat);
  auto diag = orbit_diagnostics(traj);
  CHECK(diag.radial_period == doctest::Approx(kPi).epsilon(1e-4));
  CHECK(diag.closure_residual < 1e-4);
}

TEST_CASE("rk45 resolves the stiff bounce off the interior barrier") {
  auto par = params(-0.02);
  // H = 34 turns around at r ~ 5.4, well inside r_c ~ 7.07
  PhaseStated s0 = state2(5.0, 0, 3.0, 0.4);
  auto cfg = config(Scheme::RkAdaptive, 1e-2, 1);
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  auto traj = integrate(par, s0, 10.0, cfg, ManifoldKind::SphericalInterior);
  const double rc = critical_radius(par);
  const double h0 = evaluate_H(par, s0, ManifoldKind::SphericalInterior);
  for (const auto& s : traj.states) {
    CHECK(s.q.norm() < rc);
    CHECK(std::abs(evaluate_H(par, s, ManifoldKind::SphericalInterior) - h0) <
          1e-8 * h0);
  }
}

TEST_CASE("integrate rejects bad configuration") {
  auto par = params(0.02);
  PhaseStated s0 = state2(1, 0, 0, 1);
  CHECK_THROWS_AS(integrate(par, s0, -1.0, config(Scheme::Gauss4, 1e-3)),
                  ParameterError);
  auto cfg = config(Scheme::Gauss4, 0.0);
  CHECK_THROWS_AS(integrate(par, s0, 1.0, cfg), ParameterError);
}
