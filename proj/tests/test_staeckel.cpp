#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "losc/integrals.hpp"
#include "losc/model.hpp"
#include "losc/sampling.hpp"
#include "losc/staeckel.hpp"
#include "test_util.hpp"

using namespace losc;

namespace {

Parametersd params(double lambda, double omega = 1.0, int n = 3) {
  Parametersd par;
  par.lambda = lambda;
  par.omega = omega;
  par.n_dim = n;
  return par;
}

}  // namespace

TEST_CASE("staeckel transform: identity under U = 1") {
  NaturalHamiltonian h;
  h.mu = constant_field(2.0);
  h.v.value = [](const VecXd& q) { return q.squaredNorm(); };
  h.v.gradient = [](const VecXd& q) { return VecXd(2.0 * q); };
  auto out = staeckel_transform(h, constant_field(1.0));
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    VecXd q = rng.uniform(0.1, 2.0) * rng.on_sphere(3);
    VecXd p = rng.uniform(0.1, 2.0) * rng.on_sphere(3);
    CHECK(out.value(q, p) == doctest::Approx(h.value(q, p)).epsilon(1e-15));
    CHECK(out.mu.value(q) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK((out.v.gradient(q) - h.v.gradient(q)).norm() < 1e-14);
  }
}

TEST_CASE("oscillator instance: alpha, intermediate constant, field shapes") {
  auto par = params(0.02, 1.0, 3);
  auto inst = make_oscillator_instance(par);
  CHECK(inst.alpha == doctest::Approx(25.0).epsilon(1e-15));

  VecXd zero = VecXd::Zero(3);
  CHECK(inst.h_intermediate.value(zero, zero) == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    VecXd q = rng.uniform(0.1, 3.0) * rng.on_sphere(3);
    // mu~ = 2 (1 + lambda q^2), V~ = -alpha / (1 + lambda q^2)
    const double u = 1.0 + par.lambda * q.squaredNorm();
    CHECK(inst.h_final.mu.value(q) == doctest::Approx(2.0 * u).epsilon(1e-14));
    CHECK(inst.h_final.v.value(q) == doctest::Approx(-inst.alpha / u).epsilon(1e-14));
  }

  CHECK_THROWS_AS(make_oscillator_instance(params(0.0)), FlatLimitError);
}

TEST_CASE("oscillator instance: H~ = H/U pointwise and H~ + alpha = H_lambda") {
  Rng rng(3);
  for (auto [lam, kind] : {std::pair{0.02, ManifoldKind::Hyperbolic},
                           std::pair{-0.02, ManifoldKind::SphericalInterior}}) {
    auto par = params(lam, 1.0, 3);
    auto inst = make_oscillator_instance(par);
    for (int i = 0; i < 100; ++i) {
      PhaseStated s = sample_generic_state(par, kind, rng);
      const double u = inst.u.value(s.q);
      const double h_init = inst.h_init.value(s.q, s.p);
      const double h_tilde = inst.h_final.value(s.q, s.p);
      CHECK(h_tilde == doctest::Approx(h_init / u).epsilon(1e-13));
      const double h_lambda = evaluate_H(par, s, kind);
      CHECK(h_tilde + inst.alpha ==
            doctest::Approx(h_lambda).epsilon(1e-12).scale(std::max(1.0, std::abs(h_lambda))));
    }
  }
}

TEST_CASE("staeckel transform rejects U <= 0") {
  auto par = params(-0.02, 1.0, 2);
  auto inst = make_oscillator_instance(par);
  VecXd q(2), p(2);
  q << 10.0, 0.0;  // outside the ball: U = 1 - 0.02*100 < 0
  p << 0.0, 1.0;
  CHECK_THROWS_AS(inst.h_final.value(q, p), DomainError);
}

TEST_CASE("transported symmetries: closed forms of the two families") {
  auto par = params(0.02, 1.0, 3);
  auto inst = make_oscillator_instance(par);
  Rng rng(5);
  for (int it = 0; it < 100; ++it) {
    PhaseStated s = sample_generic_state(par, ManifoldKind::Hyperbolic, rng);
    const double ht = inst.h_final.value(s.q, s.p);
    auto [up, lo] = angular_blocks(s.q, s.p);
    const double scale = std::max(1.0, std::abs(ht) + up.maxCoeff());
    for (const auto& sym : inst.symmetries) {
      PhaseFunction st = transform_symmetry(sym, inst.h_final, inst.u);
      const double val = st.value(s.q, s.p);
      if (sym.s0.label.rfind("C^(", 0) == 0) {
        const int m = std::stoi(sym.s0.label.substr(3));
        // S~ = C^(m) + H~
        CHECK(std::abs(val - (up[m - 2] + ht)) <= 1e-12 * scale);
      } else if (sym.s0.label.rfind("C_(", 0) == 0) {
        const int m = std::stoi(sym.s0.label.substr(3));
        CHECK(std::abs(val - (lo[m - 2] + ht)) <= 1e-12 * scale);
      } else {
        // S~_ij = p_i p_j - 2 lambda q_i q_j H~ + H~
        const int i = sym.s0.label[2] - '1';
        const int j = sym.s0.label[4] - '1';
        const double expect =
            s.p[i] * s.p[j] - 2.0 * par.lambda * s.q[i] * s.q[j] * ht + ht;
        CHECK(std::abs(val - expect) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("transported momenta symmetries rebuild the fradkin tensor") {
  Rng rng(7);
  for (auto [lam, kind] : {std::pair{0.02, ManifoldKind::Hyperbolic},
                           std::pair{-0.02, ManifoldKind::SphericalInterior}}) {
    auto par = params(lam, 1.0, 3);
    auto inst = make_oscillator_instance(par);
    for (int it = 0; it < 100; ++it) {
      PhaseStated s = sample_generic_state(par, kind, rng);
      const double ht = inst.h_final.value(s.q, s.p);
      MatXd frad = fradkin_tensor(par, s.q, s.p, kind);
      for (const auto& sym : inst.symmetries) {
        if (sym.s0.label.rfind("S(", 0) != 0) continue;
        const int i = sym.s0.label[2] - '1';
        const int j = sym.s0.label[4] - '1';
        PhaseFunction st = transform_symmetry(sym, inst.h_final, inst.u);
        // I_ij = S~_ij - H~ after the constant shift H~ = H_lambda - alpha
        const double recon = st.value(s.q, s.p) - ht;
        CHECK(std::abs(recon - frad(i, j)) <=
              1e-12 * std::max(1.0, std::abs(frad(i, j))));
      }
    }
  }
}

TEST_CASE("transported symmetries commute with H~ (analytic gradients)") {
  Rng rng(11);
  for (auto [lam, kind] : {std::pair{0.02, ManifoldKind::Hyperbolic},
                           std::pair{-0.02, ManifoldKind::SphericalInterior}}) {
    auto par = params(lam, 1.0, 3);
    auto inst = make_oscillator_instance(par);
    PhaseFunction ht = inst.h_final.as_phase_function("H~");
    std::vector<PhaseFunction> transported;
    for (const auto& sym : inst.symmetries)
      transported.push_back(transform_symmetry(sym, inst.h_final, inst.u));

    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      PhaseStated s = sample_generic_state(par, kind, rng);
      for (const auto& st : transported)
        worst = std::max(worst, std::abs(poisson_bracket(ht, st, s)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("involution is preserved by the transport") {
  auto par = params(0.02, 1.0, 4);
  auto inst = make_oscillator_instance(par);
  // the ascending angular family is in involution before and after
  std::vector<PhaseFunction> before, after;
  for (const auto& sym : inst.symmetries) {
    if (sym.s0.label.rfind("C^(", 0) != 0) continue;
    before.push_back(sym.s0);
    after.push_back(transform_symmetry(sym, inst.h_final, inst.u));
  }
  Rng rng(13);
  double worst = 0.0;
  for (int it = 0; it < 50; ++it) {
    PhaseStated s = sample_generic_state(par, ManifoldKind::Hyperbolic, rng);
    for (std::size_t a = 0; a < before.size(); ++a)
      for (std::size_t b = a + 1; b < before.size(); ++b) {
        worst = std::max(worst, std::abs(poisson_bracket(before[a], before[b], s)));
        worst = std::max(worst, std::abs(poisson_bracket(after[a], after[b], s)));
      }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("symmetry coefficient matrices are symmetric at sample points") {
  auto par = params(0.02, 1.0, 3);
  auto inst = make_oscillator_instance(par);
  Rng rng(17);
  for (int it = 0; it < 10; ++it) {
    PhaseStated s = sample_generic_state(par, ManifoldKind::Hyperbolic, rng);
    for (const auto& sym : inst.symmetries) {
      MatXd a = sym.coeff(s.q);
      CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-14);
      // and a^{ij} p_i p_j reproduces the momentum part
      CHECK(s.p.dot(a * s.p) ==
            doctest::Approx(sym.s0.value(s.q, s.p)).epsilon(1e-12));
    }
  }
}
