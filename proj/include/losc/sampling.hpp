#pragma once

// Seeded, fully reproducible random phase states. Uniform deviates come
// straight from mt19937_64 bits and normals from Box-Muller, so identical
// seeds give identical streams on every platform.

#include <cmath>
#include <cstdint>
#include <random>

#include "losc/model.hpp"
#include "losc/types.hpp"

namespace losc {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1)
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  VecXd on_sphere(Eigen::Index n) {
    VecXd v(n);
    double norm2 = 0.0;
    do {
      for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
      norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    return v / std::sqrt(norm2);
  }

 private:
  std::mt19937_64 gen_;
};

struct SampleWindow {
  double r_lo, r_hi;  // |q| annulus
  double p_lo, p_hi;  // |p| shell
};

// Annulus in q avoiding both the origin and the critical radius, shell in p:
// keeps samples away from the measure-zero degeneracies of the integral set.
inline SampleWindow default_window(const Parametersd& par, ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::SphericalInterior: {
      const double rc = critical_radius(par);
      return {0.15 * rc, 0.85 * rc, 0.5, 2.0};
    }
    case ManifoldKind::Exterior: {
      const double rc = critical_radius(par);
      return {1.15 * rc, 2.5 * rc, 0.5, 2.0};
    }
    case ManifoldKind::Flat:
    case ManifoldKind::Hyperbolic:
      return {0.5, 3.0, 0.5, 2.0};
  }
  return {0.5, 3.0, 0.5, 2.0};
}

inline PhaseStated sample_generic_state(const Parametersd& par,
                                        ManifoldKind kind, Rng& rng) {
  const SampleWindow w = default_window(par, kind);
  PhaseStated s;
  s.q = rng.uniform(w.r_lo, w.r_hi) * rng.on_sphere(par.n_dim);
  s.p = rng.uniform(w.p_lo, w.p_hi) * rng.on_sphere(par.n_dim);
  return s;
}

}  // namespace losc
