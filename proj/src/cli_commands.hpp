#pragma once

// Command implementations behind the `losc` executable. Each run_* function
// validates its options, produces the command's files/tables and returns the
// process exit code: 0 on success, 1 on numeric failures (domain exit,
// non-convergence, tolerance violations), 2 on configuration errors.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace losc::cli {

struct CommonOptions {
  double lambda = 0.02;
  double omega = 1.0;
  int n_dim = 3;
  double hbar = 1.0;
  std::uint64_t seed = 1;
  std::string out;             // empty -> stdout (table commands) or default file
  std::string format = "csv";  // csv | json (report/table commands)
};

struct SimulateOptions {
  CommonOptions common;
  std::vector<double> q0, p0;
  double t_end = 10.0;
  double dt = 1e-3;
  std::string scheme = "gauss4";  // midpoint | gauss4 | rk45
  int stride = 1;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

struct VerifyOptions {
  CommonOptions common;
  int samples = 100;
  std::string manifold = "auto";  // auto | hyperbolic | spherical | exterior | flat
  double tol_bracket = 1e-9;
  double rank_rel_threshold = 1e-10;
};

struct PotentialOptions {
  CommonOptions common;
  double c_n = 100.0;
  std::string kind = "auto";
  double r_start = -1.0;  // negative -> kind-specific default grid
  double r_end = -1.0;
  int steps = 200;
  std::string preset;  // fig1-hyperbolic | fig1-spherical | fig1-flat | fig2-exterior
};

struct CurvatureOptions {
  CommonOptions common;
  std::string kind = "auto";
  double r_start = -1.0;
  double r_end = -1.0;
  int steps = 200;
};

struct SpectrumOptions {
  CommonOptions common;
  long n_levels = 32;
};

struct StaeckelOptions {
  CommonOptions common;
  int samples = 100;
  std::string manifold = "auto";
  double tol_bracket = 1e-9;
  double tol_identity = 1e-12;
};

int run_simulate(const SimulateOptions& opt, std::ostream& log);
int run_verify(const VerifyOptions& opt, std::ostream& log);
int run_effective_potential(const PotentialOptions& opt, std::ostream& log);
int run_curvature(const CurvatureOptions& opt, std::ostream& log);
int run_spectrum(const SpectrumOptions& opt, std::ostream& log);
int run_staeckel_check(const StaeckelOptions& opt, std::ostream& log);

}  // namespace losc::cli
