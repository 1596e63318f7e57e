// Command-line front end: simulate, verify, effective-potential, curvature,
// spectrum, staeckel-check. Flags take precedence over an optional JSON
// config file (--config); presets reproduce the reference potential profiles.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "../src/cli_commands.hpp"

namespace {

using nlohmann::json;
using namespace losc::cli;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  in >> j;
  return j;
}

template <typename T>
void from_cfg(CLI::App* cmd, const json& j, const std::string& flag,
              const std::string& key, T& var) {
  if (cmd->count(flag) == 0 && j.contains(key)) var = j.at(key).get<T>();
}

void add_common(CLI::App* cmd, CommonOptions& c, std::string& config_path) {
  cmd->add_option("--lambda", c.lambda, "deformation parameter");
  cmd->add_option("--omega", c.omega, "oscillator frequency (>= 0)");
  cmd->add_option("--n-dim", c.n_dim, "number of dimensions (>= 2)");
  cmd->add_option("--hbar", c.hbar, "Planck constant (> 0)");
  cmd->add_option("--seed", c.seed, "RNG seed (64-bit)");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--format", c.format, "output format: csv | json");
  cmd->add_option("--config", config_path, "JSON config file (flags win)");
}

void merge_common(CLI::App* cmd, const json& j, CommonOptions& c) {
  from_cfg(cmd, j, "--lambda", "lambda", c.lambda);
  from_cfg(cmd, j, "--omega", "omega", c.omega);
  from_cfg(cmd, j, "--n-dim", "n_dim", c.n_dim);
  from_cfg(cmd, j, "--hbar", "hbar", c.hbar);
  from_cfg(cmd, j, "--seed", "seed", c.seed);
  from_cfg(cmd, j, "--out", "out", c.out);
  from_cfg(cmd, j, "--format", "format", c.format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambda-deformed oscillator toolkit"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_cfg;
  CLI::App* c_sim = app.add_subcommand("simulate", "integrate a trajectory and write CSV");
  add_common(c_sim, sim.common, sim_cfg);
  c_sim->add_option("--q0", sim.q0, "initial coordinates (comma-separated)")->delimiter(',');
  c_sim->add_option("--p0", sim.p0, "initial momenta (comma-separated)")->delimiter(',');
  c_sim->add_option("--t-end", sim.t_end, "integration time");
  c_sim->add_option("--dt", sim.dt, "step size / output spacing");
  c_sim->add_option("--scheme", sim.scheme, "midpoint | gauss4 | rk45");
  c_sim->add_option("--stride", sim.stride, "record every k-th step");
  c_sim->add_option("--rel-tol", sim.rel_tol, "adaptive relative tolerance");
  c_sim->add_option("--abs-tol", sim.abs_tol, "adaptive absolute tolerance");

  VerifyOptions ver;
  std::string ver_cfg;
  CLI::App* c_ver = app.add_subcommand("verify", "bracket, involution and rank sweep");
  add_common(c_ver, ver.common, ver_cfg);
  c_ver->add_option("--samples", ver.samples, "number of sampled states");
  c_ver->add_option("--manifold", ver.manifold, "auto | hyperbolic | spherical | exterior | flat");
  c_ver->add_option("--tol-bracket", ver.tol_bracket, "bracket tolerance");
  c_ver->add_option("--rank-threshold", ver.rank_rel_threshold, "relative SVD threshold");

  PotentialOptions pot;
  std::string pot_cfg;
  CLI::App* c_pot = app.add_subcommand("effective-potential", "radial profile CSV + JSON sidecar");
  add_common(c_pot, pot.common, pot_cfg);
  c_pot->add_option("--c-n", pot.c_n, "total squared angular momentum");
  c_pot->add_option("--kind", pot.kind, "auto | hyperbolic | spherical | exterior | flat");
  c_pot->add_option("--r-start", pot.r_start, "grid start");
  c_pot->add_option("--r-end", pot.r_end, "grid end");
  c_pot->add_option("--steps", pot.steps, "grid points (>= 2)");
  c_pot->add_option("--preset", pot.preset,
                    "fig1-hyperbolic | fig1-spherical | fig1-flat | fig2-exterior");

  CurvatureOptions cur;
  std::string cur_cfg;
  CLI::App* c_cur = app.add_subcommand("curvature", "scalar curvature profile CSV + sidecar");
  add_common(c_cur, cur.common, cur_cfg);
  c_cur->add_option("--kind", cur.kind, "auto | hyperbolic | spherical | exterior | flat");
  c_cur->add_option("--r-start", cur.r_start, "grid start");
  c_cur->add_option("--r-end", cur.r_end, "grid end");
  c_cur->add_option("--steps", cur.steps, "grid points (>= 2)");

  SpectrumOptions spec;
  std::string spec_cfg;
  CLI::App* c_spec = app.add_subcommand("spectrum", "discrete level table");
  add_common(c_spec, spec.common, spec_cfg);
  c_spec->add_option("--n-levels", spec.n_levels, "number of levels");

  StaeckelOptions stk;
  std::string stk_cfg;
  CLI::App* c_stk = app.add_subcommand("staeckel-check",
                                       "transport-identity and bracket residuals");
  add_common(c_stk, stk.common, stk_cfg);
  c_stk->add_option("--samples", stk.samples, "number of sampled states");
  c_stk->add_option("--manifold", stk.manifold, "auto | hyperbolic | spherical");
  c_stk->add_option("--tol-bracket", stk.tol_bracket, "bracket tolerance");
  c_stk->add_option("--tol-identity", stk.tol_identity, "identity tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_sim) {
      if (!sim_cfg.empty()) {
        const json j = load_config(sim_cfg);
        merge_common(c_sim, j, sim.common);
        from_cfg(c_sim, j, "--q0", "q0", sim.q0);
        from_cfg(c_sim, j, "--p0", "p0", sim.p0);
        from_cfg(c_sim, j, "--t-end", "t_end", sim.t_end);
        from_cfg(c_sim, j, "--dt", "dt", sim.dt);
        from_cfg(c_sim, j, "--scheme", "scheme", sim.scheme);
        from_cfg(c_sim, j, "--stride", "stride", sim.stride);
      }
      return run_simulate(sim, std::cout);
    }
    if (*c_ver) {
      if (!ver_cfg.empty()) {
        const json j = load_config(ver_cfg);
        merge_common(c_ver, j, ver.common);
        from_cfg(c_ver, j, "--samples", "samples", ver.samples);
        from_cfg(c_ver, j, "--manifold", "manifold", ver.manifold);
        from_cfg(c_ver, j, "--tol-bracket", "tol_bracket", ver.tol_bracket);
      }
      return run_verify(ver, std::cout);
    }
    if (*c_pot) {
      if (!pot_cfg.empty()) {
        const json j = load_config(pot_cfg);
        merge_common(c_pot, j, pot.common);
        from_cfg(c_pot, j, "--c-n", "c_n", pot.c_n);
        from_cfg(c_pot, j, "--kind", "kind", pot.kind);
        from_cfg(c_pot, j, "--r-start", "r_start", pot.r_start);
        from_cfg(c_pot, j, "--r-end", "r_end", pot.r_end);
        from_cfg(c_pot, j, "--steps", "steps", pot.steps);
        from_cfg(c_pot, j, "--preset", "preset", pot.preset);
      }
      return run_effective_potential(pot, std::cout);
    }
    if (*c_cur) {
      if (!cur_cfg.empty()) {
        const json j = load_config(cur_cfg);
        merge_common(c_cur, j, cur.common);
        from_cfg(c_cur, j, "--kind", "kind", cur.kind);
        from_cfg(c_cur, j, "--r-start", "r_start", cur.r_start);
        from_cfg(c_cur, j, "--r-end", "r_end", cur.r_end);
        from_cfg(c_cur, j, "--steps", "steps", cur.steps);
      }
      return run_curvature(cur, std::cout);
    }
    if (*c_spec) {
      if (!spec_cfg.empty()) {
        const json j = load_config(spec_cfg);
        merge_common(c_spec, j, spec.common);
        from_cfg(c_spec, j, "--n-levels", "n_levels", spec.n_levels);
      }
      return run_spectrum(spec, std::cout);
    }
    if (*c_stk) {
      if (!stk_cfg.empty()) {
        const json j = load_config(stk_cfg);
        merge_common(c_stk, j, stk.common);
        from_cfg(c_stk, j, "--samples", "samples", stk.samples);
        from_cfg(c_stk, j, "--manifold", "manifold", stk.manifold);
      }
      return run_staeckel_check(stk, std::cout);
    }
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
