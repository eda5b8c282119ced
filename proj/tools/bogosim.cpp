// bogosim: command-line front end for the Bogoliubov excitation simulator.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bogo/cli_io.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  unsigned threads = 1;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario configuration (JSON)")->required();
  cmd->add_option("--out", c.out, "output directory (overrides output.path)");
  cmd->add_option("--threads", c.threads, "worker threads, 0 = all cores; results do not depend on it");
  cmd->add_option("--tol", c.tol, "integrator tolerance override");
  cmd->add_option("--seed", c.seed, "Monte Carlo seed override");
}

bogo::CliOverrides overrides(const CLI::App* cmd, const Common& c) {
  bogo::CliOverrides o;
  if (cmd->count("--out")) o.out_dir = c.out;
  if (cmd->count("--threads")) o.threads = c.threads;
  if (cmd->count("--tol")) o.tol = c.tol;
  if (cmd->count("--seed")) o.seed = c.seed;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bogoliubov excitations of a driven homogeneous condensate"};
  app.set_version_flag("--version", bogo::version_string());
  app.require_subcommand(1);

  Common vt, st, sp, rs, mc;
  double time = 0.0;
  auto* c_vtrace = app.add_subcommand("vtrace", "V(t) traces, one file per temperature");
  auto* c_stab = app.add_subcommand("stability", "monodromy stability chart over (k, A)");
  auto* c_spec = app.add_subcommand("spectrum", "observables over the full mode grid at one time");
  auto* c_res = app.add_subcommand("resonance", "first-resonance wavenumber estimates");
  auto* c_mc = app.add_subcommand("mc-validate", "Monte Carlo ensemble against closed forms");
  add_common(c_vtrace, vt);
  add_common(c_stab, st);
  add_common(c_spec, sp);
  add_common(c_res, rs);
  add_common(c_mc, mc);
  c_spec->add_option("--time", time, "out-region evaluation time (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bogo::exit_code::config_error;
  }

  if (c_vtrace->parsed()) return bogo::cmd_vtrace(vt.config, overrides(c_vtrace, vt), std::cout, std::cerr);
  if (c_stab->parsed()) return bogo::cmd_stability(st.config, overrides(c_stab, st), std::cout, std::cerr);
  if (c_spec->parsed()) {
    auto o = overrides(c_spec, sp);
    if (c_spec->count("--time")) o.time = time;
    return bogo::cmd_spectrum(sp.config, o, std::cout, std::cerr);
  }
  if (c_res->parsed()) return bogo::cmd_resonance(rs.config, overrides(c_res, rs), std::cout, std::cerr);
  return bogo::cmd_mc_validate(mc.config, overrides(c_mc, mc), std::cout, std::cerr);
}
