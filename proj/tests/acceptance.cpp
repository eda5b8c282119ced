// Acceptance harness: one PASS/FAIL line per criterion at pinned tolerances.
//
// Exit status is 0 when the set of failing criteria equals the --expect-fail set,
// so a known red criterion stays visible as FAIL without hiding regressions, and
// an unexpected pass is reported as well.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "bogo/classical_obs.hpp"
#include "bogo/cli_io.hpp"
#include "bogo/evolution.hpp"
#include "bogo/experiments.hpp"
#include "bogo/quantum_obs.hpp"
#include "bogo/units.hpp"
#include "support.hpp"

using namespace bogo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

const double kOmegaD = std::sqrt(5.0);

SystemParams default_params() { return SystemParams(1.0, 1000000, 1.0, 0.0, linspace(0.05, 2.0, 40)); }

fs::path config_path(const std::string& name) {
  return fs::path(BOGO_SOURCE_DIR) / "configs" / name;
}

// 1. |alpha|^2 - |beta|^2 = 1 after 40 periods, A <= 0.3, under 1 s per mode.
Outcome normalization() {
  const auto p = default_params();
  double worst = 0.0, slowest = 0.0;
  for (double A : {0.05, 0.1, 0.2, 0.3}) {
    for (const auto& s : {InteractionSchedule::sinusoid(p, A, kOmegaD, 40),
                          InteractionSchedule::square_wave(p, A, kOmegaD, 40)}) {
      for (double k : linspace(0.25, 2.0, 8)) {
        const auto start = Clock::now();
        const auto m = propagate(s, k, s.t_in(), 0.0);
        slowest = std::max(slowest, seconds_since(start));
        worst = std::max(worst, std::abs(m.determinant() - 1.0));
      }
    }
  }
  return {worst <= 1e-9 && slowest < 1.0,
          fmt::format("max |det-1| = {:.3g}, slowest mode {:.3g} s", worst, slowest)};
}

// 2. Sudden-step composition vs the tanh-smoothed ODE, plus chart agreement.
Outcome square_wave_oracle() {
  const auto p = default_params();
  double worst = 0.0;
  for (double A : {0.05, 0.1, 0.2, 0.3}) {
    const auto s = InteractionSchedule::square_wave(p, A, kOmegaD, 1);
    for (double k : linspace(0.5, 1.5, 11)) {
      const auto exact = monodromy(s, k);
      const auto smooth = smoothed_square_monodromy(s, k, 1e-4 / dispersion(k, 1.0, 1.0));
      const double b = std::abs(exact.beta());
      worst = std::max(worst, std::abs(std::abs(smooth.beta()) - b) / b);
    }
  }
  const auto family = InteractionSchedule::square_wave(p, 0.1, kOmegaD, 1);
  const auto ks = linspace(0.5, 1.5, 101);
  const std::vector<double> amps{0.05, 0.1, 0.2};
  const auto a = stability_chart(family, ks, amps, StabilityMethod::analytic, 1e-12, 4);
  const auto b = stability_chart(family, ks, amps, StabilityMethod::smoothed_ode, 1e-12, 4);
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (std::size_t j = 0; j < amps.size(); ++j, ++total) agree += a.unstable[i][j] == b.unstable[i][j];
  }
  const double frac = static_cast<double>(agree) / total;
  return {worst <= 1e-4 && frac >= 0.999,
          fmt::format("max rel |beta| error {:.3g}; chart agreement {}/{}", worst, agree, total)};
}

// 3. Maximal growth of the A = 0.05 sinusoid sits at omega_k = omega_D / 2.
Outcome resonance_location() {
  const auto s = InteractionSchedule::sinusoid(default_params(), 0.05, kOmegaD, 1);
  const auto ks = linspace(0.5, 1.5, 1001);
  std::vector<double> growth(ks.size());
  parallel_for(ks.size(), 4, [&](std::size_t i) { growth[i] = growth_rate(monodromy(s, ks[i])); });
  const auto best = static_cast<std::size_t>(std::max_element(growth.begin(), growth.end()) - growth.begin());
  const double w = dispersion(ks[best], 1.0, 1.0);
  const std::size_t nb = best + 1 < ks.size() ? best + 1 : best - 1;
  const double spacing = std::abs(dispersion(ks[nb], 1.0, 1.0) - w);
  const double off = std::abs(w - kOmegaD / 2.0);
  return {off <= spacing,
          fmt::format("k* = {:.4f}, |w_k - w_D/2| = {:.3g}, grid spacing {:.3g}", ks[best], off, spacing)};
}

// 4. Six quantum criteria agree pairwise outside a 1e-9 band.
Outcome criterion_equivalence() {
  std::mt19937_64 rng(4);
  const std::int64_t N = 1000000;
  int counted = 0, violating = 0, mismatches = 0;
  for (int i = 0; i < 30000; ++i) {
    const auto s = testing::random_state(rng);
    if (s.n_th == 0.0) continue;
    const auto tc = total_coefficients(s.c, s.u, s.v, s.omega, s.t);
    const double g = std::norm(tc.gamma);
    const double n = occupation(s.n_th, g);
    const complex m = anomalous(s.n_th, tc.lambda, tc.gamma);
    const double m2 = std::norm(m);
    const double half = thermal_occupation(s.omega, s.T / 2.0);
    if (std::abs(m2 - n * n) <= 1e-9 * std::max(1.0, n * n) ||
        std::abs(g - half) <= 1e-9 * std::max(1.0, g)) {
      continue;
    }
    ++counted;
    const bool c[6] = {two_mode_variance(n, m) < 1.0,
                       g22(n, m, ModeRelation::opposite_momentum) > g22(n, m, ModeRelation::same_mode),
                       m2 > n * n,
                       nonseparability(n, m).nonseparable,
                       g > half,
                       density_correlator(N, n, m).below_noise_floor};
    violating += c[0];
    if (std::any_of(c + 1, c + 6, [&](bool x) { return x != c[0]; })) ++mismatches;
  }
  return {counted >= 10000 && mismatches == 0,
          fmt::format("{} states ({} violating), {} mismatches", counted, violating, mismatches)};
}

// 5. n_th(T/2) = n_th^2 / (2 n_th + 1).
Outcome half_temperature() {
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double x = std::pow(10.0, -3.0 + 4.0 * i / 400.0);  // omega / T
    for (double T : {0.1, 1.0, 20.0}) {
      const double n = thermal_occupation(x * T, T);
      const double lhs = thermal_occupation(x * T, T / 2.0);
      const double rhs = n * n / (2.0 * n + 1.0);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  return {worst <= 1e-12, fmt::format("max rel deviation {:.3g}", worst)};
}

// 6. Undriven with U_out = 0: V = 1 + n_th, V_cl = n_cl_th.
Outcome equilibrium_limits() {
  double worst = 0.0;
  for (double k : linspace(0.05, 3.0, 30)) {
    const auto mp = mode_physics(k, 0.0, 1.0);
    for (double T : {0.1, 0.5, 1.0, 5.0, 20.0}) {
      const double n_th = thermal_occupation(mp.e_k, T);
      const double n_cl_th = classical_thermal_occupation(mp.e_k, T);
      for (double t : {0.0, 0.7, 3.1}) {
        const auto st = mode_state(BogoCoefficients{}, mp, n_th, t);
        const double V = two_mode_variance(st.n_k, st.m_k);
        const auto tc = total_coefficients(BogoCoefficients{}, mp.u_k, mp.v_k, mp.e_k, t);
        const double Vcl = classical_tmv(n_cl_th, std::norm(tc.gamma)).V_cl;
        worst = std::max(worst, std::abs(V - (1.0 + n_th)) / (1.0 + n_th));
        worst = std::max(worst, std::abs(Vcl - n_cl_th) / n_cl_th);
      }
    }
  }
  return {worst <= 1e-12, fmt::format("max rel deviation {:.3g}", worst)};
}

// 7. V(k -> 0) = 1 at T = mu.
Outcome k0_threshold() {
  SystemParams p(1.0, 1000000, 1.0, 1.0, linspace(0.005, 2.0, 400));
  Scenario sc{p, InteractionSchedule::constant(p), {1.0}, ModeSelection{{0.1}, false},
              TimeGrid{}, BoxMode::one_d, 1e-12, 0, 4};
  const double v0 = spectrum_sweep(sc, 0.0).v_k0.front();
  return {std::abs(v0 - 1.0) <= 1e-3, fmt::format("V(k->0) = {:.10f}", v0)};
}

// 8. Ordering of V and V_cl for the default 40-period resonant drive.
struct Ordering {
  Outcome a, b, c, d;
};

Ordering ordering_claims() {
  const auto start = Clock::now();
  auto cfg = load_config(config_path("fig1_default.json"));
  cfg.scenario.threads = 4;
  const auto& sc = cfg.scenario;
  const auto rows = run_v_trace(sc);
  const auto table = high_t_convergence(sc);
  const double k = table.k;

  // (a) and (c) on the emitted traces of the resonant mode.
  std::size_t samples = 0, violations = 0;
  std::string worst_a;
  double worst_excess = 0.0;
  std::vector<double> temps = sc.temperatures_over_mu;
  std::sort(temps.begin(), temps.end());
  std::vector<double> min_v(temps.size(), INFINITY), min_vcl(temps.size(), INFINITY);
  for (const auto& r : rows) {
    if (r.k != k) continue;
    const auto ti = static_cast<std::size_t>(
        std::find_if(temps.begin(), temps.end(),
                     [&](double x) { return std::abs(x * sc.params.mu0() - r.T) <= 1e-12 * r.T; }) -
        temps.begin());
    ++samples;
    if (r.V_cl > r.V) {
      ++violations;
      if (r.V_cl - r.V > worst_excess) {
        worst_excess = r.V_cl - r.V;
        worst_a = fmt::format("T={} t={:.3f}: V={:.6g} V_cl={:.6g}", r.T, r.t, r.V, r.V_cl);
      }
    }
    if (ti < temps.size()) {
      min_v[ti] = std::min(min_v[ti], r.V);
      min_vcl[ti] = std::min(min_vcl[ti], r.V_cl);
    }
  }
  Ordering out;
  out.a = {samples > 0 && violations == 0,
           fmt::format("{} of {} samples have V_cl > V; worst {}", violations, samples, worst_a)};

  std::string gaps;
  for (const auto& row : table.rows) gaps += fmt::format(" {:.4g}", row.max_gap);
  out.b = {table.monotone_gap, "max|V-V_cl| by T:" + gaps};

  bool below = true;
  std::string mins;
  for (std::size_t i = 0; i < temps.size(); ++i) {
    const auto& row = table.rows[i];
    const bool q = min_v[i] < 1.0 || row.onset_q.has_value();
    const bool cl = min_vcl[i] < 1.0 || row.onset_cl.has_value();
    below = below && q && cl;
    mins += fmt::format(" T={}: {:.3g}/{:.3g}", temps[i], min_v[i], min_vcl[i]);
  }
  out.c = {below, "min V/V_cl after drive:" + mins};

  // (d) uniform post-drive samples of V at the lowest temperature.
  const auto& s = sc.schedule;
  const BogoCoefficients c = propagate(s, k, s.t_in(), 0.0, sc.tol).coefficients();
  const auto mp = mode_physics(k, s.u_out(), s.density_n());
  const double omega_in = s.omega(k, s.t_in());
  const int n = sc.times.n_samples;
  const double dt = sc.times.t_max / (n - 1);
  bool freq_ok = true;
  std::string peaks;
  for (double t_over_mu : temps) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
      v.push_back(make_record(sc.params.atom_number_N(), k, i * dt, t_over_mu * sc.params.mu0(), c,
                              mp, omega_in).V);
    }
    const auto peak = dominant_frequency(v, dt);
    freq_ok = freq_ok && std::abs(peak.omega - 2.0 * mp.e_k) <= peak.bin_width;
    peaks += fmt::format(" {:.4f}", peak.omega);
  }
  const double secs = seconds_since(start);
  out.d = {freq_ok && secs < 10.0,
           fmt::format("2w_out = {:.4f}, peaks{}; bin {:.3f}; section runtime {:.2f} s",
                       2.0 * mp.e_k, peaks, 2.0 * std::numbers::pi / (n * dt), secs)};
  return out;
}

// 9. |m_cl| < n_cl and n_cl^2 - |m_cl|^2 = n_cl_th^2.
Outcome classical_no_violation() {
  std::size_t draws = 0, violations = 0;
  double worst = 0.0;
  auto check = [&](double ncl_th, complex lambda, complex gamma) {
    const auto st = classical_mode_state(ncl_th, lambda, gamma, 0.0);
    ++draws;
    if (!(std::abs(st.m_cl) < st.n_cl)) ++violations;
    worst = std::max(worst, std::abs(st.n_cl * st.n_cl - std::norm(st.m_cl) - ncl_th * ncl_th) /
                                (st.n_cl * st.n_cl));
  };
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10000; ++i) {
    const auto s = testing::random_state(rng);
    const auto tc = total_coefficients(s.c, s.u, s.v, s.omega, s.t);
    check(classical_thermal_occupation(s.omega, s.T), tc.lambda, tc.gamma);
  }
  // every mode of the default drive and the square-wave family
  const auto p = default_params();
  for (const auto& s : {InteractionSchedule::sinusoid(p, 0.1, kOmegaD, 40),
                        InteractionSchedule::square_wave(p, 0.1, kOmegaD, 40),
                        InteractionSchedule::constant(p)}) {
    for (double k : p.mode_grid()) {
      const auto c = propagate(s, k, s.t_in(), 0.0).coefficients();
      const auto mp = mode_physics(k, s.u_out(), s.density_n());
      for (double T : {0.5, 1.0, 5.0, 20.0}) {
        for (double t : linspace(0.0, 20.0, 41)) {
          const auto tc = total_coefficients(c, mp.u_k, mp.v_k, mp.e_k, t);
          check(classical_thermal_occupation(s.omega(k, s.t_in()), T), tc.lambda, tc.gamma);
        }
      }
    }
  }
  return {violations == 0 && worst <= 1e-10,
          fmt::format("{} states, {} with |m_cl| >= n_cl, max rel identity error {:.3g}", draws,
                      violations, worst)};
}

// 10. Monte Carlo moments within 4 standard errors at 1e5 samples.
Outcome monte_carlo() {
  const auto start = Clock::now();
  const auto p = default_params();
  EnsembleOptions opt;
  opt.sample_count = 100000;
  opt.seed = 10;
  opt.threads = 4;
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& s : {InteractionSchedule::sinusoid(p, 0.0, kOmegaD, 40),
                        InteractionSchedule::sinusoid(p, 0.1, kOmegaD, 40)}) {
    for (double k : {0.5, 1.0, 1.5}) {
      const auto c = propagate(s, k, s.t_in(), 0.0).coefficients();
      const auto mp = mode_physics(k, s.u_out(), s.density_n());
      const auto tc = total_coefficients(c, mp.u_k, mp.v_k, mp.e_k, optimal_time(phase_delta(c), mp.e_k));
      for (double T : {0.5, 1.0, 5.0, 20.0}) {
        const double ncl_th = classical_thermal_occupation(s.omega(k, s.t_in()), T);
        const auto e = monte_carlo_ensemble(tc.lambda, tc.gamma, ncl_th, opt);
        const double g = std::norm(tc.gamma);
        const double n = classical_occupation(ncl_th, g);
        const complex m = classical_anomalous(ncl_th, tc.lambda, tc.gamma);
        const std::pair<double, Moment> pairs[] = {
            {n, e.intensity_a},          {n, e.intensity_b},
            {2.0 * n * n, e.intensity_aa}, {n * n + std::norm(m), e.intensity_ab},
            {m.real(), e.anomalous_re},  {m.imag(), e.anomalous_im},
            {classical_tmv(ncl_th, g).V_cl, e.v_cl}};
        for (const auto& [expect, est] : pairs) {
          ++checks;
          if (est.std_error > 0.0) worst = std::max(worst, std::abs(est.mean - expect) / est.std_error);
        }
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst < 4.0 && secs < 30.0,
          fmt::format("{} moments, max |z| = {:.3f}, runtime {:.2f} s", checks, worst, secs)};
}

// 11. <rho rho> - E(rho rho) = N at t_m; vacuum gives N.
Outcome density_bookkeeping() {
  const std::int64_t N = 1000000;
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto s = testing::random_state(rng);
    const double tm = optimal_time(phase_delta(s.c), s.omega);
    const auto st = mode_state(s.c, mode_physics(1.0, 1.0, 1.0), s.n_th, tm);
    const double diff = density_correlator(N, st.n_k, st.m_k).at_t_m -
                        classical_density_correlator(N, st.n_k, st.m_k).at_t_m;
    worst = std::max(worst, std::abs(diff - N) / N);
  }
  const auto vac = mode_state(BogoCoefficients{}, mode_physics(0.7, 0.0, 1.0), 0.0, 0.0);
  const auto q = density_correlator(N, vac.n_k, vac.m_k);
  const bool limit = q.general == static_cast<double>(N) && q.at_t_m == static_cast<double>(N);
  return {worst <= 1e-9 && limit,
          fmt::format("max |diff - N|/N = {:.3g}; vacuum value {}", worst, q.at_t_m)};
}

// 12. Time average of n_k(t) against the seven-term closed form.
Outcome time_average() {
  std::mt19937_64 rng(12);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto s = testing::random_state(rng);
    const double b = std::abs(s.c.beta);
    const double d = phase_delta(s.c);
    const int n = 2048;
    const double period = std::numbers::pi / s.omega;
    double avg = 0.0;
    for (int j = 0; j < n; ++j) avg += occupation(s.n_th, gamma_sq_closed(s.v, b, d, s.omega, period * j / n));
    avg /= n;
    const double closed = time_averaged_occupation(s.n_th, s.v, b * b);
    worst = std::max(worst, std::abs(avg - closed) / std::max(1.0, closed));
  }
  return {worst <= 1e-10, fmt::format("max rel deviation {:.3g}", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 13. Byte-identical outputs across reruns and thread counts.
Outcome determinism() {
  using Cmd = int (*)(const fs::path&, const CliOverrides&, std::ostream&, std::ostream&);
  const std::pair<Cmd, std::string> runs[] = {{cmd_vtrace, "fig1_default.json"},
                                              {cmd_stability, "stability_square.json"},
                                              {cmd_mc_validate, "fig1_default.json"}};
  const fs::path root = fs::temp_directory_path() / "bogo_acceptance";
  std::size_t files = 0, differing = 0;
  for (const auto& [cmd, config] : runs) {
    std::vector<fs::path> dirs;
    for (unsigned threads : {1u, 4u, 4u}) {
      const fs::path dir = root / fmt::format("{}_{}_{}", config, threads, dirs.size());
      fs::remove_all(dir);
      CliOverrides o;
      o.out_dir = dir;
      o.threads = threads;
      std::ostringstream out, err;
      if (cmd(config_path(config), o, out, err) != exit_code::ok) {
        return {false, fmt::format("{} failed: {}", config, err.str())};
      }
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      ++files;
      const auto ref = slurp(entry.path());
      if (ref != slurp(dirs[1] / name) || ref != slurp(dirs[2] / name)) ++differing;
    }
  }
  fs::remove_all(root);
  return {files > 0 && differing == 0,
          fmt::format("{} files compared across threads 1/4/4, {} differ", files, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<std::string> expected;
  app.add_option("--expect-fail", expected, "criterion ids known to fail");
  CLI11_PARSE(app, argc, argv);
  const std::set<std::string> expect(expected.begin(), expected.end());

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1", normalization},         {"2", square_wave_oracle},   {"3", resonance_location},
      {"4", criterion_equivalence}, {"5", half_temperature},     {"6", equilibrium_limits},
      {"7", k0_threshold}};
  std::vector<std::pair<std::string, Outcome>> results;
  for (const auto& [id, fn] : criteria) results.emplace_back(id, fn());
  const auto f = ordering_claims();
  results.emplace_back("8a", f.a);
  results.emplace_back("8b", f.b);
  results.emplace_back("8c", f.c);
  results.emplace_back("8d", f.d);
  for (const auto& [id, fn] : std::vector<std::pair<std::string, std::function<Outcome()>>>{
           {"9", classical_no_violation},
           {"10", monte_carlo},
           {"11", density_bookkeeping},
           {"12", time_average},
           {"13", determinism}}) {
    results.emplace_back(id, fn());
  }

  int unexpected = 0;
  for (const auto& [id, r] : results) {
    const bool known = expect.count(id) > 0;
    std::string tag;
    if (!r.pass && known) tag = " (known)";
    if (r.pass && known) tag = " (unexpected pass)";
    fmt::print("{} criterion {}: {}{}\n", r.pass ? "PASS" : "FAIL", id, r.detail, tag);
    if (r.pass == known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
