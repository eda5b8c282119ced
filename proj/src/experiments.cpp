#include "bogo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "bogo/errors.hpp"

namespace bogo {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

// Lattice points n in Z^3 with |n|^2 < r2, origin included.
double count_inside(double r2) {
  if (r2 <= 0.0) return 0.0;
  const auto nmax = static_cast<long>(std::ceil(std::sqrt(r2)));
  double total = 0.0;
  for (long x = -nmax; x <= nmax; ++x) {
    for (long y = -nmax; y <= nmax; ++y) {
      const double rem = r2 - static_cast<double>(x * x + y * y);
      if (rem <= 0.0) continue;
      auto m = static_cast<long>(std::floor(std::sqrt(rem)));
      while (static_cast<double>(m * m) >= rem) --m;
      while (static_cast<double>((m + 1) * (m + 1)) < rem) ++m;
      total += static_cast<double>(2 * m + 1);
    }
  }
  return total;
}

}  // namespace

std::vector<double> shell_weights(const SystemParams& params, BoxMode mode) {
  const auto& g = params.mode_grid();
  std::vector<double> w(g.size(), 1.0);
  if (mode == BoxMode::one_d || g.empty()) return w;
  const double dk = 2.0 * std::numbers::pi / params.box_length();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lower = i == 0 ? 0.0 : 0.5 * (g[i - 1] + g[i]);
    double upper;
    if (i + 1 < g.size()) {
      upper = 0.5 * (g[i] + g[i + 1]);
    } else {
      upper = i == 0 ? 2.0 * g[i] : g[i] + 0.5 * (g[i] - g[i - 1]);
    }
    const double lo = lower / dk, hi = upper / dk;
    double count = count_inside(hi * hi) - count_inside(lo * lo);
    if (i == 0) count -= 1.0;  // the condensate mode
    w[i] = count;
  }
  return w;
}

std::vector<double> resolve_modes(const Scenario& sc) {
  if (!sc.modes.auto_resonant) {
    if (sc.modes.k_list.empty()) throw ConfigError("no modes selected");
    return sc.modes.k_list;
  }
  const auto est = resonance_estimate(sc.schedule, sc.params);
  if (!est.k) throw UnsupportedRegime("no first resonance for this drive");
  const auto& g = sc.params.mode_grid();
  const auto best = std::min_element(g.begin(), g.end(), [&](double a, double b) {
    return std::abs(a - *est.k) < std::abs(b - *est.k);
  });
  return {*best};
}

std::vector<double> time_samples(const TimeGrid& grid, std::optional<double> t_m_first,
                                 double omega_out) {
  if (!(grid.t_max >= 0.0) || grid.n_samples < 1) throw ConfigError("invalid time grid");
  std::vector<double> t;
  if (grid.n_samples == 1) {
    t.push_back(0.0);
  } else {
    for (int i = 0; i < grid.n_samples; ++i) {
      t.push_back(grid.t_max * static_cast<double>(i) / (grid.n_samples - 1));
    }
  }
  if (grid.include_t_m && t_m_first) {
    const double spacing = std::numbers::pi / omega_out;
    for (int j = 0;; ++j) {
      const double tm = *t_m_first + j * spacing;
      if (tm > grid.t_max) break;
      t.push_back(tm);
    }
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

ObservableRecord make_record(std::int64_t atom_number_N, double k, double t, double T,
                             const BogoCoefficients& c, const ModePhysics& out, double omega_in) {
  ObservableRecord r;
  r.k = k;
  r.t = t;
  r.T = T;
  r.n_th = thermal_occupation(omega_in, T);
  r.n_cl_th = classical_thermal_occupation(omega_in, T);
  r.beta_sq = std::norm(c.beta);
  const auto [lambda, gamma] = total_coefficients(c, out.u_k, out.v_k, out.e_k, t);
  r.gamma_sq = std::norm(gamma);
  r.n_k = occupation(r.n_th, r.gamma_sq);
  const complex m = anomalous(r.n_th, lambda, gamma);
  r.re_m_k = m.real();
  r.im_m_k = m.imag();
  r.V = r.n_k > 0.0 ? two_mode_variance(r.n_k, m) : std::numeric_limits<double>::quiet_NaN();
  const auto vcl = classical_tmv(r.n_cl_th, r.gamma_sq);
  r.V_cl = vcl.V_cl;
  r.d5 = nonseparability(r.n_k, m).d5;
  r.subpoisson_q = r.V < 1.0;
  r.subpoisson_cl = r.V_cl < 1.0;
  r.intensity_csi =
      g22(r.n_k, m, ModeRelation::opposite_momentum) > g22(r.n_k, m, ModeRelation::same_mode);
  r.mode_csi = std::norm(m) > r.n_k * r.n_k;
  r.nonseparable = r.d5 < 0.0;
  r.rho_corr_q = density_correlator(atom_number_N, r.n_k, m).general;
  const auto cl = classical_mode_state(r.n_cl_th, lambda, gamma, t);
  r.rho_corr_cl = classical_density_correlator(atom_number_N, cl.n_cl, cl.m_cl).general;
  if (std::abs(c.normalization() - 1.0) > 1e-9) r.validity_flags |= validity::normalization;
  return r;
}

std::vector<BogoCoefficients> end_of_drive_coefficients(const Scenario& sc,
                                                        const std::vector<double>& ks) {
  std::vector<BogoCoefficients> out(ks.size());
  const auto& s = sc.schedule;
  parallel_for(ks.size(), sc.threads, [&](std::size_t i) {
    out[i] = propagate(s, ks[i], s.t_in(), 0.0, sc.tol).coefficients();
  });
  return out;
}

namespace {

struct GridState {
  std::vector<double> ks;
  std::vector<double> weights;
  std::vector<BogoCoefficients> coeffs;
  std::vector<ModePhysics> out;
  std::vector<double> omega_in;
};

GridState grid_state(const Scenario& sc) {
  GridState g;
  g.ks = sc.params.mode_grid();
  g.weights = shell_weights(sc.params, sc.box_mode);
  g.coeffs = end_of_drive_coefficients(sc, g.ks);
  for (double k : g.ks) {
    g.out.push_back(mode_physics(k, sc.schedule.u_out(), sc.schedule.density_n()));
    g.omega_in.push_back(sc.schedule.omega(k, sc.schedule.t_in()));
  }
  return g;
}

DepletionReport grid_depletion(const Scenario& sc, const GridState& g, double T, double t) {
  std::vector<double> occ(g.ks.size());
  for (std::size_t i = 0; i < g.ks.size(); ++i) {
    const auto& o = g.out[i];
    const auto tc = total_coefficients(g.coeffs[i], o.u_k, o.v_k, o.e_k, t);
    occ[i] = occupation(thermal_occupation(g.omega_in[i], T), std::norm(tc.gamma));
  }
  return depletion_from_occupations(occ, g.weights, sc.params.atom_number_N());
}

void apply_depletion(ObservableRecord& r, const DepletionReport& d) {
  r.depletion_fraction = d.fraction;
  r.validity_flags |= d.validity_flags();
}

double temperature(const Scenario& sc, double t_over_mu) {
  if (!(t_over_mu >= 0.0)) throw ConfigError("temperatures must be >= 0");
  return t_over_mu * sc.params.mu0();
}

}  // namespace

std::vector<ObservableRecord> run_v_trace(const Scenario& sc) {
  const auto ks = resolve_modes(sc);
  const auto coeffs = end_of_drive_coefficients(sc, ks);
  const GridState grid = grid_state(sc);
  const auto& s = sc.schedule;

  struct ModeTimes {
    ModePhysics out;
    double omega_in;
    std::vector<double> times;
  };
  std::vector<ModeTimes> modes;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    ModeTimes m{mode_physics(ks[i], s.u_out(), s.density_n()), s.omega(ks[i], s.t_in()), {}};
    m.times = time_samples(sc.times, optimal_time(phase_delta(coeffs[i]), m.out.e_k), m.out.e_k);
    modes.push_back(std::move(m));
  }

  // Cells over (temperature, mode) are independent; each fills its own slot.
  const std::size_t cells = sc.temperatures_over_mu.size() * ks.size();
  std::vector<std::vector<ObservableRecord>> slots(cells);
  parallel_for(cells, sc.threads, [&](std::size_t cell) {
    const std::size_t ti = cell / ks.size();
    const std::size_t ki = cell % ks.size();
    const double T = temperature(sc, sc.temperatures_over_mu[ti]);
    const auto& m = modes[ki];
    auto& rows = slots[cell];
    rows.reserve(m.times.size());
    for (double t : m.times) {
      auto r = make_record(sc.params.atom_number_N(), ks[ki], t, T, coeffs[ki], m.out, m.omega_in);
      apply_depletion(r, grid_depletion(sc, grid, T, t));
      rows.push_back(r);
    }
  });
  std::vector<ObservableRecord> out;
  for (auto& rows : slots) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

namespace {

TransferMatrix chart_monodromy(const InteractionSchedule& family, double k, double A,
                               StabilityMethod method, double tol) {
  const auto s = family.with_amplitude(A).with_periods(1);
  if (method == StabilityMethod::analytic) return monodromy(s, k, tol);
  if (s.kind() != ScheduleKind::square_wave) {
    throw UnsupportedRegime("the smoothed ODE chart is defined for square waves only");
  }
  const double w = dispersion(k, s.u0(), s.density_n());
  return smoothed_square_monodromy(s, k, 1e-4 / w, tol);
}

double bisect_boundary(const InteractionSchedule& family, double A, double k_stable,
                       double k_unstable, StabilityMethod method, double tol) {
  double a = k_stable, b = k_unstable;
  for (int i = 0; i < 200 && std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++i) {
    const double mid = 0.5 * (a + b);
    if (is_unstable(chart_monodromy(family, mid, A, method, tol))) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

StabilityChart stability_chart(const InteractionSchedule& schedule, const std::vector<double>& k_grid,
                               const std::vector<double>& A_grid, StabilityMethod method,
                               double tol, unsigned threads) {
  if (!schedule.drive_period()) {
    throw UnsupportedRegime("stability_chart requires a periodic schedule family");
  }
  StabilityChart chart;
  chart.k_grid = k_grid;
  chart.A_grid = A_grid;
  const std::size_t nk = k_grid.size(), na = A_grid.size();
  chart.unstable.assign(nk, std::vector<bool>(na, false));
  chart.growth.assign(nk, std::vector<double>(na, 0.0));
  std::vector<char> flags(nk * na, 0);
  std::vector<double> growth(nk * na, 0.0);
  parallel_for(nk * na, threads, [&](std::size_t cell) {
    const std::size_t i = cell / na, j = cell % na;
    const auto m = chart_monodromy(schedule, k_grid[i], A_grid[j], method, tol);
    flags[cell] = is_unstable(m) ? 1 : 0;
    growth[cell] = growth_rate(m);
  });
  for (std::size_t i = 0; i < nk; ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      chart.unstable[i][j] = flags[i * na + j] != 0;
      chart.growth[i][j] = growth[i * na + j];
    }
  }

  // Tongue edges: bisect every flag change between neighbouring k cells.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<TongueBoundary>> per_A(na);
  parallel_for(na, threads, [&](std::size_t j) {
    const double A = A_grid[j];
    std::size_t i = 0;
    while (i < nk) {
      if (!chart.unstable[i][j]) {
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end + 1 < nk && chart.unstable[end + 1][j]) ++end;
      TongueBoundary b{A, nan, nan};
      if (i > 0) b.k_lower = bisect_boundary(schedule, A, k_grid[i - 1], k_grid[i], method, tol);
      if (end + 1 < nk) {
        b.k_upper = bisect_boundary(schedule, A, k_grid[end + 1], k_grid[end], method, tol);
      }
      per_A[j].push_back(b);
      i = end + 1;
    }
  });
  for (auto& v : per_A) chart.boundaries.insert(chart.boundaries.end(), v.begin(), v.end());
  return chart;
}

double richardson_to_zero(const double x[3], const double y[3]) {
  // Lagrange interpolation evaluated at x = 0.
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (j != i) w *= (0.0 - x[j]) / (x[i] - x[j]);
    }
    value += w * y[i];
  }
  return value;
}

SpectrumResult spectrum_sweep(const Scenario& sc, double t) {
  if (!(t >= 0.0)) throw DomainError("spectrum_sweep needs an out-region time t >= 0");
  const GridState grid = grid_state(sc);
  SpectrumResult res;
  for (double t_over_mu : sc.temperatures_over_mu) {
    const double T = temperature(sc, t_over_mu);
    const auto dep = grid_depletion(sc, grid, T, t);
    std::vector<double> vs;
    for (std::size_t i = 0; i < grid.ks.size(); ++i) {
      auto r = make_record(sc.params.atom_number_N(), grid.ks[i], t, T, grid.coeffs[i],
                           grid.out[i], grid.omega_in[i]);
      apply_depletion(r, dep);
      vs.push_back(r.V);
      res.records.push_back(r);
    }
    if (grid.ks.size() >= 3) {
      const double x[3] = {grid.ks[0], grid.ks[1], grid.ks[2]};
      const double y[3] = {vs[0], vs[1], vs[2]};
      res.v_k0.push_back(richardson_to_zero(x, y));
    } else {
      res.v_k0.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return res;
}

ConvergenceTable high_t_convergence(const Scenario& sc, int samples_per_period) {
  if (sc.temperatures_over_mu.size() < 3) {
    throw ConfigError("high_t_convergence needs at least three temperatures");
  }
  const auto [lo, hi] =
      std::minmax_element(sc.temperatures_over_mu.begin(), sc.temperatures_over_mu.end());
  if (!(*lo > 0.0) || *hi < 10.0 * *lo) {
    throw ConfigError("high_t_convergence needs temperatures spanning at least one decade");
  }
  const auto& s = sc.schedule;
  const double k = resolve_modes(sc).front();
  const BogoCoefficients c = propagate(s, k, s.t_in(), 0.0, sc.tol).coefficients();
  const auto out = mode_physics(k, s.u_out(), s.density_n());
  const double omega_in = s.omega(k, s.t_in());
  const auto times = time_samples(sc.times, optimal_time(phase_delta(c), out.e_k), out.e_k);

  // Instantaneous-basis |gamma|^2 during the drive.
  std::vector<double> drive_t;
  std::vector<double> drive_g;
  if (const auto period = s.drive_period(); period && s.t_in() < 0.0) {
    const int n = s.n_periods() * samples_per_period;
    for (int j = 1; j <= n; ++j) drive_t.push_back(s.t_in() + (-s.t_in()) * j / n);
    drive_t.back() = 0.0;
    const auto hist = coefficient_history(s, k, drive_t, sc.tol);
    for (std::size_t j = 0; j < drive_t.size(); ++j) {
      const auto uv = bogoliubov_uv(k, s.interaction_at(drive_t[j]), s.density_n());
      drive_g.push_back(std::norm(total_coefficients(hist[j], uv.u, uv.v).gamma));
    }
  }

  ConvergenceTable table;
  table.k = k;
  std::vector<double> temps = sc.temperatures_over_mu;
  std::sort(temps.begin(), temps.end());
  for (double t_over_mu : temps) {
    const double T = temperature(sc, t_over_mu);
    ConvergenceRow row;
    row.T_over_mu = t_over_mu;
    for (double t : times) {
      const auto r = make_record(sc.params.atom_number_N(), k, t, T, c, out, omega_in);
      const double gap = std::abs(r.V - r.V_cl);
      row.max_gap = std::max(row.max_gap, gap);
      row.max_rel_gap = std::max(row.max_rel_gap, gap / r.V);
    }
    const double n_th = thermal_occupation(omega_in, T);
    const double n_cl_th = classical_thermal_occupation(omega_in, T);
    row.thermal_offset = n_cl_th - n_th;
    for (std::size_t j = 0; j < drive_t.size(); ++j) {
      if (!row.onset_q && two_mode_variance_alt(n_th, drive_g[j]) < 1.0) row.onset_q = drive_t[j];
      if (!row.onset_cl && classical_tmv(n_cl_th, drive_g[j]).V_cl < 1.0) row.onset_cl = drive_t[j];
    }
    table.rows.push_back(row);
  }
  table.monotone_gap = true;
  table.monotone_rel_gap = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (!(table.rows[i].max_gap < table.rows[i - 1].max_gap)) table.monotone_gap = false;
    if (!(table.rows[i].max_rel_gap < table.rows[i - 1].max_rel_gap)) table.monotone_rel_gap = false;
  }
  return table;
}

SpectralPeak dominant_frequency(const std::vector<double>& samples, double dt) {
  const std::size_t n = samples.size();
  if (n < 4 || !(dt > 0.0)) throw DomainError("dominant_frequency needs >= 4 samples and dt > 0");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  const double bin = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  double best = -1.0;
  std::size_t best_j = 1;
  for (std::size_t j = 1; j <= n / 2; ++j) {
    complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(j * i % n) / n;
      acc += (samples[i] - mean) * std::polar(1.0, phase);
    }
    if (std::norm(acc) > best) {
      best = std::norm(acc);
      best_j = j;
    }
  }
  return {bin * static_cast<double>(best_j), bin};
}

}  // namespace bogo
