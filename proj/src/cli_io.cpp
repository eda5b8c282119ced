#include "bogo/cli_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "bogo/errors.hpp"

#ifndef BOGO_VERSION
#define BOGO_VERSION "0.1.0"
#endif

namespace bogo {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where(key) + " must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), where(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return "'" + path_ + "'";
    return "'" + (path_.empty() ? key : path_ + "." + key) + "'";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

ojson numbers_json(const std::vector<double>& xs) {
  ojson a = ojson::array();
  for (double x : xs) a.push_back(x);
  return a;
}

std::string box_mode_name(BoxMode m) { return m == BoxMode::one_d ? "1d" : "3d-shells"; }

}  // namespace

ScenarioConfig parse_config(const json& doc, const CliOverrides& overrides) {
  Section root(doc, "");
  const auto version = root.integer("schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError(fmt::format("schema_version {} is not supported (expected {})", version,
                                  kSchemaVersion));
  }
  ojson resolved;
  resolved["schema_version"] = kSchemaVersion;

  // system
  Section sys = root.child("system");
  const double density_n = sys.number("density_n", 1.0);
  const std::int64_t atom_number_N = sys.integer("atom_number_N");
  const double u0 = sys.number("u0", 1.0 / density_n);
  const std::string box = sys.string("box_mode", "3d-shells");
  BoxMode box_mode;
  if (box == "1d") {
    box_mode = BoxMode::one_d;
  } else if (box == "3d-shells") {
    box_mode = BoxMode::three_d_shells;
  } else {
    throw ConfigError("'system.box_mode' must be \"1d\" or \"3d-shells\"");
  }
  sys.finish();
  resolved["system"] = {{"density_n", density_n},
                        {"atom_number_N", atom_number_N},
                        {"u0", u0},
                        {"box_mode", box_mode_name(box_mode)}};

  // modes
  Section modes = root.child("modes");
  ModeSelection selection;
  std::vector<double> grid;
  ojson modes_json;
  const bool has_list = modes.has("k_list");
  selection.auto_resonant = modes.boolean("auto_resonant", false);
  if (has_list) {
    selection.k_list = modes.numbers("k_list");
    if (selection.k_list.empty()) throw ConfigError("'modes.k_list' must not be empty");
  }
  if (has_list && selection.auto_resonant) {
    throw ConfigError("'modes' takes either k_list or auto_resonant, not both");
  }
  if (modes.has("grid")) {
    Section g = modes.child("grid");
    const double k_min = g.number("k_min");
    const double k_max = g.number("k_max");
    const auto n = g.integer("n");
    g.finish();
    if (n < 1 || !(k_min > 0.0) || (n > 1 && !(k_max > k_min))) {
      throw ConfigError("'modes.grid' needs 0 < k_min < k_max and n >= 1");
    }
    for (std::int64_t i = 0; i < n; ++i) {
      grid.push_back(n == 1 ? k_min : k_min + (k_max - k_min) * static_cast<double>(i) / (n - 1));
    }
    modes_json["grid"] = {{"k_min", k_min}, {"k_max", k_max}, {"n", n}};
  } else if (has_list) {
    grid = selection.k_list;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  } else {
    throw ConfigError("'modes' needs a grid (required for auto_resonant) or a k_list");
  }
  modes.finish();
  if (!has_list && !selection.auto_resonant) selection.k_list = grid;
  if (has_list) modes_json["k_list"] = numbers_json(selection.k_list);
  modes_json["auto_resonant"] = selection.auto_resonant;
  resolved["modes"] = modes_json;

  // temperatures
  const auto temps = root.numbers("temperatures_over_mu");
  if (temps.empty()) throw ConfigError("'temperatures_over_mu' must not be empty");
  for (double T : temps) {
    if (!(T >= 0.0)) throw ConfigError("'temperatures_over_mu' entries must be >= 0");
  }
  resolved["temperatures_over_mu"] = numbers_json(temps);

  SystemParams params = [&] {
    try {
      return SystemParams(density_n, atom_number_N, u0, temps.front(), grid);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid system: ") + e.what());
    }
  }();

  // schedule
  Section sch = root.child("schedule");
  const std::string kind_name = sch.string("kind", "sinusoid");
  ojson sched_json;
  sched_json["kind"] = kind_name;
  std::optional<InteractionSchedule> schedule;
  try {
    const ScheduleKind kind = schedule_kind_from_string(kind_name);
    switch (kind) {
      case ScheduleKind::constant: {
        const double t_in = sch.number("t_in", 0.0);
        schedule = InteractionSchedule::constant(params, t_in);
        sched_json["t_in"] = t_in;
        break;
      }
      case ScheduleKind::sinusoid:
      case ScheduleKind::square_wave: {
        const double A = sch.number("A");
        const double wD = sch.number("omega_D");
        const auto np = sch.integer("n_periods");
        if (np < 0 || np > 1'000'000) throw ConfigError("'schedule.n_periods' out of range");
        schedule = kind == ScheduleKind::sinusoid
                       ? InteractionSchedule::sinusoid(params, A, wD, static_cast<int>(np))
                       : InteractionSchedule::square_wave(params, A, wD, static_cast<int>(np));
        sched_json["A"] = A;
        sched_json["omega_D"] = wD;
        sched_json["n_periods"] = np;
        if (kind == ScheduleKind::square_wave) sched_json["phase"] = "starts on the low level";
        break;
      }
      case ScheduleKind::piecewise_constant: {
        const json& segs = sch.raw("segments");
        if (!segs.is_array()) throw ConfigError("'schedule.segments' must be an array");
        std::vector<PiecewiseSegment> segments;
        ojson seg_json = ojson::array();
        for (std::size_t i = 0; i < segs.size(); ++i) {
          Section seg(segs[i], fmt::format("schedule.segments[{}]", i));
          const double d = seg.number("duration");
          const double U = seg.number("U");
          seg.finish();
          segments.push_back({d, U});
          seg_json.push_back({{"duration", d}, {"U", U}});
        }
        schedule = InteractionSchedule::piecewise_constant(params, segments);
        sched_json["segments"] = seg_json;
        break;
      }
      case ScheduleKind::sampled: {
        const double dt = sch.number("dt");
        const auto samples = sch.numbers("samples");
        schedule = InteractionSchedule::sampled(params, dt, samples);
        sched_json["dt"] = dt;
        sched_json["samples"] = numbers_json(samples);
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid schedule: ") + e.what());
  }
  sch.finish();
  resolved["schedule"] = sched_json;

  // times
  TimeGrid times;
  if (root.has("times")) {
    Section t = root.child("times");
    times.t_max = t.number("t_max", times.t_max);
    times.n_samples = static_cast<int>(t.integer("n_samples", times.n_samples));
    times.include_t_m = t.boolean("include_t_m", times.include_t_m);
    t.finish();
  }
  if (!(times.t_max >= 0.0) || times.n_samples < 1) {
    throw ConfigError("'times' needs t_max >= 0 and n_samples >= 1");
  }
  resolved["times"] = {
      {"t_max", times.t_max}, {"n_samples", times.n_samples}, {"include_t_m", times.include_t_m}};

  // integrator
  double tol = 1e-12;
  if (root.has("integrator")) {
    Section in = root.child("integrator");
    tol = in.number("tol", tol);
    in.finish();
  }
  if (overrides.tol) tol = *overrides.tol;
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("integrator tolerance must lie in (0, 1)");
  resolved["integrator"] = {{"tol", tol}};

  // monte_carlo
  MonteCarloConfig mc;
  std::uint64_t seed = 0;
  if (root.has("monte_carlo")) {
    Section m = root.child("monte_carlo");
    mc.samples = m.unsigned_integer("samples", mc.samples);
    seed = m.unsigned_integer("seed", seed);
    m.finish();
  }
  if (overrides.seed) seed = *overrides.seed;
  if (mc.samples < kMinEnsembleSamples) {
    throw ConfigError("'monte_carlo.samples' must be at least 1000");
  }
  resolved["monte_carlo"] = {{"samples", mc.samples}, {"seed", seed}};

  // stability
  StabilityConfig stab;
  if (root.has("stability")) {
    Section s = root.child("stability");
    if (s.has("A_values")) stab.A_values = s.numbers("A_values");
    const std::string method = s.string("method", "analytic");
    if (method == "analytic") {
      stab.method = StabilityMethod::analytic;
    } else if (method == "smoothed_ode") {
      stab.method = StabilityMethod::smoothed_ode;
    } else {
      throw ConfigError("'stability.method' must be \"analytic\" or \"smoothed_ode\"");
    }
    s.finish();
  }
  if (stab.A_values.empty()) throw ConfigError("'stability.A_values' must not be empty");
  resolved["stability"] = {
      {"A_values", numbers_json(stab.A_values)},
      {"method", stab.method == StabilityMethod::analytic ? "analytic" : "smoothed_ode"}};

  // output
  OutputFormat format = OutputFormat::csv;
  std::filesystem::path out_dir = ".";
  if (root.has("output")) {
    Section o = root.child("output");
    const std::string f = o.string("format", "csv");
    if (f == "csv") {
      format = OutputFormat::csv;
    } else if (f == "json") {
      format = OutputFormat::json;
    } else {
      throw ConfigError("'output.format' must be \"csv\" or \"json\"");
    }
    out_dir = o.string("path", ".");
    o.finish();
  }
  if (overrides.out_dir) out_dir = *overrides.out_dir;
  resolved["output"] = {{"format", format == OutputFormat::csv ? "csv" : "json"}};
  root.finish();

  Scenario sc{params, *schedule, temps, selection, times, box_mode, tol, seed, 1};
  if (overrides.threads) sc.threads = *overrides.threads;
  return ScenarioConfig{std::move(sc), mc, stab, format, out_dir, resolved};
}

ScenarioConfig load_config(const std::filesystem::path& path, const CliOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, overrides);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "k",        "t",          "T",          "n_th",          "n_cl_th",     "beta_sq",
      "gamma_sq", "n_k",        "re_m_k",     "im_m_k",        "V",           "V_cl",
      "d5",       "subpoisson_q", "subpoisson_cl", "intensity_csi", "mode_csi", "nonseparable",
      "rho_corr_q", "rho_corr_cl", "depletion_fraction", "validity_flags"};
  return cols;
}

std::string csv_header() {
  std::string out;
  for (const auto& c : record_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string csv_row(const ObservableRecord& r) {
  auto b = [](bool x) { return x ? "1" : "0"; };
  auto d = format_double;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", d(r.k),
                     d(r.t), d(r.T), d(r.n_th), d(r.n_cl_th), d(r.beta_sq), d(r.gamma_sq),
                     d(r.n_k), d(r.re_m_k), d(r.im_m_k), d(r.V), d(r.V_cl), d(r.d5),
                     b(r.subpoisson_q), b(r.subpoisson_cl), b(r.intensity_csi), b(r.mode_csi),
                     b(r.nonseparable), d(r.rho_corr_q), d(r.rho_corr_cl),
                     d(r.depletion_fraction), r.validity_flags);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// JSON numbers via the same round-trip formatting as the CSV files.
std::string json_records(const std::vector<ObservableRecord>& rows) {
  const auto& cols = record_columns();
  std::string out = "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string line = csv_row(rows[i]);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    out += "  {";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string v = cells[c];
      if (v == "nan" || v == "inf" || v == "-inf") v = "null";
      out += fmt::format("{}\"{}\": {}", c ? ", " : "", cols[c], v);
    }
    out += i + 1 < rows.size() ? "},\n" : "}\n";
  }
  out += "]\n";
  return out;
}

}  // namespace

void write_records(const std::filesystem::path& path, const std::vector<ObservableRecord>& rows,
                   OutputFormat format) {
  if (format == OutputFormat::json) {
    write_text(path, json_records(rows));
    return;
  }
  std::string text = csv_header() + "\n";
  for (const auto& r : rows) text += csv_row(r) + "\n";
  write_text(path, text);
}

std::string version_string() { return BOGO_VERSION; }

namespace {

std::string extension(OutputFormat f) { return f == OutputFormat::csv ? ".csv" : ".json"; }

std::string temperature_tag(double t_over_mu) { return "T" + format_double(t_over_mu); }

ojson metadata(const std::string& command, const ScenarioConfig& cfg,
               const std::vector<std::string>& files) {
  const auto& s = cfg.scenario.schedule;
  const double n = s.density_n();
  ojson m;
  m["command"] = command;
  m["version"] = version_string();
  m["config"] = cfg.resolved;
  m["seed"] = cfg.scenario.seed;
  m["tolerance"] = cfg.scenario.tol;
  m["conventions"] = {
      {"units", "hbar = m = k_B = 1; energies in mu0 = u0 n; wavenumbers in inverse healing length"},
      {"mu0", cfg.scenario.params.mu0()},
      {"mu_drive_start", s.interaction_at(s.t_in()) * n},
      {"mu_out", s.u_out() * n},
      {"temperature_unit", "mu0"},
      {"time_origin", "drive switched off at t = 0"},
      {"validity_flags",
       "bit 1: depletion >= 0.1 N; bit 2: depletion >= 0.1 N / max n_k; bit 4: normalization"}};
  m["columns"] = record_columns();
  m["files"] = files;
  return m;
}

void write_metadata(const std::filesystem::path& dir, const std::string& command,
                    const ojson& meta) {
  write_text(dir / (command + "_meta.json"), meta.dump(2) + "\n");
}

// Runs `body` with the config, mapping failures onto exit codes.
template <class Body>
int run_command(const std::filesystem::path& config, const CliOverrides& overrides,
                std::ostream& err, Body body) {
  std::optional<ScenarioConfig> cfg;
  try {
    cfg.emplace(load_config(config, overrides));
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  }
  try {
    return body(*cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return exit_code::numeric_failure;
  }
}

}  // namespace

int cmd_vtrace(const std::filesystem::path& config, const CliOverrides& overrides,
               std::ostream& out, std::ostream& err) {
  return run_command(config, overrides, err, [&](const ScenarioConfig& cfg) {
    const auto& sc = cfg.scenario;
    const auto rows = run_v_trace(sc);
    std::vector<std::string> files;
    for (double t_over_mu : sc.temperatures_over_mu) {
      const double T = t_over_mu * sc.params.mu0();
      std::vector<ObservableRecord> subset;
      for (const auto& r : rows) {
        if (r.T == T) subset.push_back(r);
      }
      const std::string name = "vtrace_" + temperature_tag(t_over_mu) + extension(cfg.format);
      write_records(cfg.out_dir / name, subset, cfg.format);
      files.push_back(name);
    }
    auto meta = metadata("vtrace", cfg, files);
    meta["modes"] = resolve_modes(sc);
    write_metadata(cfg.out_dir, "vtrace", meta);
    bool flagged = false;
    for (const auto& r : rows) flagged = flagged || r.validity_flags != 0;
    if (flagged) err << "warning: validity monitor tripped on some records (see validity_flags)\n";
    out << "wrote " << files.size() << " trace files to " << cfg.out_dir.string() << "\n";
    return exit_code::ok;
  });
}

int cmd_stability(const std::filesystem::path& config, const CliOverrides& overrides,
                  std::ostream& out, std::ostream& err) {
  return run_command(config, overrides, err, [&](const ScenarioConfig& cfg) {
    const auto& sc = cfg.scenario;
    const auto& ks = sc.params.mode_grid();
    const auto chart = stability_chart(sc.schedule, ks, cfg.stability.A_values,
                                       cfg.stability.method, sc.tol, sc.threads);
    auto matrix = [&](auto cell) {
      std::string text = "k";
      for (double A : chart.A_grid) text += "," + format_double(A);
      text += "\n";
      for (std::size_t i = 0; i < chart.k_grid.size(); ++i) {
        text += format_double(chart.k_grid[i]);
        for (std::size_t j = 0; j < chart.A_grid.size(); ++j) text += "," + cell(i, j);
        text += "\n";
      }
      return text;
    };
    write_text(cfg.out_dir / "stability_growth.csv",
               matrix([&](std::size_t i, std::size_t j) { return format_double(chart.growth[i][j]); }));
    write_text(cfg.out_dir / "stability_unstable.csv",
               matrix([&](std::size_t i, std::size_t j) {
                 return std::string(chart.unstable[i][j] ? "1" : "0");
               }));
    std::string b = "A,k_lower,k_upper\n";
    for (const auto& tb : chart.boundaries) {
      b += format_double(tb.amplitude_A) + "," + format_double(tb.k_lower) + "," +
           format_double(tb.k_upper) + "\n";
    }
    write_text(cfg.out_dir / "stability_boundaries.csv", b);
    const std::vector<std::string> files{"stability_growth.csv", "stability_unstable.csv",
                                         "stability_boundaries.csv"};
    write_metadata(cfg.out_dir, "stability", metadata("stability", cfg, files));
    out << "wrote stability chart (" << ks.size() << " x " << chart.A_grid.size() << ") to "
        << cfg.out_dir.string() << "\n";
    return exit_code::ok;
  });
}

int cmd_spectrum(const std::filesystem::path& config, const CliOverrides& overrides,
                 std::ostream& out, std::ostream& err) {
  return run_command(config, overrides, err, [&](const ScenarioConfig& cfg) {
    const auto& sc = cfg.scenario;
    const double t = overrides.time.value_or(0.0);
    const auto res = spectrum_sweep(sc, t);
    std::vector<std::string> files;
    const std::size_t per_T = sc.params.mode_grid().size();
    for (std::size_t i = 0; i < sc.temperatures_over_mu.size(); ++i) {
      const std::vector<ObservableRecord> subset(res.records.begin() + i * per_T,
                                                 res.records.begin() + (i + 1) * per_T);
      const std::string name =
          "spectrum_" + temperature_tag(sc.temperatures_over_mu[i]) + extension(cfg.format);
      write_records(cfg.out_dir / name, subset, cfg.format);
      files.push_back(name);
    }
    std::string ex = "T_over_mu,V_k0\n";
    for (std::size_t i = 0; i < res.v_k0.size(); ++i) {
      ex += format_double(sc.temperatures_over_mu[i]) + "," + format_double(res.v_k0[i]) + "\n";
      out << "T/mu = " << format_double(sc.temperatures_over_mu[i])
          << ": V(k -> 0) = " << format_double(res.v_k0[i]) << "\n";
    }
    write_text(cfg.out_dir / "spectrum_k0.csv", ex);
    files.push_back("spectrum_k0.csv");
    auto meta = metadata("spectrum", cfg, files);
    meta["time"] = t;
    write_metadata(cfg.out_dir, "spectrum", meta);
    return exit_code::ok;
  });
}

int cmd_resonance(const std::filesystem::path& config, const CliOverrides& overrides,
                  std::ostream& out, std::ostream& err) {
  return run_command(config, overrides, err, [&](const ScenarioConfig& cfg) {
    const auto& sc = cfg.scenario;
    const auto est = resonance_estimate(sc.schedule, sc.params);
    auto show = [](const std::optional<double>& k) { return k ? format_double(*k) : "none"; };
    out << "small-amplitude k: " << show(est.small_amplitude_k) << "\n";
    out << "large-amplitude k: " << show(est.large_amplitude_k) << "\n";
    out << "selected (" << (est.used_large_amplitude ? "large" : "small") << "-amplitude): "
        << show(est.k) << "\n";
    ojson r;
    auto opt = [](const std::optional<double>& k) { return k ? ojson(*k) : ojson(nullptr); };
    r["small_amplitude_k"] = opt(est.small_amplitude_k);
    r["large_amplitude_k"] = opt(est.large_amplitude_k);
    r["k"] = opt(est.k);
    r["used_large_amplitude"] = est.used_large_amplitude;
    r["amplitude_switch"] = kDefaultAmplitudeSwitch;
    if (est.k) {
      const auto& g = sc.params.mode_grid();
      r["nearest_grid_k"] = *std::min_element(g.begin(), g.end(), [&](double a, double b) {
        return std::abs(a - *est.k) < std::abs(b - *est.k);
      });
    }
    auto meta = metadata("resonance", cfg, {});
    meta["resonance"] = r;
    write_metadata(cfg.out_dir, "resonance", meta);
    return exit_code::ok;
  });
}

int cmd_mc_validate(const std::filesystem::path& config, const CliOverrides& overrides,
                    std::ostream& out, std::ostream& err) {
  return run_command(config, overrides, err, [&](const ScenarioConfig& cfg) {
    const auto& sc = cfg.scenario;
    const auto& s = sc.schedule;
    const auto ks = resolve_modes(sc);
    EnsembleOptions opt;
    opt.sample_count = cfg.monte_carlo.samples;
    opt.seed = sc.seed;
    opt.threads = sc.threads;

    // Undriven reference: the same family at zero amplitude, or the schedule itself.
    const InteractionSchedule undriven =
        s.drive_period() ? s.with_amplitude(0.0) : InteractionSchedule::constant(sc.params);

    std::string text = "case,k,T,quantity,expected,estimate,std_error,z\n";
    double worst = 0.0;
    for (const auto& [label, sched] :
         {std::pair<std::string, const InteractionSchedule*>{"undriven", &undriven},
          std::pair<std::string, const InteractionSchedule*>{"driven", &s}}) {
      for (double k : ks) {
        const BogoCoefficients c = propagate(*sched, k, sched->t_in(), 0.0, sc.tol).coefficients();
        const auto o = mode_physics(k, sched->u_out(), sched->density_n());
        const double t = optimal_time(phase_delta(c), o.e_k);
        const auto [lambda, gamma] = total_coefficients(c, o.u_k, o.v_k, o.e_k, t);
        for (double t_over_mu : sc.temperatures_over_mu) {
          const double T = t_over_mu * sc.params.mu0();
          if (!(T > 0.0)) throw ConfigError("mc-validate needs temperatures > 0");
          const double ncl_th = classical_thermal_occupation(sched->omega(k, sched->t_in()), T);
          const auto e = monte_carlo_ensemble(lambda, gamma, ncl_th, opt);
          const double g = std::norm(gamma);
          const double n = classical_occupation(ncl_th, g);
          const complex m = classical_anomalous(ncl_th, lambda, gamma);
          const std::vector<std::pair<std::string, std::pair<double, Moment>>> checks{
              {"E(I_a)", {n, e.intensity_a}},
              {"E(I_b)", {n, e.intensity_b}},
              {"E(I_aI_a)", {2.0 * n * n, e.intensity_aa}},
              {"E(I_aI_b)", {n * n + std::norm(m), e.intensity_ab}},
              {"Re E(ab)", {m.real(), e.anomalous_re}},
              {"Im E(ab)", {m.imag(), e.anomalous_im}},
              {"V_cl", {classical_tmv(ncl_th, g).V_cl, e.v_cl}}};
          for (const auto& [name, pair] : checks) {
            const auto& [expect, est] = pair;
            const double z = est.std_error > 0.0 ? (est.mean - expect) / est.std_error : 0.0;
            worst = std::max(worst, std::abs(z));
            text += fmt::format("{},{},{},{},{},{},{},{}\n", label, format_double(k),
                                format_double(T), name, format_double(expect),
                                format_double(est.mean), format_double(est.std_error),
                                format_double(z));
          }
        }
      }
    }
    write_text(cfg.out_dir / "mc_validate.csv", text);
    auto meta = metadata("mc-validate", cfg, {"mc_validate.csv"});
    meta["samples"] = cfg.monte_carlo.samples;
    meta["max_abs_z"] = worst;
    write_metadata(cfg.out_dir, "mc_validate", meta);
    out << "max |z| = " << format_double(worst) << "\n";
    if (worst >= 4.0) {
      err << "Monte Carlo validation failed: |z| >= 4\n";
      return exit_code::numeric_failure;
    }
    return exit_code::ok;
  });
}

}  // namespace bogo
