#pragma once

// Scenario harness: V(t) traces, stability charts, spectrum sweeps and
// high-temperature convergence tables.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bogo/classical_obs.hpp"
#include "bogo/evolution.hpp"
#include "bogo/quantum_obs.hpp"
#include "bogo/schedule.hpp"
#include "bogo/units.hpp"

namespace bogo {

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware concurrency).
/// Each index is visited exactly once; callers write results by index.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

enum class BoxMode { one_d, three_d_shells };

struct ModeSelection {
  /// Explicit wavenumbers; ignored when auto_resonant is set.
  std::vector<double> k_list;
  bool auto_resonant = false;
};

struct TimeGrid {
  double t_max = 20.0;
  int n_samples = 401;
  bool include_t_m = true;
};

struct Scenario {
  SystemParams params;
  InteractionSchedule schedule;
  /// Temperatures in units of mu0 = u0 n.
  std::vector<double> temperatures_over_mu;
  ModeSelection modes;
  TimeGrid times;
  BoxMode box_mode = BoxMode::three_d_shells;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Multiplicity of each grid wavenumber: the number of lattice vectors 2 pi n / L,
/// n in Z^3 \ {0}, whose length falls in the shell bounded by the midpoints to the
/// neighbouring grid values. All ones for BoxMode::one_d.
std::vector<double> shell_weights(const SystemParams& params, BoxMode mode);

/// Resolved wavenumbers of the scenario. auto_resonant snaps the resonance estimate
/// to the nearest grid value.
std::vector<double> resolve_modes(const Scenario& sc);

/// Uniform samples over [0, t_max], merged with the t_m markers of mode k when requested.
std::vector<double> time_samples(const TimeGrid& grid, std::optional<double> t_m_first,
                                 double omega_out);

namespace validity {
inline constexpr int bogoliubov_depletion = 1;
inline constexpr int density_depletion = 2;
inline constexpr int normalization = 4;
}  // namespace validity

struct ObservableRecord {
  double k = 0.0;
  double t = 0.0;
  double T = 0.0;
  double n_th = 0.0;
  double n_cl_th = 0.0;
  double beta_sq = 0.0;
  double gamma_sq = 0.0;
  double n_k = 0.0;
  double re_m_k = 0.0;
  double im_m_k = 0.0;
  double V = 0.0;
  double V_cl = 0.0;
  double d5 = 0.0;
  bool subpoisson_q = false;
  bool subpoisson_cl = false;
  bool intensity_csi = false;
  bool mode_csi = false;
  bool nonseparable = false;
  double rho_corr_q = 0.0;
  double rho_corr_cl = 0.0;
  double depletion_fraction = 0.0;
  int validity_flags = 0;
};

/// Full record from a state at out-region time t.
ObservableRecord make_record(std::int64_t atom_number_N, double k, double t, double T,
                             const BogoCoefficients& c, const ModePhysics& out, double omega_in);

/// Coefficients at the end of the drive for every grid mode.
std::vector<BogoCoefficients> end_of_drive_coefficients(const Scenario& sc,
                                                        const std::vector<double>& ks);

/// Records ordered by temperature, then mode, then time.
std::vector<ObservableRecord> run_v_trace(const Scenario& sc);

enum class StabilityMethod { analytic, smoothed_ode };

struct TongueBoundary {
  double amplitude_A;
  double k_lower;  // stable -> unstable crossing, ascending k
  double k_upper;  // unstable -> stable crossing
};

struct StabilityChart {
  std::vector<double> k_grid;
  std::vector<double> A_grid;
  /// [k index][A index]
  std::vector<std::vector<bool>> unstable;
  std::vector<std::vector<double>> growth;
  std::vector<TongueBoundary> boundaries;
};

/// Monodromy sweep over (k, A) for the periodic family of `schedule`.
StabilityChart stability_chart(const InteractionSchedule& schedule, const std::vector<double>& k_grid,
                               const std::vector<double>& A_grid,
                               StabilityMethod method = StabilityMethod::analytic,
                               double tol = 1e-12, unsigned threads = 1);

struct SpectrumResult {
  std::vector<ObservableRecord> records;  // ordered by temperature, then k
  /// Polynomial (Richardson) extrapolation of V to k -> 0 through the three
  /// smallest grid values, one entry per temperature.
  std::vector<double> v_k0;
};

SpectrumResult spectrum_sweep(const Scenario& sc, double t);

/// Value at x = 0 of the quadratic through three points.
double richardson_to_zero(const double x[3], const double y[3]);

struct ConvergenceRow {
  double T_over_mu = 0.0;
  double max_gap = 0.0;       // max_t |V - V_cl|
  double max_rel_gap = 0.0;   // max_t |V - V_cl| / V
  double thermal_offset = 0.0;  // n_cl_th - n_th of the mode
  /// First time during the drive (t < 0) where each criterion holds; from the
  /// instantaneous-basis coefficients.
  std::optional<double> onset_q;
  std::optional<double> onset_cl;
};

struct ConvergenceTable {
  double k = 0.0;
  std::vector<ConvergenceRow> rows;
  bool monotone_gap = false;      // max_gap strictly decreasing in T
  bool monotone_rel_gap = false;  // max_rel_gap strictly decreasing in T
};

/// Convergence of the quantum and classical V for the first selected mode.
/// `samples_per_period` sets the onset search resolution during the drive.
ConvergenceTable high_t_convergence(const Scenario& sc, int samples_per_period = 200);

/// Angular frequency of the largest non-DC peak of the discrete spectrum of
/// uniformly sampled data, with the bin width 2 pi / (n dt).
struct SpectralPeak {
  double omega;
  double bin_width;
};
SpectralPeak dominant_frequency(const std::vector<double>& samples, double dt);

}  // namespace bogo
