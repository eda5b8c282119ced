#pragma once

// Classical reference: equipartition initial amplitudes pushed through the same
// linear transfer as the quantum theory.

#include <cstdint>
#include <optional>

#include "bogo/evolution.hpp"
#include "bogo/quantum_obs.hpp"
#include "bogo/schedule.hpp"
#include "bogo/units.hpp"

namespace bogo {

struct ClassicalModeState {
  double n_cl_th = 0.0;
  double n_cl = 0.0;
  complex m_cl;
  double t = 0.0;
};

/// (2|gamma|^2 + 1) n_cl_th.
double classical_occupation(double n_cl_th, double gamma_sq);
/// 4 (|gamma|^2 + 1) |gamma|^2 n_cl_th^2.
double classical_anomalous_sq(double n_cl_th, double gamma_sq);
/// 2 gamma lambda^* n_cl_th.
complex classical_anomalous(double n_cl_th, complex lambda, complex gamma);

ClassicalModeState classical_mode_state(double n_cl_th, complex lambda, complex gamma, double t);

struct ClassicalTmv {
  double V_cl;
  /// |gamma|^2 > n_cl_th(T/2) - 1/2, i.e. V_cl < 1.
  bool sub_poissonian;
};

/// V_cl = n_cl_th / (2|gamma|^2 + 1).
ClassicalTmv classical_tmv(double n_cl_th, double gamma_sq);

struct ClassicalDensityCorrelator {
  double general;  // N (2 Re m + 2 n)
  double at_t_m;   // 2 N (n - |m|)
};

ClassicalDensityCorrelator classical_density_correlator(std::int64_t atom_number_N, double n_cl,
                                                        complex m_cl);

inline constexpr std::uint64_t kMinEnsembleSamples = 1000;

struct Moment {
  double mean = 0.0;
  double std_error = 0.0;
};

struct EnsembleEstimate {
  std::uint64_t sample_count = 0;
  std::uint64_t rng_seed = 0;
  Moment intensity_a;        // E(I_a)
  Moment intensity_b;        // E(I_b)
  Moment intensity_aa;       // E(I_a I_a)
  Moment intensity_ab;       // E(I_a I_b)
  Moment anomalous_re;       // Re E(a b)
  Moment anomalous_im;       // Im E(a b)
  Moment quasi_intensity;    // E(|A|^2), the undriven equipartition check
  /// Empirical V_cl = E((I_a - I_b)^2) / E(I_a + I_b), with a delta-method error.
  Moment v_cl;
};

struct EnsembleOptions {
  std::uint64_t sample_count = 100'000;
  std::uint64_t seed = 0;
  /// 0 selects std::thread::hardware_concurrency(). Results do not depend on it.
  unsigned threads = 1;
};

/// Gaussian ensemble with <|A|^2> = <|B|^2> = n_cl_th and <AB> = 0, transformed as
/// a = lambda^* A + gamma B^*, b = lambda^* B + gamma A^*.
EnsembleEstimate monte_carlo_ensemble(complex lambda, complex gamma, double n_cl_th,
                                      const EnsembleOptions& options);

/// Ensemble for mode k of a schedule, evaluated at out-region time t.
EnsembleEstimate monte_carlo_ensemble(const InteractionSchedule& s, double k, double t,
                                      const SystemParams& params, const EnsembleOptions& options,
                                      double tol = 1e-12);

}  // namespace bogo
