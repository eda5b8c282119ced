#pragma once

// Real-particle observables of the quantum (Bogoliubov) theory for the mode pair
// (k, -k): total coefficients, occupations, anomalous correlator and the
// nonclassicality criteria built from them.

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "bogo/evolution.hpp"
#include "bogo/units.hpp"

namespace bogo {

struct TotalCoefficients {
  complex lambda;
  complex gamma;
};

/// Per-mode quantum state at an out-region time t.
struct ModeState {
  complex lambda;
  complex gamma;
  double n_k = 0.0;
  complex m_k;
  double n_th = 0.0;
  double t = 0.0;

  double gamma_sq() const { return std::norm(gamma); }
  double anomalous_sq() const { return std::norm(m_k); }
};

/// lambda = u alpha e^{i w t} + v beta e^{-i w t},  gamma = u beta e^{-i w t} + v alpha e^{i w t}.
TotalCoefficients total_coefficients(const BogoCoefficients& c, double u_out, double v_out,
                                     double omega_out, double t);

/// Total coefficients from coefficients already expressed in the instantaneous basis
/// (alpha(t), beta(t)), i.e. with the free phases included.
TotalCoefficients total_coefficients(const BogoCoefficients& instantaneous, double u, double v);

/// kappa = sqrt((1 + v^-2)(1 + |beta|^-2)).
double kappa(double v_out, double beta_mag);
/// delta = arg alpha - arg beta.
double phase_delta(const BogoCoefficients& c);

/// |gamma(t)|^2 = v^2 + |beta|^2 + 2 v^2 |beta|^2 (1 - kappa cos(2 w t + delta)).
double gamma_sq_closed(double v_out, double beta_mag, double delta_k, double omega_out, double t);

/// n_th + |gamma|^2 + 2 n_th |gamma|^2.
double occupation(double n_th, double gamma_sq);

/// m = gamma lambda^* (1 + 2 n_th).
complex anomalous(double n_th, complex lambda, complex gamma);
/// |m|^2 = |gamma|^2 (1 + |gamma|^2) (1 + 2 n_th)^2.
double anomalous_sq_closed(double n_th, double gamma_sq);

enum class ModeRelation { same_mode, opposite_momentum, independent };

/// Normally ordered G^(2,2): 2n^2, n^2 + |m|^2, n^2.
double g22(double n_k, complex m_k, ModeRelation relation);

/// V = 1 + (n^2 - |m|^2) / n. Throws DomainError for n = 0.
double two_mode_variance(double n_k, complex m_k);
/// V = n_th (1 + n_th) / (n_th (1 + 2|gamma|^2) + |gamma|^2).
double two_mode_variance_alt(double n_th, double gamma_sq);

struct Nonseparability {
  bool nonseparable;
  double d5;
};

/// D5 = (n^2 - |m|^2)((n + 1)^2 - |m|^2); nonseparable iff D5 < 0. Rejects
/// |m|^2 > n(n+1) beyond a 1e-9 relative band.
Nonseparability nonseparability(double n_k, complex m_k);

/// Var(n_k) = n + n^2: shot noise plus wave term.
double number_variance(double n_k);

/// Time-averaged occupation per mode, the seven-term expansion
/// n_th + v^2 + |b|^2 + 2(n_th v^2 + n_th |b|^2 + v^2 |b|^2) + 4 n_th v^2 |b|^2.
double time_averaged_occupation(double n_th, double v_out, double beta_sq);

struct DepletionThresholds {
  double bogoliubov_fraction = 0.1;   // Delta < 0.1 N
  double density_analysis_fraction = 0.1;  // Delta < 0.1 N / max n_k
};

struct DepletionReport {
  double total = 0.0;
  double fraction = 0.0;
  double max_n_k = 0.0;
  bool bogoliubov_invalid = false;
  bool density_analysis_invalid = false;

  int validity_flags() const {
    return (bogoliubov_invalid ? 1 : 0) | (density_analysis_invalid ? 2 : 0);
  }
};

/// Multiplicity-weighted sum of occupations, with the validity monitor.
/// weights may be empty (all ones).
DepletionReport depletion(std::span<const ModeState> spectrum, std::span<const double> weights,
                          std::int64_t atom_number_N, const DepletionThresholds& thresholds = {});
DepletionReport depletion_from_occupations(std::span<const double> occupations,
                                           std::span<const double> weights,
                                           std::int64_t atom_number_N,
                                           const DepletionThresholds& thresholds = {});

/// gamma lambda^* in closed form:
/// -|u v|(2|b|^2 + 1) + sqrt(|b|^2 + 1)|b| [2 v^2 cos(2 w t + delta) + e^{-i(2 w t + delta)}].
complex gamma_lambda_product(const BogoCoefficients& c, double u_out, double v_out,
                             double omega_out, double t);

/// Smallest t >= 0 with (2 w t + delta) mod 2 pi = pi.
double optimal_time(double delta_k, double omega_out);

struct DensityCorrelator {
  double general;   // N (2 Re m + 2 n + 1)
  double at_t_m;    // 2 N (n - |m|) + N
  bool below_noise_floor;  // at_t_m < N
};

DensityCorrelator density_correlator(std::int64_t atom_number_N, double n_k, complex m_k);

/// Complete per-mode state from coefficients and out-region mode physics.
ModeState mode_state(const BogoCoefficients& c, const ModePhysics& out, double n_th, double t);

}  // namespace bogo
