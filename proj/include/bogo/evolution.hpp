#pragma once

// Linear mode evolution dS/dt = M(t) S for S = (A, B^dagger), with
//   M = [[-i w, r], [r, i w]],  r = d log sqrt(w) / dt.
// The fundamental matrix keeps the Bogoliubov form [[alpha*, beta], [beta*, alpha]],
// so it is stored as the pair (alpha, beta).

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bogo/schedule.hpp"
#include "bogo/units.hpp"

namespace bogo {

using complex = std::complex<double>;

struct BogoCoefficients {
  complex alpha{1.0, 0.0};
  complex beta{0.0, 0.0};

  /// |alpha|^2 - |beta|^2, equal to one for an exact Bogoliubov transformation.
  double normalization() const { return std::norm(alpha) - std::norm(beta); }
};

class TransferMatrix {
 public:
  TransferMatrix() = default;
  TransferMatrix(complex alpha, complex beta) : alpha_(alpha), beta_(beta) {}

  static TransferMatrix identity() { return {}; }
  /// Free evolution over dt at constant frequency: diag(e^{-i w dt}, e^{i w dt}).
  static TransferMatrix phase(double omega, double dt);

  complex alpha() const noexcept { return alpha_; }
  complex beta() const noexcept { return beta_; }
  BogoCoefficients coefficients() const { return {alpha_, beta_}; }

  /// Entry (row, col), zero-based, in the (A, B^dagger) basis.
  complex entry(int row, int col) const;
  complex trace() const { return std::conj(alpha_) + alpha_; }
  /// |alpha|^2 - |beta|^2.
  double determinant() const { return std::norm(alpha_) - std::norm(beta_); }
  TransferMatrix inverse() const { return {std::conj(alpha_), -beta_}; }
  /// Spectral norm |alpha| + |beta|.
  double norm() const { return std::abs(alpha_) + std::abs(beta_); }

  /// Matrix product: (*this) applied after rhs.
  TransferMatrix operator*(const TransferMatrix& rhs) const;
  TransferMatrix pow(unsigned n) const;

 private:
  complex alpha_{1.0, 0.0};
  complex beta_{0.0, 0.0};
};

/// Frequency history of one mode.
struct ModeDrive {
  std::function<double(double)> omega;
  std::function<double(double)> log_rate;
};

struct IntegratorOptions {
  double tol = 1e-12;
  /// Smallest admissible step relative to max(1, |t|).
  double min_relative_step = 1e-15;
  std::size_t max_steps = 100'000'000;
};

struct IntegrationResult {
  TransferMatrix matrix;
  /// Propagated bound on the global error of (alpha, beta), from the embedded
  /// local error estimates.
  double error_estimate = 0.0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of the mode system from t_from to
/// t_to (either direction), landing exactly on every breakpoint in between.
/// The Bogoliubov normalization is monitored, never enforced.
IntegrationResult integrate_linear(const ModeDrive& drive, double t_from, double t_to,
                                   std::span<const double> breakpoints,
                                   const IntegratorOptions& options = {});

/// Instantaneous re-diagonalization when the frequency jumps from omega_1 to
/// omega_2 with the field continuous.
TransferMatrix sudden_step(double omega_1, double omega_2);

ModeDrive mode_drive(const InteractionSchedule& s, double k);

/// Fundamental matrix from t_from to t_to (t_in <= t_from <= t_to). Input basis is the
/// quasiparticle basis of U(t_from), output basis that of U(t_to), both right-continuous;
/// a jump at t_to is applied, one at t_from is not.
TransferMatrix propagate(const InteractionSchedule& s, double k, double t_from, double t_to,
                         double tol = 1e-12);
IntegrationResult propagate_detailed(const InteractionSchedule& s, double k, double t_from,
                                     double t_to, double tol = 1e-12);

/// Coefficients (alpha(t), beta(t)) from t_in to each of the ascending times.
std::vector<BogoCoefficients> coefficient_history(const InteractionSchedule& s, double k,
                                                  std::span<const double> times,
                                                  double tol = 1e-12);

/// One-period fundamental matrix of a periodic schedule, started at the drive phase of t_in.
TransferMatrix monodromy(const InteractionSchedule& s, double k, double tol = 1e-12);

/// Monodromy of the square wave with each jump replaced by a tanh ramp of the given
/// width, integrated numerically over the window [t_in + T/4, t_in + 5T/4]. The window
/// is a cyclic shift of the period, so |beta| and Re(alpha) agree with monodromy()
/// in the sudden limit.
TransferMatrix smoothed_square_monodromy(const InteractionSchedule& s, double k, double width,
                                         double tol = 1e-12);

/// Parametric instability: |Re alpha^(1)| > 1 (within a 1e-9 band).
bool is_unstable(const TransferMatrix& one_period);
/// log of the spectral radius; zero when stable.
double growth_rate(const TransferMatrix& one_period);

struct ResonanceEstimate {
  /// Root of omega_k(U0) = omega_D / 2.
  std::optional<double> small_amplitude_k;
  /// Root of omega_k(U_max) + omega_k(U_min) = omega_D.
  std::optional<double> large_amplitude_k;
  /// Selected branch: small-amplitude below amplitude_switch, large-amplitude otherwise.
  std::optional<double> k;
  bool used_large_amplitude = false;
};

inline constexpr double kDefaultAmplitudeSwitch = 0.2;

/// First-resonance wavenumber. For sinusoids U_max/min = U0 (1 +- pi A / 3); for square
/// waves the actual levels U0 (1 +- pi A / 4).
ResonanceEstimate resonance_estimate(const InteractionSchedule& s, const SystemParams& params,
                                     double amplitude_switch = kDefaultAmplitudeSwitch);

/// Smallest k with omega_k(U) = target, by bracketing root search.
std::optional<double> invert_dispersion(double target_omega, double U, double density_n);

}  // namespace bogo
