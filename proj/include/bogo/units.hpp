#pragma once

// Dimensionless unit system: hbar = m = k_B = 1, energies in units of the
// baseline chemical potential mu0 = u0 * n, wavenumbers in units of the inverse
// healing length.

#include <cstdint>
#include <vector>

namespace bogo {

class SystemParams {
 public:
  /// Throws DomainError unless u0 * density_n == 1, atom_number_N >= 1, T >= 0
  /// and the mode grid is strictly increasing and positive.
  SystemParams(double density_n, std::int64_t atom_number_N, double u0, double temperature_T,
               std::vector<double> mode_grid);

  double density_n() const noexcept { return density_n_; }
  std::int64_t atom_number_N() const noexcept { return atom_number_N_; }
  double u0() const noexcept { return u0_; }
  double temperature_T() const noexcept { return temperature_T_; }
  const std::vector<double>& mode_grid() const noexcept { return mode_grid_; }

  /// Box volume V = N / n.
  double volume() const noexcept { return static_cast<double>(atom_number_N_) / density_n_; }
  double box_length() const;

  /// Baseline chemical potential U0 n (== 1 by convention).
  double mu0() const noexcept { return u0_ * density_n_; }

  SystemParams with_temperature(double T) const;
  SystemParams with_mode_grid(std::vector<double> grid) const;

 private:
  double density_n_;
  std::int64_t atom_number_N_;
  double u0_;
  double temperature_T_;
  std::vector<double> mode_grid_;
};

struct ModePhysics {
  double k;
  double e_kin;
  double e_k;
  double u_k;
  double v_k;
};

struct BogoliubovUV {
  double u;
  double v;
};

double kinetic_energy(double k);

/// Bogoliubov dispersion sqrt(e_kin (e_kin + 2 U n)).
double dispersion(double k, double U, const SystemParams& params);
double dispersion(double k, double U, double density_n);

BogoliubovUV bogoliubov_uv(double k, double U, const SystemParams& params);
BogoliubovUV bogoliubov_uv(double k, double U, double density_n);

ModePhysics mode_physics(double k, double U, const SystemParams& params);
ModePhysics mode_physics(double k, double U, double density_n);

/// Bose-Einstein occupation 1/(exp(omega/T) - 1); zero at T = 0.
double thermal_occupation(double omega, double T);

/// Rayleigh-Jeans occupation T/omega.
double classical_thermal_occupation(double omega, double T);

}  // namespace bogo
