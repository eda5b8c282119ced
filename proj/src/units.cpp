#include "bogo/units.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "bogo/errors.hpp"

namespace bogo {

namespace {

constexpr double kUnitConventionTol = 1e-12;

void check_wavenumber(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw DomainError("wavenumber must be positive and finite, got " + std::to_string(k));
  }
}

void check_interaction(double U) {
  if (!std::isfinite(U)) throw DomainError("interaction must be finite");
  if (U < 0.0) {
    throw UnsupportedRegime("attractive interaction U < 0 gives a dynamically unstable dispersion");
  }
}

}  // namespace

SystemParams::SystemParams(double density_n, std::int64_t atom_number_N, double u0,
                           double temperature_T, std::vector<double> mode_grid)
    : density_n_(density_n),
      atom_number_N_(atom_number_N),
      u0_(u0),
      temperature_T_(temperature_T),
      mode_grid_(std::move(mode_grid)) {
  if (!(density_n_ > 0.0) || !(u0_ > 0.0)) {
    throw DomainError("density_n and u0 must be positive");
  }
  if (std::abs(u0_ * density_n_ - 1.0) > kUnitConventionTol) {
    throw DomainError("unit convention requires u0 * density_n == 1");
  }
  if (atom_number_N_ < 1) throw DomainError("atom_number_N must be >= 1");
  if (!(temperature_T_ >= 0.0) || !std::isfinite(temperature_T_)) {
    throw DomainError("temperature must be finite and >= 0");
  }
  for (std::size_t i = 0; i < mode_grid_.size(); ++i) {
    check_wavenumber(mode_grid_[i]);
    if (i > 0 && !(mode_grid_[i] > mode_grid_[i - 1])) {
      throw DomainError("mode grid must be strictly increasing");
    }
  }
}

double SystemParams::box_length() const { return std::cbrt(volume()); }

SystemParams SystemParams::with_temperature(double T) const {
  return SystemParams(density_n_, atom_number_N_, u0_, T, mode_grid_);
}

SystemParams SystemParams::with_mode_grid(std::vector<double> grid) const {
  return SystemParams(density_n_, atom_number_N_, u0_, temperature_T_, std::move(grid));
}

double kinetic_energy(double k) { return 0.5 * k * k; }

double dispersion(double k, double U, double density_n) {
  check_wavenumber(k);
  check_interaction(U);
  const double e_kin = kinetic_energy(k);
  return std::sqrt(e_kin * (e_kin + 2.0 * U * density_n));
}

double dispersion(double k, double U, const SystemParams& params) {
  return dispersion(k, U, params.density_n());
}

BogoliubovUV bogoliubov_uv(double k, double U, double density_n) {
  const double e_kin = kinetic_energy(k);
  const double e_k = dispersion(k, U, density_n);
  // sqrt(e_kin/e_k) and its inverse; their half-sum and half-difference give u and v.
  const double r = std::sqrt(e_kin / e_k);
  const double r_inv = std::sqrt(e_k / e_kin);
  return {0.5 * (r + r_inv), 0.5 * (r - r_inv)};
}

BogoliubovUV bogoliubov_uv(double k, double U, const SystemParams& params) {
  return bogoliubov_uv(k, U, params.density_n());
}

ModePhysics mode_physics(double k, double U, double density_n) {
  const auto [u, v] = bogoliubov_uv(k, U, density_n);
  return {k, kinetic_energy(k), dispersion(k, U, density_n), u, v};
}

ModePhysics mode_physics(double k, double U, const SystemParams& params) {
  return mode_physics(k, U, params.density_n());
}

double thermal_occupation(double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("thermal_occupation requires omega > 0");
  if (T < 0.0) throw DomainError("temperature must be >= 0");
  if (T == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / T);
}

double classical_thermal_occupation(double omega, double T) {
  if (!(omega > 0.0)) throw DomainError("classical_thermal_occupation requires omega > 0");
  if (T < 0.0) throw DomainError("temperature must be >= 0");
  return T / omega;
}

}  // namespace bogo
