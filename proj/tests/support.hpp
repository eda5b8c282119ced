#pragma once

// Shared generators for randomized state sweeps.

#include <cmath>
#include <complex>
#include <random>

#include "bogo/evolution.hpp"
#include "bogo/quantum_obs.hpp"
#include "bogo/units.hpp"

namespace bogo::testing {

struct RandomState {
  double omega;  // out-region mode energy
  double T;
  double n_th;
  double u, v;
  BogoCoefficients c;
  double t;
};

/// Random Gaussian state: a random mode and interaction fix (omega, u, v), a random
/// Bogoliubov pair (alpha, beta) with |alpha|^2 - |beta|^2 = 1, log-uniform temperature.
inline RandomState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double k = std::pow(10.0, -1.5 + 2.0 * unit(rng));
  const double U = 2.0 * unit(rng);
  const auto mp = mode_physics(k, U, 1.0);
  const double T = std::pow(10.0, -2.0 + 3.5 * unit(rng));
  const double r = 3.0 * unit(rng) * unit(rng);
  const double pa = 2.0 * M_PI * unit(rng);
  const double pb = 2.0 * M_PI * unit(rng);
  RandomState s;
  s.omega = mp.e_k;
  s.T = T;
  s.n_th = thermal_occupation(mp.e_k, T);
  s.u = mp.u_k;
  s.v = mp.v_k;
  s.c = {std::polar(std::cosh(r), pa), std::polar(std::sinh(r), pb)};
  s.t = 10.0 * unit(rng);
  return s;
}

}  // namespace bogo::testing
