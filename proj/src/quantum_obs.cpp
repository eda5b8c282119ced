#include "bogo/quantum_obs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bogo/errors.hpp"

namespace bogo {

TotalCoefficients total_coefficients(const BogoCoefficients& c, double u_out, double v_out,
                                     double omega_out, double t) {
  const complex forward = std::polar(1.0, omega_out * t);
  return total_coefficients(BogoCoefficients{c.alpha * forward, c.beta * std::conj(forward)},
                            u_out, v_out);
}

TotalCoefficients total_coefficients(const BogoCoefficients& c, double u, double v) {
  return {u * c.alpha + v * c.beta, u * c.beta + v * c.alpha};
}

double kappa(double v_out, double beta_mag) {
  return std::sqrt((1.0 + 1.0 / (v_out * v_out)) * (1.0 + 1.0 / (beta_mag * beta_mag)));
}

double phase_delta(const BogoCoefficients& c) { return std::arg(c.alpha) - std::arg(c.beta); }

double gamma_sq_closed(double v_out, double beta_mag, double delta_k, double omega_out, double t) {
  const double v2 = v_out * v_out;
  const double b2 = beta_mag * beta_mag;
  if (v_out == 0.0 || beta_mag == 0.0) return v2 + b2;
  return v2 + b2 + 2.0 * v2 * b2 * (1.0 - kappa(v_out, beta_mag) * std::cos(2.0 * omega_out * t + delta_k));
}

double occupation(double n_th, double gamma_sq) {
  return n_th + gamma_sq + 2.0 * n_th * gamma_sq;
}

complex anomalous(double n_th, complex lambda, complex gamma) {
  return gamma * std::conj(lambda) * (1.0 + 2.0 * n_th);
}

double anomalous_sq_closed(double n_th, double gamma_sq) {
  const double f = 1.0 + 2.0 * n_th;
  return gamma_sq * (1.0 + gamma_sq) * f * f;
}

double g22(double n_k, complex m_k, ModeRelation relation) {
  if (n_k < 0.0) throw DomainError("occupation must be >= 0");
  switch (relation) {
    case ModeRelation::same_mode: return 2.0 * n_k * n_k;
    case ModeRelation::opposite_momentum: return n_k * n_k + std::norm(m_k);
    case ModeRelation::independent: return n_k * n_k;
  }
  return 0.0;
}

double two_mode_variance(double n_k, complex m_k) {
  if (!(n_k > 0.0)) throw DomainError("two-mode variance undefined for n_k = 0 (vacuum)");
  return 1.0 + (n_k * n_k - std::norm(m_k)) / n_k;
}

double two_mode_variance_alt(double n_th, double gamma_sq) {
  const double denom = n_th * (1.0 + 2.0 * gamma_sq) + gamma_sq;
  if (!(denom > 0.0)) throw DomainError("two-mode variance undefined for n_th = gamma = 0");
  return n_th * (1.0 + n_th) / denom;
}

Nonseparability nonseparability(double n_k, complex m_k) {
  const double m2 = std::norm(m_k);
  const double bound = n_k * (n_k + 1.0);
  if (m2 > bound + 1e-9 * std::max(1.0, bound)) {
    throw DomainError("unphysical state: |m|^2 exceeds n (n + 1)");
  }
  const double d5 = (n_k * n_k - m2) * ((n_k + 1.0) * (n_k + 1.0) - m2);
  return {d5 < 0.0, d5};
}

double number_variance(double n_k) { return n_k + n_k * n_k; }

double time_averaged_occupation(double n_th, double v_out, double beta_sq) {
  const double v2 = v_out * v_out;
  return n_th + v2 + beta_sq + 2.0 * (n_th * v2 + n_th * beta_sq + v2 * beta_sq) +
         4.0 * n_th * v2 * beta_sq;
}

DepletionReport depletion_from_occupations(std::span<const double> occupations,
                                           std::span<const double> weights,
                                           std::int64_t atom_number_N,
                                           const DepletionThresholds& thresholds) {
  if (!weights.empty() && weights.size() != occupations.size()) {
    throw DomainError("depletion weights must match the spectrum size");
  }
  DepletionReport r;
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    r.total += w * occupations[i];
    r.max_n_k = std::max(r.max_n_k, occupations[i]);
  }
  const double N = static_cast<double>(atom_number_N);
  r.fraction = r.total / N;
  r.bogoliubov_invalid = r.total >= thresholds.bogoliubov_fraction * N;
  r.density_analysis_invalid =
      r.max_n_k > 0.0 && r.total >= thresholds.density_analysis_fraction * N / r.max_n_k;
  return r;
}

DepletionReport depletion(std::span<const ModeState> spectrum, std::span<const double> weights,
                          std::int64_t atom_number_N, const DepletionThresholds& thresholds) {
  std::vector<double> occ;
  occ.reserve(spectrum.size());
  for (const auto& s : spectrum) occ.push_back(s.n_k);
  return depletion_from_occupations(occ, weights, atom_number_N, thresholds);
}

complex gamma_lambda_product(const BogoCoefficients& c, double u_out, double v_out,
                             double omega_out, double t) {
  const double b = std::abs(c.beta);
  const double theta = 2.0 * omega_out * t + (b == 0.0 ? 0.0 : phase_delta(c));
  const double first = -std::abs(u_out * v_out) * (2.0 * b * b + 1.0);
  const complex bracket = 2.0 * v_out * v_out * std::cos(theta) + std::polar(1.0, -theta);
  return first + std::sqrt(b * b + 1.0) * b * bracket;
}

double optimal_time(double delta_k, double omega_out) {
  if (!(omega_out > 0.0)) throw DomainError("optimal_time requires omega > 0");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double phase = std::fmod(std::numbers::pi - delta_k, two_pi);
  if (phase < 0.0) phase += two_pi;
  return phase / (2.0 * omega_out);
}

DensityCorrelator density_correlator(std::int64_t atom_number_N, double n_k, complex m_k) {
  const double N = static_cast<double>(atom_number_N);
  const double general = N * (2.0 * m_k.real() + 2.0 * n_k + 1.0);
  const double at_t_m = 2.0 * N * (n_k - std::abs(m_k)) + N;
  return {general, at_t_m, at_t_m < N};
}

ModeState mode_state(const BogoCoefficients& c, const ModePhysics& out, double n_th, double t) {
  const auto [lambda, gamma] = total_coefficients(c, out.u_k, out.v_k, out.e_k, t);
  ModeState s;
  s.lambda = lambda;
  s.gamma = gamma;
  s.n_th = n_th;
  s.t = t;
  s.n_k = occupation(n_th, std::norm(gamma));
  s.m_k = anomalous(n_th, lambda, gamma);
  return s;
}

}  // namespace bogo
