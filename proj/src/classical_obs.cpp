#include "bogo/classical_obs.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "bogo/errors.hpp"

namespace bogo {

double classical_occupation(double n_cl_th, double gamma_sq) {
  return (2.0 * gamma_sq + 1.0) * n_cl_th;
}

double classical_anomalous_sq(double n_cl_th, double gamma_sq) {
  return 4.0 * (gamma_sq + 1.0) * gamma_sq * n_cl_th * n_cl_th;
}

complex classical_anomalous(double n_cl_th, complex lambda, complex gamma) {
  return 2.0 * gamma * std::conj(lambda) * n_cl_th;
}

ClassicalModeState classical_mode_state(double n_cl_th, complex lambda, complex gamma, double t) {
  return {n_cl_th, classical_occupation(n_cl_th, std::norm(gamma)),
          classical_anomalous(n_cl_th, lambda, gamma), t};
}

ClassicalTmv classical_tmv(double n_cl_th, double gamma_sq) {
  const double denom = 2.0 * gamma_sq + 1.0;
  if (!(denom > 0.0)) throw DomainError("classical TMV needs 2|gamma|^2 + 1 > 0");
  const double v = n_cl_th / denom;
  return {v, gamma_sq > 0.5 * n_cl_th - 0.5};
}

ClassicalDensityCorrelator classical_density_correlator(std::int64_t atom_number_N, double n_cl,
                                                        complex m_cl) {
  const double N = static_cast<double>(atom_number_N);
  return {N * (2.0 * m_cl.real() + 2.0 * n_cl), 2.0 * N * (n_cl - std::abs(m_cl))};
}

namespace {

constexpr std::uint64_t kChunk = 4096;

// Per-sample quantities whose first and second moments are accumulated.
enum Slot { kIa, kIb, kIaa, kIab, kReAB, kImAB, kQuasi, kDiff2, kSum, kSlots };

struct Sums {
  std::array<double, kSlots> s{};
  std::array<double, kSlots> s2{};
  double cross = 0.0;  // sum of diff2 * sum, for the V_cl ratio

  Sums& operator+=(const Sums& o) {
    for (int i = 0; i < kSlots; ++i) {
      s[i] += o.s[i];
      s2[i] += o.s2[i];
    }
    cross += o.cross;
    return *this;
  }
};

Sums run_chunk(complex lambda, complex gamma, double n_cl_th, std::uint64_t seed,
               std::uint64_t chunk, std::uint64_t count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * n_cl_th));
  const complex lc = std::conj(lambda);
  Sums out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const complex A(normal(rng), normal(rng));
    const complex B(normal(rng), normal(rng));
    const complex a = lc * A + gamma * std::conj(B);
    const complex b = lc * B + gamma * std::conj(A);
    const double ia = std::norm(a);
    const double ib = std::norm(b);
    const complex ab = a * b;
    std::array<double, kSlots> x{};
    x[kIa] = ia;
    x[kIb] = ib;
    x[kIaa] = ia * ia;
    x[kIab] = ia * ib;
    x[kReAB] = ab.real();
    x[kImAB] = ab.imag();
    x[kQuasi] = std::norm(A);
    x[kDiff2] = (ia - ib) * (ia - ib);
    x[kSum] = ia + ib;
    for (int j = 0; j < kSlots; ++j) {
      out.s[j] += x[j];
      out.s2[j] += x[j] * x[j];
    }
    out.cross += x[kDiff2] * x[kSum];
  }
  return out;
}

// Pairwise reduction in a fixed order.
Sums reduce(std::vector<Sums>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Sums left = reduce(parts, lo, mid);
  left += reduce(parts, mid, hi);
  return left;
}

Moment moment(const Sums& t, Slot slot, double n) {
  const double mean = t.s[slot] / n;
  const double var = std::max(0.0, (t.s2[slot] / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace

EnsembleEstimate monte_carlo_ensemble(complex lambda, complex gamma, double n_cl_th,
                                      const EnsembleOptions& options) {
  if (options.sample_count < kMinEnsembleSamples) {
    throw DomainError("monte_carlo_ensemble requires at least 1000 samples");
  }
  if (!(n_cl_th > 0.0)) throw DomainError("monte_carlo_ensemble requires T > 0");

  const std::uint64_t total = options.sample_count;
  const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<Sums> parts(chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t count = std::min(kChunk, total - c * kChunk);
      parts[c] = run_chunk(lambda, gamma, n_cl_th, options.seed, c, count);
    }
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  const Sums t = reduce(parts, 0, parts.size());
  const double n = static_cast<double>(total);
  EnsembleEstimate e;
  e.sample_count = total;
  e.rng_seed = options.seed;
  e.intensity_a = moment(t, kIa, n);
  e.intensity_b = moment(t, kIb, n);
  e.intensity_aa = moment(t, kIaa, n);
  e.intensity_ab = moment(t, kIab, n);
  e.anomalous_re = moment(t, kReAB, n);
  e.anomalous_im = moment(t, kImAB, n);
  e.quasi_intensity = moment(t, kQuasi, n);

  // V_cl = E((I_a - I_b)^2) / E(I_a + I_b), error by the delta method.
  const Moment num = moment(t, kDiff2, n);
  const Moment den = moment(t, kSum, n);
  const double cov =
      (t.cross / n - num.mean * den.mean) * n / (n - 1.0) / n;  // covariance of the means
  const double ratio = num.mean / den.mean;
  const double var = (num.std_error * num.std_error - 2.0 * ratio * cov +
                      ratio * ratio * den.std_error * den.std_error) /
                     (den.mean * den.mean);
  e.v_cl = {ratio, std::sqrt(std::max(0.0, var))};
  return e;
}

EnsembleEstimate monte_carlo_ensemble(const InteractionSchedule& s, double k, double t,
                                      const SystemParams& params, const EnsembleOptions& options,
                                      double tol) {
  if (t < 0.0) throw DomainError("ensemble time must lie in the out-region t >= 0");
  const double omega_in = s.omega(k, s.t_in());
  const double n_cl_th = classical_thermal_occupation(omega_in, params.temperature_T());
  const BogoCoefficients c = propagate(s, k, s.t_in(), 0.0, tol).coefficients();
  const ModePhysics out = mode_physics(k, s.u_out(), s.density_n());
  const auto [lambda, gamma] = total_coefficients(c, out.u_k, out.v_k, out.e_k, t);
  return monte_carlo_ensemble(lambda, gamma, n_cl_th, options);
}

}  // namespace bogo
