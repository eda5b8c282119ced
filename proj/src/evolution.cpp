#include "bogo/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "bogo/errors.hpp"

namespace bogo {

TransferMatrix TransferMatrix::phase(double omega, double dt) {
  return {std::polar(1.0, omega * dt), complex{0.0, 0.0}};
}

complex TransferMatrix::entry(int row, int col) const {
  if (row == 0 && col == 0) return std::conj(alpha_);
  if (row == 0 && col == 1) return beta_;
  if (row == 1 && col == 0) return std::conj(beta_);
  return alpha_;
}

TransferMatrix TransferMatrix::operator*(const TransferMatrix& rhs) const {
  // [[a1*, b1], [b1*, a1]] [[a2*, b2], [b2*, a2]]
  return {alpha_ * rhs.alpha_ + std::conj(beta_) * rhs.beta_,
          std::conj(alpha_) * rhs.beta_ + beta_ * rhs.alpha_};
}

TransferMatrix TransferMatrix::pow(unsigned n) const {
  TransferMatrix result;
  TransferMatrix base = *this;
  while (n > 0) {
    if (n & 1U) result = base * result;
    base = base * base;
    n >>= 1U;
  }
  return result;
}

namespace {

// State: first column of the fundamental matrix, (alpha*, beta*).
using State = std::array<complex, 2>;

State rhs(const ModeDrive& drive, double t, const State& y) {
  const double w = drive.omega(t);
  const double r = drive.log_rate(t);
  const complex iw{0.0, w};
  return {-iw * y[0] + r * y[1], r * y[0] + iw * y[1]};
}

double state_norm(const State& y) { return std::sqrt(std::norm(y[0]) + std::norm(y[1])); }

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (int i = 0; i < 2; ++i) {
    complex acc{0.0, 0.0};
    for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

struct StepOutcome {
  State dy;
  State y_new;
  State k_last;
  double error_norm;  // absolute local error estimate
};

StepOutcome dp_step(const ModeDrive& drive, double t, const State& y, const State& k1, double h) {
  const State k2 = rhs(drive, t + c2 * h, axpy(y, h, {{a21, &k1}}));
  const State k3 = rhs(drive, t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const State k4 = rhs(drive, t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State k5 =
      rhs(drive, t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const State k6 = rhs(drive, t + h,
                       axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const State dy = axpy(State{}, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const State y_new{y[0] + dy[0], y[1] + dy[1]};
  const State k7 = rhs(drive, t + h, y_new);
  const State err = axpy(State{}, h,
                         {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
  return {dy, y_new, k7, state_norm(err)};
}

TransferMatrix from_state(const State& y) { return {std::conj(y[0]), std::conj(y[1])}; }

double initial_step(const ModeDrive& drive, double t, double span, double tol) {
  const double w = std::max(std::abs(drive.omega(t)), std::abs(drive.log_rate(t)));
  const double scale = std::pow(tol, 0.2);
  double h = w > 0.0 ? 0.5 * scale / w : span;
  return std::min(h, span);
}

}  // namespace

IntegrationResult integrate_linear(const ModeDrive& drive, double t_from, double t_to,
                                   std::span<const double> breakpoints,
                                   const IntegratorOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("integrator tolerance must be positive");
  IntegrationResult result;
  if (t_from == t_to) return result;

  const double dir = t_to > t_from ? 1.0 : -1.0;
  std::vector<double> stops;
  for (double b : breakpoints) {
    if (dir * (b - t_from) > 0.0 && dir * (t_to - b) > 0.0) stops.push_back(b);
  }
  std::sort(stops.begin(), stops.end(), [dir](double a, double b) { return dir * a < dir * b; });
  stops.push_back(t_to);

  State y{complex{1.0, 0.0}, complex{0.0, 0.0}};
  State carry{};  // Kahan compensation for the state update
  double t = t_from;
  double error_sum = 0.0;  // sum of local errors weighted by the transfer norm at the step
  double h = 0.0;

  for (double stop : stops) {
    const double span = std::abs(stop - t);
    if (span == 0.0) continue;
    // Restart after each breakpoint: derivatives may be discontinuous there.
    State k1 = rhs(drive, t, y);
    h = initial_step(drive, t, span, options.tol);
    bool last = false;
    while (!last) {
      const double remaining = std::abs(stop - t);
      if (h >= remaining * (1.0 - 1e-12)) {
        h = remaining;
        last = true;
      }
      const double min_step = options.min_relative_step * std::max(1.0, std::abs(t));
      if (h < min_step && !last) {
        throw IntegrationFailure("step size underflow at t = " + std::to_string(t), t);
      }
      if (result.steps + result.rejected >= options.max_steps) {
        throw IntegrationFailure("step budget exhausted at t = " + std::to_string(t), t);
      }
      const double signed_h = dir * h;
      StepOutcome step = dp_step(drive, t, y, k1, signed_h);
      const double scale = options.tol * std::max(state_norm(y), state_norm(step.y_new));
      const double ratio = step.error_norm / scale;
      if (!std::isfinite(ratio)) {
        throw IntegrationFailure("non-finite state at t = " + std::to_string(t), t);
      }
      if (ratio <= 1.0) {
        error_sum += step.error_norm * (std::abs(step.y_new[0]) + std::abs(step.y_new[1]));
        t = last ? stop : t + signed_h;
        for (int i = 0; i < 2; ++i) {
          const complex inc = step.dy[i] - carry[i];
          const complex sum = y[i] + inc;
          carry[i] = (sum - y[i]) - inc;
          y[i] = sum;
        }
        k1 = step.k_last;
        ++result.steps;
        const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
        h *= factor;
      } else {
        ++result.rejected;
        last = false;
        h *= std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 0.9);
      }
    }
  }
  result.matrix = from_state(y);
  result.error_estimate = error_sum * (std::abs(y[0]) + std::abs(y[1]));
  return result;
}

TransferMatrix sudden_step(double omega_1, double omega_2) {
  if (!(omega_1 > 0.0) || !(omega_2 > 0.0)) {
    throw DomainError("sudden_step requires positive frequencies");
  }
  const double r = std::sqrt(omega_2 / omega_1);
  const double r_inv = std::sqrt(omega_1 / omega_2);
  return {complex{0.5 * (r + r_inv), 0.0}, complex{0.5 * (r - r_inv), 0.0}};
}

ModeDrive mode_drive(const InteractionSchedule& s, double k) {
  return {[&s, k](double t) {
            const double U = s.interaction_at(t);
            if (!(U > 0.0)) {
              throw UnsupportedRegime("U(t) <= 0 encountered at t = " + std::to_string(t));
            }
            return dispersion(k, U, s.density_n());
          },
          [&s, k](double t) { return s.log_freq_derivative(k, t); }};
}

namespace {

void check_span(const InteractionSchedule& s, double t_from, double t_to) {
  if (t_from < s.t_in() || !(t_from <= t_to)) {
    throw DomainError("propagate requires t_in <= t_from <= t_to");
  }
}

IntegrationResult propagate_piecewise(const InteractionSchedule& s, double k, double t_from,
                                      double t_to) {
  const double n = s.density_n();
  const double eps = 1e-12 * std::max(1.0, std::max(std::abs(t_from), std::abs(t_to)));
  auto intervals = s.constant_intervals();
  intervals.push_back({0.0, std::numeric_limits<double>::infinity(), s.u_out()});

  TransferMatrix m;
  double t = t_from;
  double w_current = dispersion(k, s.interaction_at(t_from), n);
  for (const auto& iv : intervals) {
    if (iv.t_end <= t_from + eps) continue;
    if (iv.t_begin > t_to + eps) break;
    const double w_iv = dispersion(k, iv.U, n);
    // Level change inside (t_from, t_to]: the field is continuous, the basis is not.
    if (iv.t_begin > t_from + eps && w_iv != w_current) m = sudden_step(w_current, w_iv) * m;
    w_current = w_iv;
    const double end = std::min(iv.t_end, t_to);
    if (end > t) {
      m = TransferMatrix::phase(w_iv, end - t) * m;
      t = end;
    }
  }
  IntegrationResult r;
  r.matrix = m;
  return r;
}

}  // namespace

namespace {

ModeDrive piece_drive(const InteractionSchedule& s, double k, std::size_t piece) {
  const double n = s.density_n();
  const double e_kin = kinetic_energy(k);
  auto checked_omega = [&s, k, n, piece](double t) {
    const double U = s.piece_interaction(piece, t);
    if (!(U > 0.0)) {
      throw UnsupportedRegime("U(t) <= 0 encountered at t = " + std::to_string(t));
    }
    return dispersion(k, U, n);
  };
  return {checked_omega, [&s, checked_omega, e_kin, n, piece](double t) {
            const double w = checked_omega(t);
            return 0.5 * e_kin * n * s.piece_rate(piece, t) / (w * w);
          }};
}

// Composition of (m_second after m_first) with first-order error bookkeeping.
void append(IntegrationResult& acc, const IntegrationResult& next) {
  acc.error_estimate = next.matrix.norm() * acc.error_estimate + next.error_estimate * acc.matrix.norm();
  acc.matrix = next.matrix * acc.matrix;
  acc.steps += next.steps;
  acc.rejected += next.rejected;
}

}  // namespace

IntegrationResult propagate_detailed(const InteractionSchedule& s, double k, double t_from,
                                     double t_to, double tol) {
  check_span(s, t_from, t_to);
  if (t_from == t_to) return {};
  if (s.is_piecewise_constant()) return propagate_piecewise(s, k, t_from, t_to);

  IntegrationResult result;
  IntegratorOptions options;
  options.tol = tol;
  const auto bounds = s.smooth_piece_bounds();
  const double drive_end = std::min(t_to, 0.0);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double a = std::max(bounds[i], t_from);
    const double b = std::min(bounds[i + 1], drive_end);
    if (!(b > a)) continue;
    append(result, integrate_linear(piece_drive(s, k, i), a, b, {}, options));
  }
  const double out_begin = std::max(t_from, 0.0);
  if (t_to > out_begin) {
    IntegrationResult out;
    out.matrix = TransferMatrix::phase(dispersion(k, s.u_out(), s.density_n()), t_to - out_begin);
    append(result, out);
  }
  return result;
}

TransferMatrix propagate(const InteractionSchedule& s, double k, double t_from, double t_to,
                         double tol) {
  return propagate_detailed(s, k, t_from, t_to, tol).matrix;
}

std::vector<BogoCoefficients> coefficient_history(const InteractionSchedule& s, double k,
                                                  std::span<const double> times, double tol) {
  std::vector<BogoCoefficients> out;
  out.reserve(times.size());
  TransferMatrix m;
  double t = s.t_in();
  for (double target : times) {
    if (target < t) throw DomainError("coefficient_history needs ascending times >= t_in");
    m = propagate(s, k, t, target, tol) * m;
    t = target;
    out.push_back(m.coefficients());
  }
  return out;
}

TransferMatrix monodromy(const InteractionSchedule& s, double k, double tol) {
  const auto period = s.drive_period();
  if (!period) {
    throw UnsupportedRegime("monodromy requires a periodic schedule (sinusoid or square wave)");
  }
  const double n = s.density_n();
  if (s.kind() == ScheduleKind::square_wave) {
    const double w_lo = dispersion(k, s.square_low(), n);
    const double w_hi = dispersion(k, s.square_high(), n);
    const double half = 0.5 * *period;
    return sudden_step(w_hi, w_lo) * TransferMatrix::phase(w_hi, half) * sudden_step(w_lo, w_hi) *
           TransferMatrix::phase(w_lo, half);
  }
  const InteractionSchedule one = s.with_periods(1);
  IntegratorOptions options;
  options.tol = tol;
  return integrate_linear(piece_drive(one, k, 0), one.t_in(), 0.0, {}, options).matrix;
}

TransferMatrix smoothed_square_monodromy(const InteractionSchedule& s, double k, double width,
                                         double tol) {
  if (s.kind() != ScheduleKind::square_wave) {
    throw UnsupportedRegime("smoothed_square_monodromy requires a square-wave schedule");
  }
  if (!(width > 0.0)) throw DomainError("ramp width must be positive");
  const double period = *s.drive_period();
  const double lo = s.square_low();
  const double dU = s.square_high() - lo;
  const double n = s.density_n();
  const double t_up = 0.5 * period;  // phase measured from the start of a period
  const double t_down = period;
  const double e_kin = kinetic_energy(k);

  auto U = [=](double t) {
    return lo + 0.5 * dU * (std::tanh((t - t_up) / width) - std::tanh((t - t_down) / width));
  };
  auto dUdt = [=](double t) {
    const double s1 = 1.0 / std::cosh((t - t_up) / width);
    const double s2 = 1.0 / std::cosh((t - t_down) / width);
    return 0.5 * dU * (s1 * s1 - s2 * s2) / width;
  };
  ModeDrive drive{[=](double t) { return dispersion(k, U(t), n); },
                  [=](double t) {
                    const double w = dispersion(k, U(t), n);
                    return 0.5 * e_kin * n * dUdt(t) / (w * w);
                  }};
  const double a = 0.25 * period;
  const double b = 1.25 * period;
  std::vector<double> bps;
  for (double c : {t_up, t_down}) {
    for (double m : {-40.0, -4.0, 0.0, 4.0, 40.0}) bps.push_back(c + m * width);
  }
  IntegratorOptions options;
  options.tol = tol;
  return integrate_linear(drive, a, b, bps, options).matrix;
}

namespace {
constexpr double kInstabilityBand = 1e-9;
}

bool is_unstable(const TransferMatrix& one_period) {
  return std::abs(one_period.entry(0, 0).real()) > 1.0 + kInstabilityBand;
}

double growth_rate(const TransferMatrix& one_period) {
  if (!is_unstable(one_period)) return 0.0;
  // Eigenvalues of a 2x2 matrix: tr/2 +- sqrt(tr^2/4 - det).
  const complex half_trace = 0.5 * one_period.trace();
  const complex disc = std::sqrt(half_trace * half_trace - complex{one_period.determinant(), 0.0});
  const double rho = std::max(std::abs(half_trace + disc), std::abs(half_trace - disc));
  return std::log(rho);
}

std::optional<double> invert_dispersion(double target_omega, double U, double density_n) {
  if (!(target_omega > 0.0) || U < 0.0) return std::nullopt;
  auto f = [&](double k) { return dispersion(k, U, density_n) - target_omega; };
  // omega_k >= k^2/2, so k = sqrt(2 target) + 1 brackets the root from above.
  double hi = std::sqrt(2.0 * target_omega) + 1.0;
  double lo = std::min(1e-3, 0.5 * hi);
  while (f(lo) > 0.0) lo *= 0.5;
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1),
      iterations);
  return 0.5 * (a + b);
}

ResonanceEstimate resonance_estimate(const InteractionSchedule& s, const SystemParams& params,
                                     double amplitude_switch) {
  if (!s.drive_period()) {
    throw UnsupportedRegime("resonance_estimate requires a periodic schedule");
  }
  const double n = params.density_n();
  const double wD = s.omega_D();
  const double A = std::abs(s.amplitude_A());
  const double U0 = s.u0();
  ResonanceEstimate est;
  est.small_amplitude_k = invert_dispersion(0.5 * wD, U0, n);

  const double spread =
      s.kind() == ScheduleKind::square_wave ? std::numbers::pi * A / 4.0 : std::numbers::pi * A / 3.0;
  const double U_max = U0 * (1.0 + spread);
  const double U_min = U0 * (1.0 - spread);
  if (U_min > 0.0) {
    auto f = [&](double k) { return dispersion(k, U_max, n) + dispersion(k, U_min, n) - wD; };
    double hi = std::sqrt(wD) + 1.0;
    double lo = 1e-3;
    while (f(lo) > 0.0) lo *= 0.5;
    if (f(hi) > 0.0) {
      std::uintmax_t iterations = 200;
      const auto [a, b] = boost::math::tools::toms748_solve(
          f, lo, hi,
          boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1),
          iterations);
      est.large_amplitude_k = 0.5 * (a + b);
    }
  }
  est.used_large_amplitude = A >= amplitude_switch;
  est.k = est.used_large_amplitude ? est.large_amplitude_k : est.small_amplitude_k;
  return est;
}

}  // namespace bogo
