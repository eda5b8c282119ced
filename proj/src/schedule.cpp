#include "bogo/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "bogo/errors.hpp"

namespace bogo {

namespace {

constexpr double kTimeMatchTol = 1e-12;

bool same_time(double a, double b) {
  return std::abs(a - b) <= kTimeMatchTol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// Snap q to the nearest integer when it is within rounding distance of it.
double snap(double q) {
  const double r = std::round(q);
  return std::abs(q - r) <= kTimeMatchTol * std::max(1.0, std::abs(q)) ? r : q;
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::sinusoid: return "sinusoid";
    case ScheduleKind::square_wave: return "square_wave";
    case ScheduleKind::piecewise_constant: return "piecewise_constant";
    case ScheduleKind::sampled: return "sampled";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  for (auto kind : {ScheduleKind::constant, ScheduleKind::sinusoid, ScheduleKind::square_wave,
                    ScheduleKind::piecewise_constant, ScheduleKind::sampled}) {
    if (to_string(kind) == name) return kind;
  }
  throw DomainError("unknown schedule kind '" + std::string(name) + "'");
}

InteractionSchedule InteractionSchedule::constant(const SystemParams& params, double t_in) {
  InteractionSchedule s;
  s.kind_ = ScheduleKind::constant;
  s.u0_ = params.u0();
  s.density_n_ = params.density_n();
  s.t_in_ = t_in;
  s.validate();
  return s;
}

InteractionSchedule InteractionSchedule::sinusoid(const SystemParams& params, double amplitude_A,
                                                  double omega_D, int n_periods) {
  InteractionSchedule s;
  s.kind_ = ScheduleKind::sinusoid;
  s.u0_ = params.u0();
  s.density_n_ = params.density_n();
  s.amplitude_A_ = amplitude_A;
  s.omega_D_ = omega_D;
  s.n_periods_ = n_periods;
  s.validate();
  s.t_in_ = -n_periods * (2.0 * std::numbers::pi / omega_D);
  return s;
}

InteractionSchedule InteractionSchedule::square_wave(const SystemParams& params,
                                                     double amplitude_A, double omega_D,
                                                     int n_periods) {
  InteractionSchedule s = sinusoid(params, 0.0, omega_D, n_periods);
  s.kind_ = ScheduleKind::square_wave;
  s.amplitude_A_ = amplitude_A;
  s.validate();
  return s;
}

InteractionSchedule InteractionSchedule::piecewise_constant(const SystemParams& params,
                                                            std::vector<PiecewiseSegment> segments) {
  InteractionSchedule s;
  s.kind_ = ScheduleKind::piecewise_constant;
  s.u0_ = params.u0();
  s.density_n_ = params.density_n();
  s.segments_ = std::move(segments);
  s.validate();
  double total = 0.0;
  for (const auto& seg : s.segments_) total += seg.duration;
  s.t_in_ = -total;
  return s;
}

InteractionSchedule InteractionSchedule::sampled(const SystemParams& params, double dt,
                                                 std::vector<double> samples) {
  InteractionSchedule s;
  s.kind_ = ScheduleKind::sampled;
  s.u0_ = params.u0();
  s.density_n_ = params.density_n();
  s.dt_ = dt;
  s.samples_ = std::move(samples);
  s.validate();
  s.t_in_ = -static_cast<double>(s.samples_.size() - 1) * dt;
  return s;
}

void InteractionSchedule::validate() const {
  if (!(u0_ > 0.0)) throw UnsupportedRegime("baseline interaction u0 must be positive");
  switch (kind_) {
    case ScheduleKind::constant:
      if (!(t_in_ <= 0.0)) throw DomainError("constant schedule requires t_in <= 0");
      break;
    case ScheduleKind::sinusoid:
    case ScheduleKind::square_wave:
      if (!(omega_D_ > 0.0) || !std::isfinite(omega_D_)) {
        throw DomainError("drive frequency omega_D must be positive");
      }
      if (n_periods_ < 0) throw DomainError("n_periods must be >= 0");
      if (kind_ == ScheduleKind::sinusoid && !(std::abs(amplitude_A_) < 1.0)) {
        throw UnsupportedRegime("sinusoidal drive requires |A| < 1 so that U(t) > 0");
      }
      if (kind_ == ScheduleKind::square_wave &&
          !(std::numbers::pi * std::abs(amplitude_A_) / 4.0 < 1.0)) {
        throw UnsupportedRegime("square wave requires pi |A| / 4 < 1 so that U(t) > 0");
      }
      break;
    case ScheduleKind::piecewise_constant:
      for (const auto& seg : segments_) {
        if (!(seg.duration >= 0.0) || !std::isfinite(seg.duration)) {
          throw DomainError("segment durations must be finite and >= 0");
        }
        if (!(seg.U > 0.0)) throw UnsupportedRegime("segment interaction must be positive");
      }
      break;
    case ScheduleKind::sampled:
      if (!(dt_ > 0.0)) throw DomainError("sample spacing dt must be positive");
      if (samples_.empty()) throw DomainError("sampled schedule needs at least one sample");
      for (double U : samples_) {
        if (!(U > 0.0)) throw UnsupportedRegime("sampled interaction must be positive");
      }
      break;
  }
}

bool InteractionSchedule::is_piecewise_constant() const noexcept {
  return kind_ == ScheduleKind::constant || kind_ == ScheduleKind::square_wave ||
         kind_ == ScheduleKind::piecewise_constant;
}

double InteractionSchedule::square_low() const noexcept {
  return u0_ * (1.0 - std::numbers::pi * amplitude_A_ / 4.0);
}

double InteractionSchedule::square_high() const noexcept {
  return u0_ * (1.0 + std::numbers::pi * amplitude_A_ / 4.0);
}

std::vector<ConstantInterval> InteractionSchedule::constant_intervals() const {
  std::vector<ConstantInterval> out;
  switch (kind_) {
    case ScheduleKind::constant:
      if (t_in_ < 0.0) out.push_back({t_in_, 0.0, u0_});
      break;
    case ScheduleKind::square_wave: {
      const double half = std::numbers::pi / omega_D_;
      const int count = 2 * n_periods_;
      for (int j = 0; j < count; ++j) {
        const double begin = -static_cast<double>(count - j) * half;
        const double end = -static_cast<double>(count - j - 1) * half;
        out.push_back({begin, end, j % 2 == 0 ? square_low() : square_high()});
      }
      break;
    }
    case ScheduleKind::piecewise_constant: {
      double end = 0.0;
      std::vector<ConstantInterval> rev;
      for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
        const double begin = end - it->duration;
        if (it->duration > 0.0) rev.push_back({begin, end, it->U});
        end = begin;
      }
      out.assign(rev.rbegin(), rev.rend());
      break;
    }
    default:
      break;
  }
  return out;
}

double InteractionSchedule::interaction_at(double t) const {
  if (std::isnan(t)) throw DomainError("time is NaN");
  if (t < t_in_ && !same_time(t, t_in_)) {
    throw DomainError("time " + std::to_string(t) + " precedes the schedule start t_in = " +
                      std::to_string(t_in_));
  }
  t = std::max(t, t_in_);
  switch (kind_) {
    case ScheduleKind::constant:
      return u0_;
    case ScheduleKind::sinusoid:
      if (t >= 0.0) return u0_;
      return u0_ * (1.0 + amplitude_A_ * std::sin(omega_D_ * t));
    case ScheduleKind::square_wave: {
      if (t >= 0.0 || n_periods_ == 0) return u0_;
      const double half = std::numbers::pi / omega_D_;
      const double q = snap(-t / half);  // in (0, 2n]
      const long j = 2L * n_periods_ - static_cast<long>(std::ceil(q));
      return (j % 2 == 0) ? square_low() : square_high();
    }
    case ScheduleKind::piecewise_constant: {
      if (t >= 0.0) return u0_;
      for (const auto& iv : constant_intervals()) {
        if ((t >= iv.t_begin || same_time(t, iv.t_begin)) && t < iv.t_end &&
            !same_time(t, iv.t_end)) {
          return iv.U;
        }
      }
      return u0_;
    }
    case ScheduleKind::sampled: {
      if (t >= 0.0 || samples_.size() == 1) return samples_.back();
      const double x = snap((t - t_in_) / dt_);
      const auto i = std::min(static_cast<std::size_t>(std::floor(x)), samples_.size() - 2);
      const double w = x - static_cast<double>(i);
      return samples_[i] + w * (samples_[i + 1] - samples_[i]);
    }
  }
  return u0_;
}

double InteractionSchedule::interaction_before(double t) const {
  if (!is_jump(t)) return interaction_at(t);
  if (kind_ == ScheduleKind::square_wave) {
    // The level that ends at t is the opposite of the one starting there, except at t = 0.
    if (same_time(t, 0.0)) return square_high();
    return interaction_at(t) == square_low() ? square_high() : square_low();
  }
  double previous = u0_;
  for (const auto& iv : constant_intervals()) {
    if (same_time(iv.t_end, t)) previous = iv.U;
  }
  return previous;
}

double InteractionSchedule::interaction_rate(double t) const {
  if (is_jump(t)) {
    throw DomainError("dU/dt is a delta function at the jump t = " + std::to_string(t) +
                      "; use sudden_step for the instantaneous re-diagonalization");
  }
  (void)interaction_at(t);  // range check
  if (t >= 0.0) return 0.0;
  switch (kind_) {
    case ScheduleKind::sinusoid:
      return u0_ * amplitude_A_ * omega_D_ * std::cos(omega_D_ * t);
    case ScheduleKind::sampled: {
      if (samples_.size() == 1) return 0.0;
      const double x = snap((std::max(t, t_in_) - t_in_) / dt_);
      const auto i = std::min(static_cast<std::size_t>(std::floor(x)), samples_.size() - 2);
      return (samples_[i + 1] - samples_[i]) / dt_;
    }
    default:
      return 0.0;
  }
}

double InteractionSchedule::omega(double k, double t) const {
  return dispersion(k, interaction_at(t), density_n_);
}

double InteractionSchedule::log_freq_derivative(double k, double t) const {
  const double rate = interaction_rate(t);
  if (rate == 0.0) return 0.0;
  const double w = omega(k, t);
  return 0.5 * kinetic_energy(k) * density_n_ * rate / (w * w);
}

std::optional<double> InteractionSchedule::drive_period() const {
  if (kind_ == ScheduleKind::sinusoid || kind_ == ScheduleKind::square_wave) {
    return 2.0 * std::numbers::pi / omega_D_;
  }
  return std::nullopt;
}

std::vector<double> InteractionSchedule::jump_times() const {
  std::vector<double> out;
  if (!is_piecewise_constant()) return out;
  double previous = 0.0;
  bool first = true;
  for (const auto& iv : constant_intervals()) {
    if (!first && iv.U != previous) out.push_back(iv.t_begin);
    previous = iv.U;
    first = false;
  }
  if (!first && previous != u0_) out.push_back(0.0);
  return out;
}

bool InteractionSchedule::is_jump(double t) const {
  if (!is_piecewise_constant()) return false;
  for (double tj : jump_times()) {
    if (same_time(t, tj)) return true;
  }
  return false;
}

std::vector<double> InteractionSchedule::breakpoints() const {
  switch (kind_) {
    case ScheduleKind::sinusoid:
      return n_periods_ > 0 ? std::vector<double>{0.0} : std::vector<double>{};
    case ScheduleKind::sampled: {
      std::vector<double> out;
      const auto n = samples_.size();
      for (std::size_t i = 1; i < n; ++i) out.push_back(-static_cast<double>(n - 1 - i) * dt_);
      return out;
    }
    default:
      return jump_times();
  }
}

std::vector<double> InteractionSchedule::smooth_piece_bounds() const {
  std::vector<double> out;
  if (!(t_in_ < 0.0)) return out;
  if (kind_ == ScheduleKind::sinusoid) {
    out = {t_in_, 0.0};
  } else if (kind_ == ScheduleKind::sampled) {
    const auto n = samples_.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(-static_cast<double>(n - 1 - i) * dt_);
  }
  return out;
}

double InteractionSchedule::piece_interaction(std::size_t piece, double t) const {
  if (kind_ == ScheduleKind::sinusoid) return u0_ * (1.0 + amplitude_A_ * std::sin(omega_D_ * t));
  if (kind_ == ScheduleKind::sampled && piece + 1 < samples_.size()) {
    const double t_begin = -static_cast<double>(samples_.size() - 1 - piece) * dt_;
    return samples_[piece] + (t - t_begin) * (samples_[piece + 1] - samples_[piece]) / dt_;
  }
  throw DomainError("schedule has no smooth piece " + std::to_string(piece));
}

double InteractionSchedule::piece_rate(std::size_t piece, double t) const {
  if (kind_ == ScheduleKind::sinusoid) return u0_ * amplitude_A_ * omega_D_ * std::cos(omega_D_ * t);
  if (kind_ == ScheduleKind::sampled && piece + 1 < samples_.size()) {
    return (samples_[piece + 1] - samples_[piece]) / dt_;
  }
  throw DomainError("schedule has no smooth piece " + std::to_string(piece));
}

InteractionSchedule InteractionSchedule::with_amplitude(double amplitude_A) const {
  InteractionSchedule s = *this;
  s.amplitude_A_ = amplitude_A;
  s.validate();
  return s;
}

InteractionSchedule InteractionSchedule::with_periods(int n_periods) const {
  InteractionSchedule s = *this;
  s.n_periods_ = n_periods;
  s.validate();
  if (auto period = s.drive_period()) s.t_in_ = -n_periods * *period;
  return s;
}

double interaction_at(const InteractionSchedule& s, double t) { return s.interaction_at(t); }

double log_freq_derivative(const InteractionSchedule& s, double k, double t) {
  return s.log_freq_derivative(k, t);
}

std::optional<double> drive_period(const InteractionSchedule& s) { return s.drive_period(); }

}  // namespace bogo
