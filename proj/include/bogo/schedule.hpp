#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bogo/units.hpp"

namespace bogo {

enum class ScheduleKind { constant, sinusoid, square_wave, piecewise_constant, sampled };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

struct PiecewiseSegment {
  double duration;
  double U;
};

/// A constant-interaction interval [t_begin, t_end).
struct ConstantInterval {
  double t_begin;
  double t_end;
  double U;
};

/// Interaction protocol U(t) on [t_in, inf). The drive ends at t_out = 0; for
/// t >= 0 the interaction is held at U(0). Values at jump instants are
/// right-continuous: U(t_j) is the value of the interval that starts at t_j.
///
/// Square waves start on the low level U0 (1 - pi A / 4) and switch every half
/// period. Piecewise and square-wave schedules return to u0 at t = 0; sampled
/// schedules hold their last sample.
class InteractionSchedule {
 public:
  static InteractionSchedule constant(const SystemParams& params, double t_in = 0.0);
  static InteractionSchedule sinusoid(const SystemParams& params, double amplitude_A,
                                      double omega_D, int n_periods);
  static InteractionSchedule square_wave(const SystemParams& params, double amplitude_A,
                                         double omega_D, int n_periods);
  static InteractionSchedule piecewise_constant(const SystemParams& params,
                                                std::vector<PiecewiseSegment> segments);
  /// Uniformly spaced table; the last sample sits at t = 0.
  static InteractionSchedule sampled(const SystemParams& params, double dt,
                                     std::vector<double> samples);

  ScheduleKind kind() const noexcept { return kind_; }
  double u0() const noexcept { return u0_; }
  double density_n() const noexcept { return density_n_; }
  double amplitude_A() const noexcept { return amplitude_A_; }
  double omega_D() const noexcept { return omega_D_; }
  int n_periods() const noexcept { return n_periods_; }
  double t_in() const noexcept { return t_in_; }
  double t_out() const noexcept { return 0.0; }
  const std::vector<PiecewiseSegment>& segments() const noexcept { return segments_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double sample_spacing() const noexcept { return dt_; }

  /// True for kinds whose U(t) is piecewise constant (constant, square wave, piecewise).
  bool is_piecewise_constant() const noexcept;

  /// Square-wave levels U0 (1 -+ pi A / 4).
  double square_low() const noexcept;
  double square_high() const noexcept;

  double interaction_at(double t) const;
  /// Left limit U(t-); equals interaction_at(t) except at jumps.
  double interaction_before(double t) const;
  /// dU/dt; throws DomainError at a jump instant.
  double interaction_rate(double t) const;

  double omega(double k, double t) const;

  /// d log sqrt(omega_k) / dt = (e_kin n dU/dt) / (2 omega_k^2).
  double log_freq_derivative(double k, double t) const;

  std::optional<double> drive_period() const;

  /// Instants in (t_in, 0] where U jumps, ascending.
  std::vector<double> jump_times() const;
  bool is_jump(double t) const;

  /// Instants in (t_in, 0] where U or dU/dt is not smooth, ascending. Includes jumps.
  std::vector<double> breakpoints() const;

  /// Boundaries t_in = b_0 < b_1 < ... < b_m = 0 of the smooth pieces of a sinusoid or
  /// sampled schedule. Empty when the drive region is empty or piecewise constant.
  std::vector<double> smooth_piece_bounds() const;
  /// U and dU/dt from the closed-form expression of piece i, valid on its closed interval.
  double piece_interaction(std::size_t piece, double t) const;
  double piece_rate(std::size_t piece, double t) const;

  /// Constant-interaction intervals covering [t_in, 0); empty unless is_piecewise_constant().
  std::vector<ConstantInterval> constant_intervals() const;

  /// Interaction in the out-region t >= 0.
  double u_out() const { return interaction_at(0.0); }

  InteractionSchedule with_amplitude(double amplitude_A) const;
  InteractionSchedule with_periods(int n_periods) const;

 private:
  InteractionSchedule() = default;
  void validate() const;

  ScheduleKind kind_ = ScheduleKind::constant;
  double u0_ = 1.0;
  double density_n_ = 1.0;
  double amplitude_A_ = 0.0;
  double omega_D_ = 0.0;
  int n_periods_ = 0;
  double t_in_ = 0.0;
  std::vector<PiecewiseSegment> segments_;
  std::vector<double> samples_;
  double dt_ = 0.0;
};

double interaction_at(const InteractionSchedule& s, double t);
double log_freq_derivative(const InteractionSchedule& s, double k, double t);
std::optional<double> drive_period(const InteractionSchedule& s);

}  // namespace bogo
