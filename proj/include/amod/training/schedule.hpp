#pragma once

#include <cstdint>
#include <string>

namespace amod {

enum class ScheduleKind { linear, power, jump };

/// A weight rising from 0 at step 0 to 1 at the last training step.
/// `param` is the exponent for power and the switch fraction for jump.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::linear;
  double param = 1.0;

  /// Throws std::invalid_argument for a non-positive exponent or a jump
  /// fraction outside [0, 1].
  void validate() const;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// "linear", "power(0.25)", "jump(0.25)".
ScheduleSpec parse_schedule(const std::string& text);
std::string to_string(const ScheduleSpec& spec);

double schedule_value(const ScheduleSpec& spec, std::int64_t step, std::int64_t total_steps);

/// Training-step indexed β and κ.
struct ScheduleState {
  std::int64_t step = 0;
  std::int64_t total_steps = 1;
  ScheduleSpec beta_schedule{ScheduleKind::linear, 1.0};
  ScheduleSpec kappa_schedule{ScheduleKind::power, 0.25};

  double beta() const { return schedule_value(beta_schedule, step, total_steps); }
  double kappa() const { return schedule_value(kappa_schedule, step, total_steps); }
};

}  // namespace amod
