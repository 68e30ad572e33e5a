#include "amod/training/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace amod {

void ScheduleSpec::validate() const {
  switch (kind) {
    case ScheduleKind::linear:
      return;
    case ScheduleKind::power:
      if (!(param > 0.0) || !std::isfinite(param))
        throw std::invalid_argument("power schedule needs a positive exponent");
      return;
    case ScheduleKind::jump:
      if (!(param >= 0.0 && param <= 1.0))
        throw std::invalid_argument("jump schedule needs a fraction in [0, 1]");
      return;
  }
}

ScheduleSpec parse_schedule(const std::string& text) {
  static const std::regex form(R"(\s*(linear|power|jump)\s*(?:\(\s*([-+0-9.eE]+)\s*\))?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, form)) throw std::invalid_argument("bad schedule '" + text + "'");
  ScheduleSpec spec;
  const std::string kind = m[1];
  if (kind == "linear") {
    if (m[2].matched) throw std::invalid_argument("linear schedule takes no argument");
    return spec;
  }
  if (!m[2].matched) throw std::invalid_argument(kind + " schedule needs an argument");
  spec.kind = kind == "power" ? ScheduleKind::power : ScheduleKind::jump;
  try {
    spec.param = std::stod(m[2]);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad schedule argument in '" + text + "'");
  }
  spec.validate();
  return spec;
}

std::string to_string(const ScheduleSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case ScheduleKind::linear:
      return "linear";
    case ScheduleKind::power:
      os << "power(" << spec.param << ")";
      break;
    case ScheduleKind::jump:
      os << "jump(" << spec.param << ")";
      break;
  }
  return os.str();
}

double schedule_value(const ScheduleSpec& spec, std::int64_t step, std::int64_t total_steps) {
  spec.validate();
  if (total_steps <= 0) throw std::invalid_argument("schedule needs total_steps > 0");
  const double x = std::clamp(static_cast<double>(step) / static_cast<double>(total_steps), 0.0, 1.0);
  switch (spec.kind) {
    case ScheduleKind::linear:
      return x;
    case ScheduleKind::power:
      return std::pow(x, spec.param);
    case ScheduleKind::jump:
      // Jump at the first step at or past f * total; f = 0 is on from the start.
      if (step >= total_steps) return 1.0;
      return static_cast<double>(step) >= spec.param * static_cast<double>(total_steps) && step > 0
                 ? 1.0
                 : 0.0;
  }
  return x;
}

}  // namespace amod
