#include "turnscan/scansim.hpp"

namespace turnscan {

TurntableState turntable_command(TurntableState state, char command) {
  switch (command) {
    case kCommandStart:
    case kCommandStop:
      if (state.halted) {
        ++state.ignored_commands;
        return state;
      }
      state.motor = command == kCommandStart;
      state.green_led = state.motor;
      state.red_led = !state.motor;
      return state;
    case kCommandHalt:
      state.motor = state.green_led = state.red_led = false;
      state.halted = true;
      return state;
    case kCommandReset:
      state.motor = state.green_led = false;
      state.red_led = true;
      state.halted = false;
      state.angle = 0.0;
      return state;
    default:
      ++state.ignored_commands;
      return state;
  }
}

TurntableState advance(TurntableState state, double seconds, double degrees_per_interval,
                       double interval_seconds) {
  if (state.motor && !state.halted && seconds > 0.0)
    state.angle += seconds / interval_seconds * degrees_per_interval;
  return state;
}

bool is_consistent(const TurntableState& s) {
  if (s.halted) return !s.motor && !s.green_led && !s.red_led;
  if (s.motor) return s.green_led && !s.red_led;
  return s.red_led && !s.green_led;
}

}  // namespace turnscan
