#pragma once

// Tangent propagation through spike events: spike-time derivatives at a
// threshold crossing, delay composition, and the jump rule applied when a
// spike reaches a first-order state variable.

#include <cmath>
#include <optional>

#include "eventq/dual.hpp"
#include "eventq/event.hpp"

namespace eventq {

/// Crossings with a slope below this (volt per time unit) are rejected.
inline constexpr double kGrazingSlopeFloor = 1e-9;

struct ThresholdCrossing {
  Step step = 0;          // first step with v >= v_th
  double t_spk = 0.0;     // linearly interpolated crossing time
  double frac = 1.0;      // position of t_spk within the step, in (0, 1]
  double v_dot = 0.0;     // secant slope over the crossing step
  double dt_dtheta = 0.0; // d(t_spk)/d(theta)
};

/// Positive crossing of v_th between step-1 and `step`, if any. The crossing
/// time is linearly interpolated, and its tangent is -(dv/dtheta)/v_dot with
/// dv/dtheta blended at the crossing point. That is the exact derivative of
/// the interpolated time. Throws GrazingCrossingError below the slope floor.
std::optional<ThresholdCrossing> detect_crossing(const Dual& v_prev, const Dual& v_curr, double v_th, Step step,
                                                 double dt);

struct DelayedTime {
  double t_post = 0.0;
  double time_tangent = 0.0;
};

/// t_post = t_spk + d; its tangent is the sum of both tangents.
DelayedTime compose_delay(const ThresholdCrossing& crossing, const Dual& delay);

/// General jump of a state variable at an event time:
///   x+ = x- + delta
///   dx+/dtheta = dx-/dtheta + (xdot- - xdot+) * dt_event/dtheta + ddelta/dtheta
Dual jump(const Dual& x_minus, const Dual& delta, double xdot_minus, double xdot_plus, double event_time_tangent);

struct SynapseJumpSpec {
  double tau = 1.0;
  Dual w{1.0, 0.0};
};

/// Jump of a decaying state (dx/dt = -x/tau) by w. The slopes on both sides
/// come from the decay law, so the time term is +w/tau per unit of time tangent.
Dual apply_jump(const Dual& x, const SynapseJumpSpec& spec, double time_tangent);

/// Jump by a merged pulse: the sum of the per-event jumps.
Dual apply_jump_pulse(const Dual& x, const AggregatedPulse& pulse, double tau);

constexpr double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// SuperSpike surrogate derivative of the Heaviside step.
inline double superspike_grad(double x) {
  const double d = std::abs(x) + 1.0;
  return 1.0 / (d * d);
}

}  // namespace eventq
