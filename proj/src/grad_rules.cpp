#include "eventq/grad_rules.hpp"

#include <string>

#include "eventq/errors.hpp"

namespace eventq {

std::optional<ThresholdCrossing> detect_crossing(const Dual& v_prev, const Dual& v_curr, double v_th, Step step,
                                                 double dt) {
  if (!(dt > 0.0)) throw ConfigError("detect_crossing: dt must be positive");
  if (!(v_prev.primal < v_th && v_th <= v_curr.primal)) return std::nullopt;

  const double rise = v_curr.primal - v_prev.primal;
  const double v_dot = rise / dt;
  if (v_dot < kGrazingSlopeFloor) {
    throw GrazingCrossingError("threshold crossing at step " + std::to_string(step) + " with slope " +
                               std::to_string(v_dot) + " below the floor; spike-time gradient undefined");
  }
  const double frac = (v_th - v_prev.primal) / rise;
  const double dv_dtheta = (1.0 - frac) * v_prev.tangent + frac * v_curr.tangent;

  ThresholdCrossing c;
  c.step = step;
  c.t_spk = (static_cast<double>(step) - 1.0) * dt + dt * frac;
  c.frac = frac;
  c.v_dot = v_dot;
  c.dt_dtheta = -dv_dtheta / v_dot;
  return c;
}

DelayedTime compose_delay(const ThresholdCrossing& crossing, const Dual& delay) {
  if (delay.primal < 0.0) throw ConfigError("compose_delay: delay must be non-negative");
  return {crossing.t_spk + delay.primal, crossing.dt_dtheta + delay.tangent};
}

Dual jump(const Dual& x_minus, const Dual& delta, double xdot_minus, double xdot_plus, double event_time_tangent) {
  return {x_minus.primal + delta.primal,
          x_minus.tangent + (xdot_minus - xdot_plus) * event_time_tangent + delta.tangent};
}

Dual apply_jump(const Dual& x, const SynapseJumpSpec& spec, double time_tangent) {
  if (!(spec.tau > 0.0)) throw ConfigError("apply_jump: tau must be positive");
  const double xdot_minus = -x.primal / spec.tau;
  const double xdot_plus = -(x.primal + spec.w.primal) / spec.tau;
  return jump(x, spec.w, xdot_minus, xdot_plus, time_tangent);
}

Dual apply_jump_pulse(const Dual& x, const AggregatedPulse& pulse, double tau) {
  if (!(tau > 0.0)) throw ConfigError("apply_jump_pulse: tau must be positive");
  Dual out = x + pulse.weight;
  out.tangent += pulse.weighted_time_tangent / tau;
  return out;
}

}  // namespace eventq
