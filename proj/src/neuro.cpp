#include "eventq/neuro.hpp"

#include <algorithm>
#include <cmath>

#include "eventq/errors.hpp"

namespace eventq {

void synapse_step(FirstOrderSynapse& s, const AggregatedPulse& pulse, double dt) {
  if (!(dt > 0.0)) throw ConfigError("synapse_step: dt must be positive");
  s.i_syn = apply_jump_pulse(dual_exp_decay(s.i_syn, dt, s.tau_syn), pulse, s.tau_syn);
}

DoubleExpSynapse::DoubleExpSynapse(double tau_a, double tau_b, double e_syn)
    : tau_a_(tau_a), tau_b_(tau_b), e_syn_(e_syn) {
  if (!(tau_a > 0.0 && tau_b > 0.0)) throw ConfigError("double-exponential synapse: time constants must be positive");
  if (std::abs(tau_a - tau_b) < 1e-3 * tau_b) {
    throw ConfigError("double-exponential synapse: tau_a and tau_b must differ by at least 1e-3 * tau_b");
  }
}

void DoubleExpSynapse::step(const AggregatedPulse& pulse, double dt) {
  if (!(dt > 0.0)) throw ConfigError("double-exponential synapse: dt must be positive");
  a = apply_jump_pulse(dual_exp_decay(a, dt, tau_a_), pulse, tau_a_);
  b = apply_jump_pulse(dual_exp_decay(b, dt, tau_b_), pulse, tau_b_);
}

Dual DoubleExpSynapse::current(const Dual& v_post) const {
  return (a - b) * (v_post - Dual::constant(e_syn_));
}

Dual double_exp_current(const DoubleExpSynapse& s, const Dual& v_post) { return s.current(v_post); }

std::optional<ThresholdCrossing> lif_step(LIFNeuron& n, const Dual& i_in, double dt, Step step) {
  if (!(dt > 0.0)) throw ConfigError("lif_step: dt must be positive");
  const Dual v_prev = n.v;
  const Dual v_next = i_in + (v_prev - i_in) * std::exp(-dt / n.tau_m);
  return lif_resolve(n, v_prev, v_next, i_in, dt, step);
}

std::optional<ThresholdCrossing> lif_resolve(LIFNeuron& n, const Dual& v_prev, const Dual& v_next, const Dual& i_in,
                                             double dt, Step step) {
  if (n.refractory_remaining > 0) {
    --n.refractory_remaining;
    n.v = v_next;
    return std::nullopt;
  }
  auto crossing = detect_crossing(v_prev, v_next, n.v_th, step, dt);
  if (!crossing) {
    n.v = v_next;
    return std::nullopt;
  }
  // Membrane state on both sides of the reset at t_spk.
  const Dual at_threshold{n.v_th, -crossing->v_dot * crossing->dt_dtheta};
  const double vdot_plus = (i_in.primal - n.v_reset) / n.tau_m;
  const Dual reset = jump(at_threshold, Dual::constant(n.v_reset - n.v_th), crossing->v_dot, vdot_plus,
                          crossing->dt_dtheta);
  const double remaining = std::max(0.0, static_cast<double>(step) * dt - crossing->t_spk);
  n.v = i_in + (reset - i_in) * std::exp(-remaining / n.tau_m);
  n.refractory_remaining = n.refractory_steps;
  return crossing;
}

double lif_firing_period(double tau_m, double v_th, double v_reset, double i_in) {
  if (!(i_in > v_th)) throw ConfigError("lif_firing_period: drive must exceed threshold");
  return -tau_m * std::log((i_in - v_th) / (i_in - v_reset));
}

ContinuousDelayLine::ContinuousDelayLine(const Dual& delay, double dt) : delay_(delay), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("delay line: dt must be positive");
  if (!(delay.primal >= 0.0)) throw ConfigError("delay line: delay must be non-negative");
  length_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(delay.primal / dt)));
  ring_.assign(length_ + 2, Dual{});
}

Dual ContinuousDelayLine::step(const Dual& y_in) {
  ring_[write_] = y_in;
  ++written_;
  const std::size_t size = ring_.size();
  // Sample written length_ steps ago and the one before it.
  const std::size_t read = (write_ + size - length_) % size;
  const std::size_t older = (read + size - 1) % size;
  if (++write_ == size) write_ = 0;

  const Dual& y = ring_[read];
  const double slope = (y.primal - ring_[older].primal) / dt_;
  return {y.primal, y.tangent - slope * delay_.tangent};
}

}  // namespace eventq
