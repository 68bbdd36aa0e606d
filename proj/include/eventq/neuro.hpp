#pragma once

// Synapse and neuron models with exact exponential integration between
// events, plus a delay line for continuous signals.

#include <cstddef>
#include <optional>
#include <vector>

#include "eventq/dual.hpp"
#include "eventq/event.hpp"
#include "eventq/grad_rules.hpp"

namespace eventq {

/// di/dt = -i/tau_syn, jumping by the delivered pulse.
struct FirstOrderSynapse {
  Dual i_syn{};
  double tau_syn = 5.0;
};

/// Decays over dt, then applies the pulse due at the end of the step.
void synapse_step(FirstOrderSynapse& s, const AggregatedPulse& pulse, double dt);

/// Conductance synapse i = (A - B)(v_post - E_syn) with two first-order
/// traces driven by the same pulses.
class DoubleExpSynapse {
 public:
  /// Rejects non-positive time constants and |tau_a - tau_b| < 1e-3 * tau_b.
  DoubleExpSynapse(double tau_a, double tau_b, double e_syn);

  void step(const AggregatedPulse& pulse, double dt);
  Dual current(const Dual& v_post) const;

  Dual a{};
  Dual b{};

  double tau_a() const { return tau_a_; }
  double tau_b() const { return tau_b_; }
  double e_syn() const { return e_syn_; }

 private:
  double tau_a_;
  double tau_b_;
  double e_syn_;
};

Dual double_exp_current(const DoubleExpSynapse& s, const Dual& v_post);

/// dv/dt = (-v + i)/tau_m with hard reset to v_reset on crossing v_th.
struct LIFNeuron {
  Dual v{};
  double tau_m = 20.0;
  double v_th = 1.0;
  double v_reset = 0.0;
  int refractory_steps = 0;
  int refractory_remaining = 0;
};

/// Advances from step-1 to `step` with i_in held constant (exponential Euler,
/// exact for constant input). On a crossing outside the refractory period
/// the membrane is reset at the interpolated spike time and relaxes toward
/// i_in for the rest of the step. The reset carries the jump tangent
/// -(dv+/dt) * dt_spk/dtheta, since the jump size v_reset - v_th is fixed.
std::optional<ThresholdCrossing> lif_step(LIFNeuron& n, const Dual& i_in, double dt, Step step);

/// Second half of lif_step for callers that computed the free update
/// v_next themselves (the batched network path): refractory gate, crossing
/// detection and reset.
std::optional<ThresholdCrossing> lif_resolve(LIFNeuron& n, const Dual& v_prev, const Dual& v_next, const Dual& i_in,
                                             double dt, Step step);

/// Closed-form LIF inter-spike interval for constant drive i_in > v_th,
/// starting from v_reset.
double lif_firing_period(double tau_m, double v_th, double v_reset, double i_in);

/// Delays a sampled signal by d. The buffer holds round(d/dt) samples
/// (at least 1) plus one older sample for the slope at the read point.
class ContinuousDelayLine {
 public:
  ContinuousDelayLine(const Dual& delay, double dt);

  /// Writes y_in and returns the sample from `length()` steps earlier. Its
  /// tangent adds the delay correction -(dy/dt) * dd/dtheta at the read point.
  Dual step(const Dual& y_in);

  std::size_t length() const { return length_; }
  const Dual& delay() const { return delay_; }
  bool warmed_up() const { return written_ > length_ + 1; }

 private:
  std::vector<Dual> ring_;  // length_ + 2 samples
  std::size_t length_;
  std::size_t write_ = 0;
  std::size_t written_ = 0;
  Dual delay_;
  double dt_;
};

}  // namespace eventq
