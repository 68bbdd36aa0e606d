#pragma once

// All-to-all recurrent LIF network wired through a selectable queue kind,
// with forward-mode tangents along one seeded parameter.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eventq/event_queue.hpp"
#include "eventq/neuro.hpp"
#include "eventq/simd/kernels.hpp"

namespace eventq {

struct NetworkParams {
  std::size_t n = 10;
  std::vector<double> weights;  // n*n, [pre * n + post]; diagonal unused
  std::vector<double> delays;   // n*n time units, >= dt; diagonal unused
  std::vector<double> bias;     // constant input current per neuron
  std::vector<double> target;   // loss target voltage per neuron
  double tau_m = 1.0;
  double tau_syn = 0.2;
  double v_th = 1.0;
  double v_reset = 0.0;
  double dt = 1e-3;
  int refractory_steps = 0;
  // External Poisson kicks into the synaptic current.
  double drive_rate = 0.0;  // probability per step per neuron
  double drive_amplitude = 0.0;
  // Pre-decay each weighted spike by its sub-step arrival lag, which makes the
  // loss continuous in the delays. Unit-spike kinds cannot carry the lag.
  bool subsample_arrivals = true;
  // Kind and capacity; delay horizons are derived from the delay matrix (and
  // ring capacities are sized to it).
  QueueConfig queue{QueueKind::Ring, 1, 1};

  double weight(std::size_t pre, std::size_t post) const { return weights[pre * n + post]; }
  double delay(std::size_t pre, std::size_t post) const { return delays[pre * n + post]; }
};

struct RandomNetworkOptions {
  double weight_scale = 0.4;  // weights ~ N(0, scale)
  double delay_min = 0.02;    // time units
  double delay_max = 0.1;
  double bias_min = 1.8;
  double bias_max = 3.0;
  bool homogeneous_delays = false;  // every edge gets delay_min
};

/// Random parameters with the given time step; reproducible from `seed`.
NetworkParams random_network(std::size_t n, double dt, std::uint64_t seed, const RandomNetworkOptions& options = {});

/// The one scalar parameter carrying tangent 1.
struct SeedDirection {
  enum class Target { Weight, Delay, Bias };
  Target target = Target::Weight;
  std::size_t pre = 0;   // neuron index for Bias
  std::size_t post = 1;

  std::string describe() const;
  friend bool operator==(const SeedDirection&, const SeedDirection&) = default;
};

/// Primal value of the seeded parameter.
double seeded_value(const NetworkParams& params, const SeedDirection& seed);
/// Copy of params with the seeded parameter shifted by delta.
NetworkParams perturbed(const NetworkParams& params, const SeedDirection& seed, double delta);

struct SpikeRecord {
  Step step = 0;
  std::size_t neuron = 0;
  double t_spk = 0.0;
};

struct SimResult {
  Dual loss{};
  std::uint64_t spike_count = 0;
  std::uint64_t drop_count = 0;
  std::uint64_t delivered = 0;
  // Hash of every spike step and every scheduled delivery step; equal
  // signatures mean the same discrete event structure.
  std::uint64_t signature = 0;
};

/// Network state: membrane and synapse state per neuron, the queues, and the
/// step counter. Built by build_rsnn.
class Network {
 public:
  Network(NetworkParams params, std::optional<SeedDirection> seed, std::uint64_t rng_seed,
          const simd::Kernels& kernels = simd::kernels());

  const NetworkParams& params() const { return params_; }
  std::size_t size() const { return params_.n; }
  Step step_index() const { return step_; }
  bool carries_tangents() const { return seed_.has_value(); }
  std::size_t queue_count() const { return queues_.size(); }
  bool per_edge_queues() const { return per_edge_; }

  Dual voltage(std::size_t j) const { return {v_[j], v_tan_[j]}; }
  Dual current(std::size_t j) const { return {i_[j], i_tan_[j]}; }
  const std::vector<SpikeRecord>& spikes() const { return spikes_; }
  std::uint64_t drop_count() const;
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t signature() const { return signature_; }

  /// Fires neuron j at the end of the next step regardless of its voltage
  /// (zero spike-time tangent); used to inject single-event traces.
  void force_spike(std::size_t j) { forced_.push_back(j); }

  /// One step: membrane update, synaptic decay and delivery, fan-out of the
  /// spikes emitted in this step. `drive` (size n) jumps the synaptic current.
  void step(std::span<const Dual> drive);

  /// Loss sum_j (v_j - target_j)^2 at the current state.
  Dual loss() const;

  /// Runs `steps` steps with the seeded Poisson drive; `observer` sees the
  /// state after every step.
  SimResult simulate(Step steps, const std::function<void(const Network&)>& observer = {});

  std::uint64_t enqueued() const;

 private:
  void fan_out(std::size_t pre, const ThresholdCrossing& crossing);
  EventQueue& queue_for(std::size_t pre, std::size_t post) {
    return queues_[per_edge_ ? pre * params_.n + post : post];
  }
  Dual weight_of(std::size_t pre, std::size_t post) const;
  Dual delay_of(std::size_t pre, std::size_t post) const;
  Dual bias_of(std::size_t j) const;

  NetworkParams params_;
  std::optional<SeedDirection> seed_;
  const simd::Kernels* kernels_;
  bool per_edge_ = false;
  bool weighted_ = true;
  std::vector<double> incoming_weight_;  // unweighted kinds: the shared weight per target
  double decay_m_ = 1.0;
  double decay_syn_ = 1.0;

  std::vector<double> v_, v_tan_, i_, i_tan_;
  std::vector<double> v_prev_, v_prev_tan_, input_, input_tan_;
  std::vector<int> refractory_;
  std::vector<EventQueue> queues_;

  std::mt19937_64 rng_;
  std::vector<Dual> drive_;
  std::vector<std::size_t> forced_;
  std::vector<SpikeRecord> spikes_;
  std::vector<std::pair<std::size_t, ThresholdCrossing>> emitted_;
  Step step_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t signature_ = 0xcbf29ce484222325ull;
};

/// Validates parameters against the queue kind and builds the initial state:
/// v = v_reset, synapses at 0, empty queues, tangents zero except the seed.
/// Throws ConfigError/CapabilityError naming the offending edge.
Network build_rsnn(const NetworkParams& params, std::optional<SeedDirection> seed, std::uint64_t rng_seed);

/// Runs a fresh network for `steps` steps.
SimResult simulate(const NetworkParams& params, std::optional<SeedDirection> seed, std::uint64_t rng_seed, Step steps);

struct FdResult {
  double derivative = 0.0;
  bool smooth = true;
  std::string reason;  // set when !smooth
};

/// Central difference of the loss along `seed` with step epsilon. The
/// direction is reported non-smooth when either perturbed run changes the
/// spike count or the discrete event structure.
FdResult grad_fd_oracle(const NetworkParams& params, const SeedDirection& seed, double epsilon,
                        std::uint64_t rng_seed, Step steps);

/// Default FD step: 1e-6 relative to the parameter, at least 1e-9.
double default_fd_epsilon(const NetworkParams& params, const SeedDirection& seed);

struct GradCheckRow {
  SeedDirection direction;
  double jvp = 0.0;
  double fd = 0.0;
  double rel_err = 0.0;  // |jvp - fd| / max(|jvp|, |fd|); 0 when both vanish
  bool smooth = true;
  std::string reason;
};

/// Forward-mode tangent against the central difference along one direction.
GradCheckRow check_direction(const NetworkParams& params, const SeedDirection& direction, std::uint64_t rng_seed,
                             Step steps);

/// Random edges, alternating weight and delay directions.
std::vector<SeedDirection> sample_directions(std::size_t n, std::size_t count, std::uint64_t seed);

struct SingleSpikeProbe {
  double t_post = 0.0;    // arrival time of the spike
  Dual current{};         // postsynaptic current at the end, tangent along the delay
  double end_time = 0.0;  // steps * dt
};

/// Two-neuron network: neuron 0 is forced to spike at the end of step
/// `spike_step`; the edge 0->1 has weight `weight` and delay `delay` (seeded).
/// Neuron 1's synaptic current after `steps` steps.
SingleSpikeProbe single_spike_probe(double delay, double weight, double tau_syn, double dt, Step spike_step,
                                    Step steps);

}  // namespace eventq
