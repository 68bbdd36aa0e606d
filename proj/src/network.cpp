#include "eventq/network.hpp"

#include <algorithm>
#include <cmath>

namespace eventq {

namespace {

std::string edge_name(std::size_t pre, std::size_t post) {
  return "edge " + std::to_string(pre) + "->" + std::to_string(post);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return h ^ (x ^ (x >> 31));
}

bool is_single_spike(QueueKind kind) {
  return kind == QueueKind::SingleSpikeHold || kind == QueueKind::SingleSpikeDrop;
}

}  // namespace

NetworkParams random_network(std::size_t n, double dt, std::uint64_t seed, const RandomNetworkOptions& options) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> weight(0.0, options.weight_scale);
  std::uniform_real_distribution<double> delay(options.delay_min, options.delay_max);
  std::uniform_real_distribution<double> bias(options.bias_min, options.bias_max);

  NetworkParams p;
  p.n = n;
  p.dt = dt;
  p.weights.assign(n * n, 0.0);
  p.delays.assign(n * n, 0.0);
  for (std::size_t pre = 0; pre < n; ++pre) {
    for (std::size_t post = 0; post < n; ++post) {
      if (pre == post) continue;
      p.weights[pre * n + post] = weight(rng);
      p.delays[pre * n + post] = options.homogeneous_delays ? options.delay_min : delay(rng);
    }
  }
  p.bias.resize(n);
  for (auto& b : p.bias) b = bias(rng);
  p.target.assign(n, 0.5 * p.v_th);
  return p;
}

std::string SeedDirection::describe() const {
  switch (target) {
    case Target::Weight:
      return "weight[" + std::to_string(pre) + "][" + std::to_string(post) + "]";
    case Target::Delay:
      return "delay[" + std::to_string(pre) + "][" + std::to_string(post) + "]";
    case Target::Bias:
      return "bias[" + std::to_string(pre) + "]";
  }
  return "?";
}

double seeded_value(const NetworkParams& params, const SeedDirection& seed) {
  switch (seed.target) {
    case SeedDirection::Target::Weight:
      return params.weight(seed.pre, seed.post);
    case SeedDirection::Target::Delay:
      return params.delay(seed.pre, seed.post);
    case SeedDirection::Target::Bias:
      return params.bias[seed.pre];
  }
  return 0.0;
}

NetworkParams perturbed(const NetworkParams& params, const SeedDirection& seed, double delta) {
  NetworkParams p = params;
  switch (seed.target) {
    case SeedDirection::Target::Weight:
      p.weights[seed.pre * p.n + seed.post] += delta;
      break;
    case SeedDirection::Target::Delay:
      p.delays[seed.pre * p.n + seed.post] += delta;
      break;
    case SeedDirection::Target::Bias:
      p.bias[seed.pre] += delta;
      break;
  }
  return p;
}

Network::Network(NetworkParams params, std::optional<SeedDirection> seed, std::uint64_t rng_seed,
                 const simd::Kernels& kernels)
    : params_(std::move(params)), seed_(seed), kernels_(&kernels), rng_(rng_seed) {
  auto& p = params_;
  const std::size_t n = p.n;
  if (n < 2) throw ConfigError("network: need at least 2 neurons");
  if (p.weights.size() != n * n || p.delays.size() != n * n) {
    throw ConfigError("network: weight and delay matrices must be n*n");
  }
  if (p.bias.empty()) p.bias.assign(n, 0.0);
  if (p.target.empty()) p.target.assign(n, 0.0);
  if (p.bias.size() != n || p.target.size() != n) throw ConfigError("network: bias and target must have n entries");
  if (!(p.dt > 0.0 && p.tau_m > 0.0 && p.tau_syn > 0.0)) {
    throw ConfigError("network: dt and time constants must be positive");
  }
  if (seed_) {
    const bool neuron_ok = seed_->pre < n && (seed_->target == SeedDirection::Target::Bias ||
                                              (seed_->post < n && seed_->pre != seed_->post));
    if (!neuron_ok) throw ConfigError("network: seed direction " + seed_->describe() + " is not a parameter");
  }

  double max_delay = 0.0;
  for (std::size_t pre = 0; pre < n; ++pre) {
    for (std::size_t post = 0; post < n; ++post) {
      if (pre == post) continue;
      const double d = p.delay(pre, post);
      if (!(d >= p.dt * (1.0 - 1e-12))) {
        throw ConfigError("network: " + edge_name(pre, post) + " delay " + std::to_string(d) +
                          " is shorter than dt");
      }
      max_delay = std::max(max_delay, d);
    }
  }
  const auto horizon = static_cast<std::size_t>(std::ceil(max_delay / p.dt)) + 1;

  QueueConfig config = p.queue;
  if (seed_ && !capabilities_of({config.kind, std::max<std::size_t>(config.capacity, 1), 1}).supports_gradients) {
    throw CapabilityError("gradients", std::string(kind_name(config.kind)) + " does not support gradients");
  }
  config.max_delay = horizon;
  if (config.kind == QueueKind::Ring) config.capacity = horizon;
  const QueueCapabilities caps = capabilities_of(config);
  per_edge_ = is_single_spike(config.kind);
  weighted_ = caps.weighted;

  if (!caps.supports_heterogeneous_delay && !per_edge_) {
    for (std::size_t post = 0; post < n; ++post) {
      const std::size_t first = post == 0 ? 1 : 0;
      const double d0 = p.delay(first, post);
      for (std::size_t pre = 0; pre < n; ++pre) {
        if (pre == post) continue;
        const double d = p.delay(pre, post);
        const double steps = d / p.dt;
        if (d != d0) {
          throw CapabilityError("heterogeneous_delay", std::string(kind_name(config.kind)) +
                                                           " needs one delay per target: " + edge_name(pre, post) +
                                                           " differs from " + edge_name(first, post));
        }
        if (std::abs(steps - std::round(steps)) > 1e-9) {
          throw CapabilityError("heterogeneous_delay", std::string(kind_name(config.kind)) + ": " +
                                                           edge_name(pre, post) +
                                                           " delay is not a whole number of steps");
        }
      }
    }
  }
  if (!weighted_) {
    incoming_weight_.assign(n, 0.0);
    for (std::size_t post = 0; post < n; ++post) {
      const std::size_t first = post == 0 ? 1 : 0;
      incoming_weight_[post] = p.weight(first, post);
      for (std::size_t pre = 0; pre < n; ++pre) {
        if (pre != post && p.weight(pre, post) != incoming_weight_[post]) {
          throw CapabilityError("weighted", std::string(kind_name(config.kind)) +
                                                " carries unit spikes; " + edge_name(pre, post) +
                                                " weight differs from the other inputs of its target");
        }
      }
    }
  }

  const std::size_t queue_count = per_edge_ ? n * n : n;
  queues_.reserve(queue_count);
  for (std::size_t q = 0; q < queue_count; ++q) queues_.push_back(make_queue(config));

  v_.assign(n, p.v_reset);
  v_tan_.assign(n, 0.0);
  i_.assign(n, 0.0);
  i_tan_.assign(n, 0.0);
  v_prev_.resize(n);
  v_prev_tan_.resize(n);
  input_.resize(n);
  input_tan_.resize(n);
  refractory_.assign(n, 0);
  drive_.assign(n, Dual{});
  decay_m_ = std::exp(-p.dt / p.tau_m);
  decay_syn_ = std::exp(-p.dt / p.tau_syn);
}

Dual Network::weight_of(std::size_t pre, std::size_t post) const {
  const bool seeded = seed_ && seed_->target == SeedDirection::Target::Weight && seed_->pre == pre &&
                      seed_->post == post;
  return {params_.weight(pre, post), seeded ? 1.0 : 0.0};
}

Dual Network::delay_of(std::size_t pre, std::size_t post) const {
  const bool seeded = seed_ && seed_->target == SeedDirection::Target::Delay && seed_->pre == pre &&
                      seed_->post == post;
  return {params_.delay(pre, post), seeded ? 1.0 : 0.0};
}

Dual Network::bias_of(std::size_t j) const {
  const bool seeded = seed_ && seed_->target == SeedDirection::Target::Bias && seed_->pre == j;
  return {params_.bias[j], seeded ? 1.0 : 0.0};
}

std::uint64_t Network::drop_count() const {
  std::uint64_t total = 0;
  for (const auto& q : queues_) total += q.stats().lost();
  return total;
}

void Network::step(std::span<const Dual> drive) {
  const auto& p = params_;
  const std::size_t n = p.n;
  if (drive.size() != n) throw ConfigError("network_step: drive must have one entry per neuron");
  const bool tangents = carries_tangents();

  // Membrane: exponential-Euler update of every neuron, then crossings.
  v_prev_ = v_;
  for (std::size_t j = 0; j < n; ++j) input_[j] = i_[j] + p.bias[j];
  kernels_->relax(v_.data(), input_.data(), n, decay_m_);
  if (tangents) {
    v_prev_tan_ = v_tan_;
    for (std::size_t j = 0; j < n; ++j) input_tan_[j] = i_tan_[j] + bias_of(j).tangent;
    kernels_->relax(v_tan_.data(), input_tan_.data(), n, decay_m_);
  }
  ++step_;

  emitted_.clear();
  for (std::size_t j = 0; j < n; ++j) {
    // Only refractory countdowns and threshold crossings need the full update.
    if (refractory_[j] == 0 && !(v_prev_[j] < p.v_th && p.v_th <= v_[j])) continue;
    LIFNeuron cell{{}, p.tau_m, p.v_th, p.v_reset, p.refractory_steps, refractory_[j]};
    const Dual prev{v_prev_[j], tangents ? v_prev_tan_[j] : 0.0};
    const Dual next{v_[j], tangents ? v_tan_[j] : 0.0};
    const Dual in{input_[j], tangents ? input_tan_[j] : 0.0};
    auto crossing = lif_resolve(cell, prev, next, in, p.dt, step_);
    v_[j] = cell.v.primal;
    v_tan_[j] = cell.v.tangent;
    refractory_[j] = cell.refractory_remaining;
    if (crossing) emitted_.emplace_back(j, *crossing);
  }
  for (std::size_t j : forced_) {
    const bool already = std::any_of(emitted_.begin(), emitted_.end(), [j](const auto& e) { return e.first == j; });
    if (already) continue;
    ThresholdCrossing c;
    c.step = step_;
    c.t_spk = static_cast<double>(step_) * p.dt;
    v_[j] = p.v_reset;
    v_tan_[j] = 0.0;
    refractory_[j] = p.refractory_steps;
    emitted_.emplace_back(j, c);
  }
  forced_.clear();

  // Synapses: decay over the step, then the pulses due at its end.
  kernels_->scale(i_.data(), n, decay_syn_);
  if (tangents) kernels_->scale(i_tan_.data(), n, decay_syn_);
  for (std::size_t post = 0; post < n; ++post) {
    AggregatedPulse pulse;
    if (per_edge_) {
      for (std::size_t pre = 0; pre < n; ++pre) {
        if (pre != post) pulse += queue_for(pre, post).pop_due();
      }
    } else {
      pulse = queues_[post].pop_due();
    }
    if (!weighted_) {
      pulse.weight = {static_cast<double>(pulse.count) * incoming_weight_[post], 0.0};
      pulse.weighted_time_tangent = 0.0;
    }
    delivered_ += pulse.count;
    if (tangents) {
      const Dual x = apply_jump_pulse({i_[post], i_tan_[post]}, pulse, p.tau_syn) + drive[post];
      i_[post] = x.primal;
      i_tan_[post] = x.tangent;
    } else {
      i_[post] = (i_[post] + pulse.weight.primal) + drive[post].primal;
    }
  }

  for (const auto& [pre, crossing] : emitted_) {
    spikes_.push_back({step_, pre, crossing.t_spk});
    signature_ = mix(signature_, (static_cast<std::uint64_t>(step_) << 20) ^ pre);
    fan_out(pre, crossing);
  }
}

void Network::fan_out(std::size_t pre, const ThresholdCrossing& crossing) {
  const auto& p = params_;
  for (std::size_t post = 0; post < p.n; ++post) {
    if (post == pre) continue;
    const Dual d = delay_of(pre, post);
    const DelayedTime arrival = compose_delay(crossing, d);
    SpikeEvent ev;
    if (!weighted_) {
      ev.deliver_step = step_ + std::lround(d.primal / p.dt);
    } else {
      // First step boundary at or after t_post, computed relative to the
      // start of the crossing step to keep the rounding local.
      const double offset = crossing.frac + d.primal / p.dt;
      ev.deliver_step = std::max(crossing.step - 1 + static_cast<Step>(std::ceil(offset)), step_ + 1);
      // Sub-step arrival: the jump happened `lag` before the step boundary,
      // so it has already decayed by exp(-lag / tau_syn) when delivered.
      const double lag = static_cast<double>(ev.deliver_step) * p.dt - arrival.t_post;
      ev.weight = p.subsample_arrivals ? weight_of(pre, post) * std::exp(-lag / p.tau_syn) : weight_of(pre, post);
      ev.time_tangent = arrival.time_tangent;
    }
    queue_for(pre, post).enqueue(ev);
    signature_ = mix(signature_, (static_cast<std::uint64_t>(ev.deliver_step) << 20) ^ post);
  }
}

Dual Network::loss() const {
  Dual total{};
  for (std::size_t j = 0; j < params_.n; ++j) {
    const Dual diff = voltage(j) - Dual::constant(params_.target[j]);
    total += diff * diff;
  }
  return total;
}

std::uint64_t Network::enqueued() const {
  std::uint64_t total = 0;
  for (const auto& q : queues_) total += q.stats().enqueued;
  return total;
}

SimResult Network::simulate(Step steps, const std::function<void(const Network&)>& observer) {
  if (steps < 1) throw ConfigError("simulate: need at least one step");
  const auto& p = params_;
  std::bernoulli_distribution kick(std::clamp(p.drive_rate, 0.0, 1.0));
  for (Step t = 0; t < steps; ++t) {
    for (auto& d : drive_) d = Dual::constant(kick(rng_) ? p.drive_amplitude : 0.0);
    step(drive_);
    if (observer) observer(*this);
  }
  return {loss(), spikes_.size(), drop_count(), delivered_, signature_};
}

Network build_rsnn(const NetworkParams& params, std::optional<SeedDirection> seed, std::uint64_t rng_seed) {
  return Network(params, seed, rng_seed);
}

SimResult simulate(const NetworkParams& params, std::optional<SeedDirection> seed, std::uint64_t rng_seed,
                   Step steps) {
  Network net(params, seed, rng_seed);
  return net.simulate(steps);
}

FdResult grad_fd_oracle(const NetworkParams& params, const SeedDirection& seed, double epsilon,
                        std::uint64_t rng_seed, Step steps) {
  if (!(epsilon > 0.0)) throw ConfigError("grad_fd_oracle: epsilon must be positive");
  const SimResult base = simulate(params, std::nullopt, rng_seed, steps);
  const SimResult plus = simulate(perturbed(params, seed, epsilon), std::nullopt, rng_seed, steps);
  const SimResult minus = simulate(perturbed(params, seed, -epsilon), std::nullopt, rng_seed, steps);

  FdResult out;
  out.derivative = (plus.loss.primal - minus.loss.primal) / (2.0 * epsilon);
  if (plus.spike_count != base.spike_count || minus.spike_count != base.spike_count) {
    out.smooth = false;
    out.reason = "non-smooth direction: spike count changes under +-" + std::to_string(epsilon);
  } else if (plus.signature != base.signature || minus.signature != base.signature) {
    out.smooth = false;
    out.reason = "non-smooth direction: spike or delivery steps change under +-" + std::to_string(epsilon);
  }
  return out;
}

double default_fd_epsilon(const NetworkParams& params, const SeedDirection& seed) {
  return std::max(1e-6 * std::abs(seeded_value(params, seed)), 1e-9);
}

GradCheckRow check_direction(const NetworkParams& params, const SeedDirection& direction, std::uint64_t rng_seed,
                             Step steps) {
  GradCheckRow row;
  row.direction = direction;
  row.jvp = simulate(params, direction, rng_seed, steps).loss.tangent;
  const FdResult fd = grad_fd_oracle(params, direction, default_fd_epsilon(params, direction), rng_seed, steps);
  row.fd = fd.derivative;
  row.smooth = fd.smooth;
  row.reason = fd.reason;
  const double scale = std::max(std::abs(row.jvp), std::abs(row.fd));
  row.rel_err = scale > 0.0 ? std::abs(row.jvp - row.fd) / scale : 0.0;
  return row;
}

std::vector<SeedDirection> sample_directions(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n < 2) throw ConfigError("sample_directions: need at least 2 neurons");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<SeedDirection> out;
  for (std::size_t k = 0; k < count; ++k) {
    SeedDirection d;
    d.target = k % 2 == 0 ? SeedDirection::Target::Weight : SeedDirection::Target::Delay;
    d.pre = pick(rng);
    do {
      d.post = pick(rng);
    } while (d.post == d.pre);
    out.push_back(d);
  }
  return out;
}

SingleSpikeProbe single_spike_probe(double delay, double weight, double tau_syn, double dt, Step spike_step,
                                    Step steps) {
  if (spike_step < 1 || spike_step >= steps) throw ConfigError("single_spike_probe: spike step must be in [1, steps)");
  NetworkParams p;
  p.n = 2;
  p.dt = dt;
  p.tau_syn = tau_syn;
  p.weights = {0.0, weight, 0.0, 0.0};
  p.delays = {0.0, delay, delay, 0.0};
  p.bias = {0.0, 0.0};
  // Keep neuron 1 silent whatever the pulse size.
  p.v_th = 1.0 + 2.0 * std::abs(weight);
  Network net(p, SeedDirection{SeedDirection::Target::Delay, 0, 1}, 0);
  const std::vector<Dual> drive(2);
  for (Step s = 1; s <= steps; ++s) {
    if (s == spike_step) net.force_spike(0);
    net.step(drive);
  }
  return {static_cast<double>(spike_step) * dt + delay, net.current(1), static_cast<double>(steps) * dt};
}

}  // namespace eventq
