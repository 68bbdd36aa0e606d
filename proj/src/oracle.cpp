#include "eventq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace eventq {

namespace {

bool close(double a, double b, double rel_tol) {
  if (a == b) return true;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

// Min-heap of delivery steps currently in flight.
class InFlight {
 public:
  void advance_to(Step step) {
    while (!due_.empty() && due_.top() <= step) due_.pop();
  }
  void add(Step deliver) { due_.push(deliver); }
  std::size_t size() const { return due_.size(); }

 private:
  std::priority_queue<Step, std::vector<Step>, std::greater<>> due_;
};

// Replays the trace through the reference and every candidate still in
// play; a candidate leaves at its first mismatching step.
std::vector<EquivalenceReport> replay(const Trace& trace, EventQueue reference, std::vector<EventQueue> candidates,
                                      std::vector<EquivalenceReport> reports) {
  Step last_delivery = 0;
  for (const auto& e : trace) last_delivery = std::max(last_delivery, e.event.deliver_step);

  std::vector<std::size_t> live;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (reports[c].verdict == EquivalenceReport::Verdict::Equal) live.push_back(c);
  }
  std::size_t next = 0;
  for (Step step = 0; step < last_delivery && !live.empty(); ++step) {
    for (; next < trace.size() && trace[next].enqueue_step == step; ++next) {
      reference.enqueue(trace[next].event);
      for (std::size_t c : live) candidates[c].enqueue(trace[next].event);
    }
    const AggregatedPulse expected = reference.pop_due();
    std::erase_if(live, [&](std::size_t c) {
      const AggregatedPulse got = candidates[c].pop_due();
      ++reports[c].steps_compared;
      if (pulses_match(expected, got)) return false;
      reports[c].verdict = EquivalenceReport::Verdict::Diverged;
      reports[c].divergence = Divergence{step + 1, expected, got};
      return true;
    });
  }
  return reports;
}

}  // namespace

bool pulses_match(const AggregatedPulse& expected, const AggregatedPulse& got, double rel_tol) {
  return expected.count == got.count && close(expected.weight.primal, got.weight.primal, rel_tol) &&
         close(expected.weight.tangent, got.weight.tangent, rel_tol) &&
         close(expected.weighted_time_tangent, got.weighted_time_tangent, rel_tol);
}

std::optional<std::string> check_trace(const Trace& trace, const QueueConfig& config) {
  QueueCapabilities caps;
  try {
    caps = capabilities_of(config);
  } catch (const ConfigError& e) {
    return std::string(e.what());
  }
  const bool bounded_storage = config.kind != QueueKind::DoNothing && config.kind != QueueKind::Ring &&
                               config.kind != QueueKind::LossyRing && caps.capacity != kUnbounded;

  InFlight in_flight;
  Step previous = 0;
  Step homogeneous_delay = 0;
  Step last_deliver_step = -1;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& [at, ev] = trace[i];
    const auto where = [i] { return "entry " + std::to_string(i) + ": "; };
    if (at < previous) return where() + "enqueue steps must be non-decreasing";
    previous = at;
    const Step delay = ev.deliver_step - at;
    if (delay < 1) return where() + "causality: delivery must be at least one step after enqueue";
    if (caps.horizon != kUnbounded && static_cast<std::size_t>(delay) > caps.horizon) {
      return where() + "delay " + std::to_string(delay) + " exceeds horizon " + std::to_string(caps.horizon);
    }
    if (!caps.supports_heterogeneous_delay) {
      if (homogeneous_delay == 0) homogeneous_delay = delay;
      if (delay != homogeneous_delay) return where() + "heterogeneous delay on a homogeneous-only kind";
    }
    if (!caps.supports_gradients && (ev.weight.tangent != 0.0 || ev.time_tangent != 0.0)) {
      return where() + "gradient-carrying event on a kind without gradient support";
    }
    if (!caps.weighted && ev.weight.primal != 1.0) return where() + "weighted event on an unweighted kind";
    if (!caps.supports_multi_spike_per_step && config.kind == QueueKind::BitArray32) {
      if (ev.deliver_step == last_deliver_step) return where() + "two spikes due in the same step";
      last_deliver_step = ev.deliver_step;
    }
    if (bounded_storage) {
      in_flight.advance_to(at);
      in_flight.add(ev.deliver_step);
      if (in_flight.size() > caps.capacity) {
        return where() + "in-flight events exceed capacity " + std::to_string(caps.capacity);
      }
    }
  }
  return std::nullopt;
}

EquivalenceReport dense_oracle_equivalence(const Trace& trace, const QueueConfig& config) {
  return dense_oracle_equivalence(trace, std::vector<QueueConfig>{config}).front();
}

std::vector<EquivalenceReport> dense_oracle_equivalence(const Trace& trace, const std::vector<QueueConfig>& configs) {
  std::vector<EquivalenceReport> reports(configs.size());
  std::vector<EventQueue> candidates;
  candidates.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (auto problem = check_trace(trace, configs[c])) {
      reports[c].verdict = EquivalenceReport::Verdict::Rejected;
      reports[c].reason = *problem;
      candidates.push_back(make_queue(QueueConfig{QueueKind::DoNothing, 1, 1}));
    } else {
      candidates.push_back(make_queue(configs[c]));
    }
  }
  return replay(trace, EventQueue(DenseOracleQueue{}), std::move(candidates), std::move(reports));
}

EquivalenceReport cross_kind_equivalence(const Trace& trace, const QueueConfig& reference,
                                         const QueueConfig& candidate) {
  std::vector<EventQueue> candidates;
  candidates.push_back(make_queue(candidate));
  return replay(trace, make_queue(reference), std::move(candidates), std::vector<EquivalenceReport>(1)).front();
}

Trace random_trace(const TraceSpec& spec, std::mt19937_64& rng) {
  Trace trace;
  trace.reserve(spec.events);
  std::uniform_int_distribution<Step> delay_dist(1, static_cast<Step>(spec.max_delay));
  std::poisson_distribution<int> arrivals(spec.mean_per_step);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Step fixed_delay = delay_dist(rng);

  InFlight in_flight;
  const bool bounded = spec.max_in_flight != kUnbounded;
  for (Step step = 0; trace.size() < spec.events; ++step) {
    if (bounded) in_flight.advance_to(step);
    int k = arrivals(rng);
    if (spec.one_per_step) k = std::min(k, 1);
    for (int j = 0; j < k && trace.size() < spec.events; ++j) {
      if (bounded && in_flight.size() >= spec.max_in_flight) break;
      const Step delay = spec.homogeneous ? fixed_delay : delay_dist(rng);
      SpikeEvent ev{step + delay};
      if (!spec.unit) {
        ev.weight = {1.0 + 0.5 * unit(rng), unit(rng)};
        ev.time_tangent = unit(rng);
      }
      trace.push_back({step, ev});
      if (bounded) in_flight.add(ev.deliver_step);
    }
  }
  return trace;
}

TraceSpec trace_spec_for(const QueueConfig& config, std::size_t events) {
  TraceSpec spec;
  spec.events = events;
  spec.max_delay = config.max_delay;
  const double delay = static_cast<double>(config.max_delay);
  switch (config.kind) {
    case QueueKind::FIFORing:
      spec.homogeneous = true;
      spec.max_in_flight = config.capacity;
      spec.mean_per_step = std::min(2.0, static_cast<double>(config.capacity) / delay);
      break;
    case QueueKind::SingleSpikeHold:
    case QueueKind::SingleSpikeDrop:
      spec.max_in_flight = 1;
      spec.one_per_step = true;
      spec.mean_per_step = 2.0 / delay;
      break;
    case QueueKind::SortedArray:
    case QueueKind::BinaryHeap:
      spec.max_in_flight = config.capacity;
      spec.mean_per_step = std::min(2.0, static_cast<double>(config.capacity) / delay);
      break;
    case QueueKind::BitArray32:
      spec.homogeneous = true;
      spec.unit = true;
      spec.one_per_step = true;
      spec.mean_per_step = 0.5;
      break;
    default:
      spec.mean_per_step = 1.0;
      break;
  }
  return spec;
}

}  // namespace eventq
