#pragma once

// Trace-driven equivalence against the dense reference queue.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eventq/event_queue.hpp"

namespace eventq {

/// One enqueue: `event` is offered to the queue while it sits at
/// `enqueue_step` (before that step's pop).
struct TraceEntry {
  Step enqueue_step = 0;
  SpikeEvent event{};
};

using Trace = std::vector<TraceEntry>;

struct Divergence {
  Step step = 0;
  AggregatedPulse expected{};
  AggregatedPulse got{};
};

struct EquivalenceReport {
  enum class Verdict { Equal, Diverged, Rejected };

  Verdict verdict = Verdict::Equal;
  std::optional<Divergence> divergence;
  std::string reason;  // why a trace was rejected
  Step steps_compared = 0;

  bool equal() const { return verdict == Verdict::Equal; }
};

/// Relative tolerance on merged weights and time tangents; counts and
/// delivery steps must match exactly.
inline constexpr double kPulseRelTol = 1e-12;

bool pulses_match(const AggregatedPulse& expected, const AggregatedPulse& got, double rel_tol = kPulseRelTol);

/// Empty when the trace respects what `caps` allows (sorted enqueue steps,
/// causal, within horizon, homogeneous/unit where required, never more
/// in-flight events than capacity for bounded storage kinds), otherwise the
/// first violation.
std::optional<std::string> check_trace(const Trace& trace, const QueueConfig& config);

/// Replays the trace through the configured kind and through a dense oracle
/// and compares the pulse of every step until the last delivery.
EquivalenceReport dense_oracle_equivalence(const Trace& trace, const QueueConfig& config);

/// Several configurations against one oracle replay; reports in input order.
std::vector<EquivalenceReport> dense_oracle_equivalence(const Trace& trace, const std::vector<QueueConfig>& configs);

/// Same comparison between two arbitrary configurations (no validation).
EquivalenceReport cross_kind_equivalence(const Trace& trace, const QueueConfig& reference,
                                         const QueueConfig& candidate);

/// Shape of a random trace.
struct TraceSpec {
  std::size_t events = 1000;
  std::size_t max_delay = 32;
  double mean_per_step = 1.0;              // Poisson-distributed arrivals per step
  bool homogeneous = false;                // one delay for every event
  bool unit = false;                       // weight (1, 0), no time tangent
  bool one_per_step = false;               // at most one arrival per step
  std::size_t max_in_flight = kUnbounded;  // arrivals above this are skipped
};

Trace random_trace(const TraceSpec& spec, std::mt19937_64& rng);

/// The trace shape that respects a kind's capabilities at the given
/// configuration; used by the randomized verification runs.
TraceSpec trace_spec_for(const QueueConfig& config, std::size_t events);

}  // namespace eventq
