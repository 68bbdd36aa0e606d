#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

#include "eventq/dual.hpp"

namespace eventq {

using Step = std::int64_t;

/// A spike on its way to a target. `deliver_step` is the discretized arrival
/// time; `time_tangent` is d(t_post)/d(theta) in time units per theta-unit.
struct SpikeEvent {
  Step deliver_step = 0;
  Dual weight{1.0, 0.0};
  double time_tangent = 0.0;

  friend constexpr bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

/// Everything delivered to one target in one step, merged under the LTI
/// assumption. `count` is the number of merged spikes.
struct AggregatedPulse {
  Dual weight{};
  double weighted_time_tangent = 0.0;
  std::uint32_t count = 0;

  static constexpr AggregatedPulse from(const SpikeEvent& ev) {
    return {ev.weight, ev.weight.primal * ev.time_tangent, 1};
  }

  constexpr AggregatedPulse& operator+=(const AggregatedPulse& o) {
    weight += o.weight;
    weighted_time_tangent += o.weighted_time_tangent;
    count += o.count;
    return *this;
  }
  constexpr AggregatedPulse& operator+=(const SpikeEvent& ev) { return *this += from(ev); }

  constexpr bool empty() const { return count == 0; }

  friend constexpr bool operator==(const AggregatedPulse&, const AggregatedPulse&) = default;
};

constexpr AggregatedPulse operator+(AggregatedPulse a, const AggregatedPulse& b) { return a += b; }

enum class QueueKind {
  DoNothing,
  Ring,
  LossyRing,
  FIFORing,
  SingleSpikeHold,
  SingleSpikeDrop,
  SortedArray,
  BitArray32,
  BinaryHeap,
  DenseOracle,
  BGPQ,
};

inline constexpr QueueKind kAllKinds[] = {
    QueueKind::DoNothing,       QueueKind::Ring,        QueueKind::LossyRing,  QueueKind::FIFORing,
    QueueKind::SingleSpikeHold, QueueKind::SingleSpikeDrop, QueueKind::SortedArray, QueueKind::BitArray32,
    QueueKind::BinaryHeap,      QueueKind::DenseOracle,
};

std::string_view kind_name(QueueKind kind);
std::optional<QueueKind> parse_kind(std::string_view name);

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct QueueCapabilities {
  bool supports_gradients = true;
  bool supports_heterogeneous_delay = true;
  bool supports_multi_spike_per_step = true;
  bool lossy = false;
  bool weighted = true;
  std::size_t capacity = kUnbounded;
  // Longest delay (in steps) an enqueue may request; kUnbounded for none.
  std::size_t horizon = kUnbounded;

  friend constexpr bool operator==(const QueueCapabilities&, const QueueCapabilities&) = default;
};

}  // namespace eventq
