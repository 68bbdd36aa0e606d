#pragma once

#include <cstddef>
#include <variant>

#include "eventq/queues.hpp"

namespace eventq {

/// Type-erased queue over the concrete kinds. Hot loops that care about
/// dispatch cost should visit once and work on the concrete type.
class EventQueue {
 public:
  using Storage = std::variant<DoNothingQueue, RingQueue, FifoRingQueue, SingleSpikeQueue, SortedArrayQueue,
                               BitArray32Queue, BinaryHeapQueue, DenseOracleQueue>;

  template <typename Q>
  explicit EventQueue(Q q) : impl_(std::move(q)) {}

  bool enqueue(const SpikeEvent& ev) {
    return std::visit([&](auto& q) { return q.enqueue(ev); }, impl_);
  }
  AggregatedPulse pop_due() {
    return std::visit([](auto& q) { return q.pop_due(); }, impl_);
  }
  std::size_t occupancy() const {
    return std::visit([](const auto& q) { return q.occupancy(); }, impl_);
  }
  Step now() const {
    return std::visit([](const auto& q) { return q.now(); }, impl_);
  }
  QueueKind kind() const {
    return std::visit([](const auto& q) { return q.kind(); }, impl_);
  }
  QueueCapabilities capabilities() const {
    return std::visit([](const auto& q) { return q.capabilities(); }, impl_);
  }
  const QueueStats& stats() const {
    return std::visit([](const auto& q) -> const QueueStats& { return q.stats(); }, impl_);
  }

  Storage& storage() { return impl_; }
  const Storage& storage() const { return impl_; }

 private:
  Storage impl_;
};

/// Queue configuration as given on the command line.
struct QueueConfig {
  QueueKind kind = QueueKind::Ring;
  std::size_t capacity = 80;
  std::size_t max_delay = 80;
};

/// Capabilities a kind would have for the given construction arguments,
/// without building it. Throws like make_queue on invalid combinations.
QueueCapabilities capabilities_of(const QueueConfig& config);

/// Builds an empty queue at step 0. Throws CapabilityError naming the
/// violated capability for unsupported combinations (ring capacity below the
/// maximum delay, bit array beyond 32 steps, the unimplemented BGPQ kind) and
/// ConfigError for zero capacity or delay.
EventQueue make_queue(const QueueConfig& config);
inline EventQueue make_queue(QueueKind kind, std::size_t capacity, std::size_t max_delay) {
  return make_queue(QueueConfig{kind, capacity, max_delay});
}

}  // namespace eventq
