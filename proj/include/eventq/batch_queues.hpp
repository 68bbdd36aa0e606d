#pragma once

// Structure-of-arrays batches of ring and bit-array queues: one lane per
// queue, stepped together so the per-step work runs through the SIMD kernels.
// Each lane behaves exactly like the corresponding single queue.

#include <cstdint>
#include <vector>

#include "eventq/queues.hpp"
#include "eventq/simd/kernels.hpp"

namespace eventq {

/// Pulses of one step, one entry per lane.
struct PulseColumns {
  std::vector<double> weight;
  std::vector<double> weight_tangent;
  std::vector<double> weighted_time_tangent;
  std::vector<double> count;

  explicit PulseColumns(std::size_t lanes = 0)
      : weight(lanes), weight_tangent(lanes), weighted_time_tangent(lanes), count(lanes) {}

  std::size_t lanes() const { return weight.size(); }
  AggregatedPulse at(std::size_t lane) const {
    return {{weight[lane], weight_tangent[lane]}, weighted_time_tangent[lane],
            static_cast<std::uint32_t>(count[lane])};
  }
};

class RingBatch {
 public:
  RingBatch(std::size_t lanes, std::size_t capacity, std::size_t max_delay,
            const simd::Kernels& kernels = simd::kernels());

  std::size_t lanes() const { return lanes_; }
  std::size_t capacity() const { return capacity_; }
  Step now() const { return now_; }
  const QueueStats& stats() const { return stats_; }

  bool enqueue(std::size_t lane, const SpikeEvent& ev) {
    ++stats_.enqueued;
    const Step delay = ev.deliver_step - now_;
    if (delay < 1) detail::throw_causality(ev.deliver_step, now_);
    if (static_cast<std::size_t>(delay) > max_delay_) detail::throw_horizon("ring", delay, max_delay_);
    std::size_t row = head_ + static_cast<std::size_t>(delay);
    if (row >= capacity_) row -= capacity_;
    const std::size_t idx = row * lanes_ + lane;
    if (count_[idx] != 0.0) ++stats_.merged;
    weight_[idx] += ev.weight.primal;
    weight_tangent_[idx] += ev.weight.tangent;
    weighted_time_tangent_[idx] += ev.weight.primal * ev.time_tangent;
    count_[idx] += 1.0;
    return true;
  }

  /// Advances every lane one step and writes the due pulses into `out`.
  void pop_due(PulseColumns& out);

 private:
  std::size_t lanes_;
  std::size_t capacity_;
  std::size_t max_delay_;
  const simd::Kernels* kernels_;
  std::vector<double> weight_;  // capacity_ rows of lanes_ entries
  std::vector<double> weight_tangent_;
  std::vector<double> weighted_time_tangent_;
  std::vector<double> count_;
  std::size_t head_ = 0;
  Step now_ = 0;
  QueueStats stats_{};
};

class BitArrayBatch {
 public:
  BitArrayBatch(std::size_t lanes, std::size_t max_delay, const simd::Kernels& kernels = simd::kernels());

  std::size_t lanes() const { return words_.size(); }
  Step now() const { return now_; }
  const QueueStats& stats() const { return stats_; }
  std::uint32_t word(std::size_t lane) const { return words_[lane]; }

  /// Same contract as BitArray32Queue::enqueue, with one delay for all lanes.
  bool enqueue(std::size_t lane, const SpikeEvent& ev);

  /// Advances every lane; fired[lane] is 1 when a unit spike is due.
  void pop_due(std::vector<std::uint32_t>& fired);

 private:
  std::vector<std::uint32_t> words_;
  std::size_t max_delay_;
  const simd::Kernels* kernels_;
  Step locked_delay_ = 0;
  Step now_ = 0;
  QueueStats stats_{};
};

}  // namespace eventq
