#include "eventq/batch_queues.hpp"

#include <string>

namespace eventq {

RingBatch::RingBatch(std::size_t lanes, std::size_t capacity, std::size_t max_delay, const simd::Kernels& kernels)
    : lanes_(lanes),
      capacity_(capacity),
      max_delay_(max_delay),
      kernels_(&kernels),
      weight_(lanes * capacity),
      weight_tangent_(lanes * capacity),
      weighted_time_tangent_(lanes * capacity),
      count_(lanes * capacity) {
  if (lanes == 0 || capacity == 0 || max_delay == 0) throw ConfigError("ring batch: sizes must be >= 1");
  if (capacity < max_delay) {
    throw CapabilityError("horizon", "ring batch: capacity " + std::to_string(capacity) +
                                         " is smaller than the max delay " + std::to_string(max_delay));
  }
}

void RingBatch::pop_due(PulseColumns& out) {
  if (out.lanes() != lanes_) out = PulseColumns(lanes_);
  ++now_;
  if (++head_ == capacity_) head_ = 0;
  const std::size_t offset = head_ * lanes_;
  kernels_->drain(weight_.data() + offset, out.weight.data(), lanes_);
  kernels_->drain(weight_tangent_.data() + offset, out.weight_tangent.data(), lanes_);
  kernels_->drain(weighted_time_tangent_.data() + offset, out.weighted_time_tangent.data(), lanes_);
  kernels_->drain(count_.data() + offset, out.count.data(), lanes_);
  stats_.delivered += static_cast<std::uint64_t>(kernels_->sum(out.count.data(), lanes_));
}

BitArrayBatch::BitArrayBatch(std::size_t lanes, std::size_t max_delay, const simd::Kernels& kernels)
    : words_(lanes), max_delay_(max_delay), kernels_(&kernels) {
  if (lanes == 0 || max_delay == 0) throw ConfigError("bit array batch: sizes must be >= 1");
  if (max_delay > BitArray32Queue::kHorizon) {
    throw CapabilityError("horizon", "bitarray32: max delay " + std::to_string(max_delay) +
                                         " exceeds the 32-step horizon of a single word");
  }
}

bool BitArrayBatch::enqueue(std::size_t lane, const SpikeEvent& ev) {
  ++stats_.enqueued;
  const Step delay = ev.deliver_step - now_;
  if (delay < 1) detail::throw_causality(ev.deliver_step, now_);
  if (ev.weight.tangent != 0.0 || ev.time_tangent != 0.0) {
    throw CapabilityError("gradients", "bitarray32 does not support gradients (event carries a tangent)");
  }
  if (ev.weight.primal != 1.0) throw CapabilityError("weighted", "bitarray32 stores unit spikes only");
  if (static_cast<std::size_t>(delay) > max_delay_) detail::throw_horizon("bitarray32", delay, max_delay_);
  if (locked_delay_ == 0) locked_delay_ = delay;
  if (delay != locked_delay_) detail::throw_heterogeneous("bitarray32", locked_delay_, delay);
  const std::uint32_t bit = std::uint32_t{1} << (delay - 1);
  if (words_[lane] & bit) {
    ++stats_.rejected;
    return false;
  }
  words_[lane] |= bit;
  return true;
}

void BitArrayBatch::pop_due(std::vector<std::uint32_t>& fired) {
  fired.resize(words_.size());
  ++now_;
  kernels_->shift_bits(words_.data(), fired.data(), words_.size());
}

}  // namespace eventq
