#pragma once

// Concrete spike-event queues. Every kind exposes the same surface:
//
//   bool enqueue(const SpikeEvent&)   store (true) or drop (false)
//   AggregatedPulse pop_due()         advance one step, return what is due
//   std::size_t occupancy() const     undelivered stored entries
//
// Time model: now() is the last step whose pulse has been popped (0 for a
// fresh queue). An event may be enqueued only for a step strictly after now();
// pop_due() moves to now()+1 and returns the merge of the events due there.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eventq/event.hpp"

namespace eventq {

/// Exact drop accounting. Every attempted enqueue ends up in exactly one of
/// {stored, rejected}; aliased and replaced events were stored but will not
/// arrive as scheduled.
struct QueueStats {
  std::uint64_t enqueued = 0;  // attempts
  std::uint64_t rejected = 0;  // accepted == false
  std::uint64_t aliased = 0;   // LossyRing: delay folded modulo capacity
  std::uint64_t merged = 0;    // Ring kinds: landed in an occupied slot
  std::uint64_t replaced = 0;  // SingleSpikeDrop: stored spike overwritten
  std::uint64_t delivered = 0; // spikes handed out by pop_due

  std::uint64_t lost() const { return rejected + aliased + replaced; }
};

namespace detail {

[[noreturn]] void throw_causality(Step deliver, Step now);
[[noreturn]] void throw_horizon(std::string_view kind, Step delay, std::size_t horizon);
[[noreturn]] void throw_heterogeneous(std::string_view kind, Step locked, Step delay);

// Shared clock and counters.
class QueueBase {
 public:
  Step now() const { return now_; }
  const QueueStats& stats() const { return stats_; }

 protected:
  Step checked_delay(const SpikeEvent& ev) {
    ++stats_.enqueued;
    if (ev.deliver_step <= now_) throw_causality(ev.deliver_step, now_);
    return ev.deliver_step - now_;
  }

  // FIFO and bit-array kinds accept one delay value per queue; the first
  // enqueue locks it.
  void check_homogeneous(std::string_view kind, Step delay) {
    if (locked_delay_ == 0) {
      locked_delay_ = delay;
    } else if (delay != locked_delay_) {
      throw_heterogeneous(kind, locked_delay_, delay);
    }
  }

  bool reject() {
    ++stats_.rejected;
    return false;
  }

  Step now_ = 0;
  Step locked_delay_ = 0;
  QueueStats stats_{};
};

}  // namespace detail

class DoNothingQueue : public detail::QueueBase {
 public:
  static constexpr QueueKind kind() { return QueueKind::DoNothing; }
  QueueCapabilities capabilities() const {
    return {.supports_gradients = true, .lossy = true, .capacity = 0};
  }

  bool enqueue(const SpikeEvent& ev) {
    checked_delay(ev);
    return reject();
  }
  AggregatedPulse pop_due() {
    ++now_;
    return {};
  }
  std::size_t occupancy() const { return 0; }
};

/// Circular buffer of per-step merge slots. The lossless form needs
/// capacity >= max delay; the lossy form folds longer delays modulo capacity.
class RingQueue : public detail::QueueBase {
 public:
  RingQueue(std::size_t capacity, std::size_t max_delay, bool lossy)
      : slots_(capacity), max_delay_(max_delay), lossy_(lossy) {
    validate();
  }

  QueueKind kind() const { return lossy_ ? QueueKind::LossyRing : QueueKind::Ring; }
  QueueCapabilities capabilities() const {
    return {.lossy = lossy_, .capacity = slots_.size(), .horizon = max_delay_};
  }

  bool enqueue(const SpikeEvent& ev) {
    Step delay = checked_delay(ev);
    if (static_cast<std::size_t>(delay) > max_delay_) throw_horizon(delay);
    const auto cap = static_cast<Step>(slots_.size());
    if (delay > cap) {
      // Only reachable for the lossy form: land in a wrong, earlier bin.
      delay = (delay - 1) % cap + 1;
      ++stats_.aliased;
    }
    std::size_t idx = head_ + static_cast<std::size_t>(delay);
    if (idx >= slots_.size()) idx -= slots_.size();
    AggregatedPulse& slot = slots_[idx];
    if (slot.empty()) {
      ++occupied_;
    } else {
      ++stats_.merged;
    }
    slot += ev;
    return true;
  }

  AggregatedPulse pop_due() {
    ++now_;
    if (++head_ == slots_.size()) head_ = 0;
    AggregatedPulse out = slots_[head_];
    if (!out.empty()) {
      slots_[head_] = {};
      --occupied_;
      stats_.delivered += out.count;
    }
    return out;
  }

  std::size_t occupancy() const { return occupied_; }

 private:
  void validate() const;
  [[noreturn]] void throw_horizon(Step delay) const;

  std::vector<AggregatedPulse> slots_;
  std::size_t head_ = 0;  // slot of step now()
  std::size_t occupied_ = 0;
  std::size_t max_delay_;
  bool lossy_;
};

/// Bounded FIFO of events with a single (homogeneous) delay, so arrival order
/// is delivery order. Drops incoming events when full.
class FifoRingQueue : public detail::QueueBase {
 public:
  explicit FifoRingQueue(std::size_t capacity) : buf_(capacity) {}

  static constexpr QueueKind kind() { return QueueKind::FIFORing; }
  QueueCapabilities capabilities() const {
    return {.supports_heterogeneous_delay = false, .lossy = true, .capacity = buf_.size()};
  }

  bool enqueue(const SpikeEvent& ev) {
    check_homogeneous("fiforing", checked_delay(ev));
    if (count_ == buf_.size()) return reject();
    std::size_t tail = head_ + count_;
    if (tail >= buf_.size()) tail -= buf_.size();
    buf_[tail] = ev;
    ++count_;
    return true;
  }

  AggregatedPulse pop_due() {
    ++now_;
    AggregatedPulse out;
    while (count_ > 0 && buf_[head_].deliver_step == now_) {
      out += buf_[head_];
      if (++head_ == buf_.size()) head_ = 0;
      --count_;
    }
    stats_.delivered += out.count;
    return out;
  }

  std::size_t occupancy() const { return count_; }

 private:
  std::vector<SpikeEvent> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

enum class SingleSpikePolicy { Hold, Drop };

/// Storage for exactly one spike. Hold rejects newcomers while occupied,
/// Drop overwrites the stored spike.
class SingleSpikeQueue : public detail::QueueBase {
 public:
  explicit SingleSpikeQueue(SingleSpikePolicy policy) : policy_(policy) {}

  QueueKind kind() const {
    return policy_ == SingleSpikePolicy::Hold ? QueueKind::SingleSpikeHold : QueueKind::SingleSpikeDrop;
  }
  QueueCapabilities capabilities() const { return {.supports_multi_spike_per_step = false, .lossy = true, .capacity = 1}; }

  bool enqueue(const SpikeEvent& ev) {
    checked_delay(ev);
    if (slot_) {
      if (policy_ == SingleSpikePolicy::Hold) return reject();
      ++stats_.replaced;
    }
    slot_ = ev;
    return true;
  }

  AggregatedPulse pop_due() {
    ++now_;
    if (slot_ && slot_->deliver_step == now_) {
      AggregatedPulse out = AggregatedPulse::from(*slot_);
      slot_.reset();
      ++stats_.delivered;
      return out;
    }
    return {};
  }

  std::size_t occupancy() const { return slot_ ? 1 : 0; }

 private:
  std::optional<SpikeEvent> slot_;
  SingleSpikePolicy policy_;
};

/// Fixed array of n events kept sorted by delivery step, padded with
/// sentinels. Insertion writes at the end of the array and moves the new
/// event into place; popping shifts the whole array. Both touch every slot,
/// like a fixed-shape implementation would. Equal keys keep insertion order.
class SortedArrayQueue : public detail::QueueBase {
 public:
  static constexpr Step kEmpty = std::numeric_limits<Step>::max();

  explicit SortedArrayQueue(std::size_t capacity) : slots_(capacity, SpikeEvent{kEmpty}) {}

  static constexpr QueueKind kind() { return QueueKind::SortedArray; }
  QueueCapabilities capabilities() const { return {.lossy = true, .capacity = slots_.size()}; }

  bool enqueue(const SpikeEvent& ev) {
    checked_delay(ev);
    if (count_ == slots_.size()) return reject();
    auto first = slots_.begin();
    auto pos = std::upper_bound(first, first + static_cast<std::ptrdiff_t>(count_), ev.deliver_step,
                                [](Step key, const SpikeEvent& e) { return key < e.deliver_step; });
    std::move_backward(pos, slots_.end() - 1, slots_.end());
    *pos = ev;
    ++count_;
    return true;
  }

  AggregatedPulse pop_due() {
    ++now_;
    AggregatedPulse out;
    std::size_t k = 0;
    while (k < count_ && slots_[k].deliver_step == now_) out += slots_[k++];
    if (k > 0) {
      auto shifted = std::move(slots_.begin() + static_cast<std::ptrdiff_t>(k), slots_.end(), slots_.begin());
      std::fill(shifted, slots_.end(), SpikeEvent{kEmpty});
      count_ -= k;
      stats_.delivered += out.count;
    }
    return out;
  }

  std::size_t occupancy() const { return count_; }

 private:
  std::vector<SpikeEvent> slots_;
  std::size_t count_ = 0;
};

/// Unit spikes with one homogeneous delay packed into a 32-bit word. Bit i is
/// a spike due i+1 steps after now(). No weights, no tangents.
class BitArray32Queue : public detail::QueueBase {
 public:
  static constexpr std::size_t kHorizon = 32;

  explicit BitArray32Queue(std::size_t max_delay) : max_delay_(max_delay) {}

  static constexpr QueueKind kind() { return QueueKind::BitArray32; }
  QueueCapabilities capabilities() const {
    return {.supports_gradients = false,
            .supports_heterogeneous_delay = false,
            .supports_multi_spike_per_step = false,
            .lossy = true,
            .weighted = false,
            .capacity = kHorizon,
            .horizon = max_delay_};
  }

  bool enqueue(const SpikeEvent& ev);

  AggregatedPulse pop_due() {
    ++now_;
    const bool fire = (bits_ & 1u) != 0;
    bits_ >>= 1;
    if (!fire) return {};
    ++stats_.delivered;
    return {{1.0, 0.0}, 0.0, 1};
  }

  std::size_t occupancy() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  std::uint32_t bits() const { return bits_; }

 private:
  std::uint32_t bits_ = 0;
  std::size_t max_delay_;
};

/// Min-heap on (deliver_step, arrival sequence) with sift loops. Drops
/// incoming events when full.
class BinaryHeapQueue : public detail::QueueBase {
 public:
  explicit BinaryHeapQueue(std::size_t capacity) : heap_(capacity) {}

  static constexpr QueueKind kind() { return QueueKind::BinaryHeap; }
  QueueCapabilities capabilities() const { return {.lossy = true, .capacity = heap_.size()}; }

  bool enqueue(const SpikeEvent& ev) {
    checked_delay(ev);
    if (count_ == heap_.size()) return reject();
    Entry e{ev, seq_++};
    std::size_t i = count_++;
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!less(e, heap_[parent])) break;
      heap_[i] = heap_[parent];
      i = parent;
    }
    heap_[i] = e;
    return true;
  }

  AggregatedPulse pop_due() {
    ++now_;
    AggregatedPulse out;
    while (count_ > 0 && heap_[0].ev.deliver_step == now_) {
      out += heap_[0].ev;
      Entry last = heap_[--count_];
      std::size_t i = 0;
      while (true) {
        std::size_t child = 2 * i + 1;
        if (child >= count_) break;
        if (child + 1 < count_ && less(heap_[child + 1], heap_[child])) ++child;
        if (!less(heap_[child], last)) break;
        heap_[i] = heap_[child];
        i = child;
      }
      heap_[i] = last;
    }
    stats_.delivered += out.count;
    return out;
  }

  std::size_t occupancy() const { return count_; }

 private:
  struct Entry {
    SpikeEvent ev;
    std::uint64_t seq = 0;
  };
  static bool less(const Entry& a, const Entry& b) {
    return a.ev.deliver_step < b.ev.deliver_step ||
           (a.ev.deliver_step == b.ev.deliver_step && a.seq < b.seq);
  }

  std::vector<Entry> heap_;
  std::size_t count_ = 0;
  std::uint64_t seq_ = 0;
};

/// Unbounded, lossless reference: one merge slot per future step.
class DenseOracleQueue : public detail::QueueBase {
 public:
  static constexpr QueueKind kind() { return QueueKind::DenseOracle; }
  QueueCapabilities capabilities() const { return {}; }

  bool enqueue(const SpikeEvent& ev) {
    const auto offset = static_cast<std::size_t>(checked_delay(ev) - 1);
    if (pending_.size() <= offset) pending_.resize(offset + 1);
    pending_[offset] += ev;
    ++stored_;
    return true;
  }

  AggregatedPulse pop_due() {
    ++now_;
    if (pending_.empty()) return {};
    AggregatedPulse out = pending_.front();
    pending_.pop_front();
    stored_ -= out.count;
    stats_.delivered += out.count;
    return out;
  }

  std::size_t occupancy() const { return stored_; }

 private:
  std::deque<AggregatedPulse> pending_;  // pending_[i] is due at now()+1+i
  std::size_t stored_ = 0;
};

}  // namespace eventq
