#include <array>
#include <string>
#include <utility>

#include "eventq/event_queue.hpp"

namespace eventq {

namespace {

constexpr std::array<std::pair<QueueKind, std::string_view>, 11> kNames{{
    {QueueKind::DoNothing, "donothing"},
    {QueueKind::Ring, "ring"},
    {QueueKind::LossyRing, "lossyring"},
    {QueueKind::FIFORing, "fiforing"},
    {QueueKind::SingleSpikeHold, "singlespikehold"},
    {QueueKind::SingleSpikeDrop, "singlespikedrop"},
    {QueueKind::SortedArray, "sortedarray"},
    {QueueKind::BitArray32, "bitarray32"},
    {QueueKind::BinaryHeap, "binaryheap"},
    {QueueKind::DenseOracle, "denseoracle"},
    {QueueKind::BGPQ, "bgpq"},
}};

}  // namespace

std::string_view kind_name(QueueKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<QueueKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

namespace detail {

void throw_causality(Step deliver, Step now) {
  throw CausalityError("event due at step " + std::to_string(deliver) + " enqueued at step " +
                       std::to_string(now) + "; delivery must be strictly in the future");
}

void throw_horizon(std::string_view kind, Step delay, std::size_t horizon) {
  throw CapabilityError("horizon", std::string(kind) + ": delay of " + std::to_string(delay) +
                                       " steps exceeds the supported horizon of " + std::to_string(horizon));
}

void throw_heterogeneous(std::string_view kind, Step locked, Step delay) {
  throw CapabilityError("heterogeneous_delay", std::string(kind) + " supports a single homogeneous delay (" +
                                                   std::to_string(locked) + " steps); got " +
                                                   std::to_string(delay));
}

}  // namespace detail

void RingQueue::validate() const {
  if (slots_.empty() || max_delay_ == 0) throw ConfigError("ring: capacity and max delay must be >= 1");
  if (!lossy_ && slots_.size() < max_delay_) {
    throw CapabilityError("horizon", "ring: capacity " + std::to_string(slots_.size()) +
                                         " is smaller than the max delay " + std::to_string(max_delay_) +
                                         "; use lossyring for a smaller buffer");
  }
}

void RingQueue::throw_horizon(Step delay) const {
  detail::throw_horizon(kind_name(kind()), delay, max_delay_);
}

bool BitArray32Queue::enqueue(const SpikeEvent& ev) {
  const Step delay = checked_delay(ev);
  if (ev.weight.tangent != 0.0 || ev.time_tangent != 0.0) {
    throw CapabilityError("gradients", "bitarray32 does not support gradients (event carries a tangent)");
  }
  if (ev.weight.primal != 1.0) {
    throw CapabilityError("weighted", "bitarray32 stores unit spikes only; got weight " +
                                          std::to_string(ev.weight.primal));
  }
  if (static_cast<std::size_t>(delay) > max_delay_) detail::throw_horizon("bitarray32", delay, max_delay_);
  check_homogeneous("bitarray32", delay);
  const std::uint32_t bit = std::uint32_t{1} << (delay - 1);
  if (bits_ & bit) return reject();
  bits_ |= bit;
  return true;
}

QueueCapabilities capabilities_of(const QueueConfig& config) {
  return make_queue(config).capabilities();
}

EventQueue make_queue(const QueueConfig& config) {
  const auto [kind, capacity, max_delay] = config;
  if (capacity == 0) throw ConfigError(std::string(kind_name(kind)) + ": capacity must be >= 1");
  if (max_delay == 0) throw ConfigError(std::string(kind_name(kind)) + ": max delay must be >= 1");
  switch (kind) {
    case QueueKind::DoNothing:
      return EventQueue(DoNothingQueue{});
    case QueueKind::Ring:
      return EventQueue(RingQueue(capacity, max_delay, false));
    case QueueKind::LossyRing:
      return EventQueue(RingQueue(capacity, max_delay, true));
    case QueueKind::FIFORing:
      return EventQueue(FifoRingQueue(capacity));
    case QueueKind::SingleSpikeHold:
      return EventQueue(SingleSpikeQueue(SingleSpikePolicy::Hold));
    case QueueKind::SingleSpikeDrop:
      return EventQueue(SingleSpikeQueue(SingleSpikePolicy::Drop));
    case QueueKind::SortedArray:
      return EventQueue(SortedArrayQueue(capacity));
    case QueueKind::BitArray32:
      if (max_delay > BitArray32Queue::kHorizon) {
        throw CapabilityError("horizon", "bitarray32: max delay " + std::to_string(max_delay) +
                                             " exceeds the 32-step horizon of a single word");
      }
      return EventQueue(BitArray32Queue(max_delay));
    case QueueKind::BinaryHeap:
      return EventQueue(BinaryHeapQueue(capacity));
    case QueueKind::DenseOracle:
      return EventQueue(DenseOracleQueue{});
    case QueueKind::BGPQ:
      throw CapabilityError("kind", "bgpq: unsupported kind (group-parallel heap is not implemented)");
  }
  throw ConfigError("unknown queue kind");
}

}  // namespace eventq
