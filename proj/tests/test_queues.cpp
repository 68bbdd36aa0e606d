#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "eventq/event_queue.hpp"

using namespace eventq;

namespace {

SpikeEvent ev(Step deliver, double w = 1.0, double w_tan = 0.0, double time_tan = 0.0) {
  return {deliver, {w, w_tan}, time_tan};
}

// Pops until `step` (inclusive) and returns the pulse of that step.
AggregatedPulse pop_until(EventQueue& q, Step step) {
  AggregatedPulse p;
  while (q.now() < step) p = q.pop_due();
  return p;
}

}  // namespace

TEST_CASE("kind names round-trip") {
  for (QueueKind k : kAllKinds) CHECK(parse_kind(kind_name(k)) == k);
  CHECK(parse_kind("bgpq") == QueueKind::BGPQ);
  CHECK_FALSE(parse_kind("splaytree").has_value());
}

TEST_CASE("construction and capabilities") {
  const auto ring = make_queue(QueueKind::Ring, 80, 80).capabilities();
  CHECK_FALSE(ring.lossy);
  CHECK(ring.supports_heterogeneous_delay);
  CHECK(ring.horizon == 80);

  CHECK_THROWS_AS(make_queue(QueueKind::BitArray32, 32, 35), CapabilityError);
  CHECK_THROWS_AS(make_queue(QueueKind::BGPQ, 8, 8), CapabilityError);
  CHECK_THROWS_AS(make_queue(QueueKind::Ring, 40, 80), CapabilityError);
  CHECK_THROWS_AS(make_queue(QueueKind::FIFORing, 0, 8), ConfigError);

  const auto none = make_queue(QueueKind::DoNothing, 1, 1).capabilities();
  CHECK(none.lossy);
  CHECK(none.capacity == 0);

  const auto bits = make_queue(QueueKind::BitArray32, 32, 32).capabilities();
  CHECK_FALSE(bits.supports_gradients);
  CHECK_FALSE(bits.supports_heterogeneous_delay);
  CHECK_FALSE(bits.supports_multi_spike_per_step);
  CHECK_FALSE(bits.weighted);
  CHECK_FALSE(make_queue(QueueKind::FIFORing, 4, 8).capabilities().supports_heterogeneous_delay);
  CHECK(make_queue(QueueKind::SortedArray, 4, 8).capabilities().supports_heterogeneous_delay);
  CHECK(make_queue(QueueKind::BinaryHeap, 4, 8).capabilities().supports_heterogeneous_delay);
  CHECK(make_queue(QueueKind::SingleSpikeHold, 1, 8).capabilities().supports_heterogeneous_delay);
}

TEST_CASE("causality and horizon") {
  auto q = make_queue(QueueKind::Ring, 8, 8);
  CHECK_THROWS_AS(q.enqueue(ev(0)), CausalityError);
  CHECK_THROWS_AS(q.enqueue(ev(9)), CapabilityError);
  q.pop_due();
  CHECK_THROWS_AS(q.enqueue(ev(1)), CausalityError);
  CHECK(q.enqueue(ev(9)));
}

TEST_CASE("ring delivers a delayed spike at its step") {
  auto q = make_queue(QueueKind::Ring, 80, 80);
  CHECK(q.enqueue(ev(3)));
  CHECK(q.pop_due().empty());
  CHECK(q.pop_due().empty());
  const auto p = q.pop_due();
  CHECK(p.count == 1);
  CHECK(p.weight == Dual{1.0, 0.0});
}

TEST_CASE("ring delay equal to capacity") {
  auto q = make_queue(QueueKind::Ring, 80, 80);
  CHECK(q.enqueue(ev(80)));
  CHECK(pop_until(q, 79).empty());
  CHECK(q.pop_due().count == 1);
}

TEST_CASE("ring merges same-step spikes") {
  auto q = make_queue(QueueKind::Ring, 8, 8);
  q.enqueue(ev(4, 1.0, 0.5, 2.0));
  q.enqueue(ev(4, 2.0, -0.25, 1.0));
  CHECK(q.occupancy() == 1);
  CHECK(q.stats().merged == 1);
  const auto p = pop_until(q, 4);
  CHECK(p.count == 2);
  CHECK(p.weight == Dual{3.0, 0.25});
  CHECK(p.weighted_time_tangent == 4.0);
}

TEST_CASE("lossy ring aliases long delays") {
  auto lossy = make_queue(QueueKind::LossyRing, 4, 8);
  CHECK(lossy.enqueue(ev(6)));
  CHECK(lossy.stats().aliased == 1);
  CHECK(lossy.stats().lost() == 1);
  CHECK(pop_until(lossy, 2).count == 1);
  CHECK(pop_until(lossy, 6).empty());

  // Delay 4 fits exactly and is not aliased.
  auto exact = make_queue(QueueKind::LossyRing, 4, 8);
  exact.enqueue(ev(4));
  CHECK(exact.stats().aliased == 0);
  CHECK(pop_until(exact, 4).count == 1);
}

TEST_CASE("fifo ring drops when full") {
  auto q = make_queue(QueueKind::FIFORing, 2, 8);
  CHECK(q.enqueue(ev(3)));
  CHECK(q.enqueue(ev(3)));
  CHECK_FALSE(q.enqueue(ev(3)));
  CHECK(q.stats().rejected == 1);
  const auto p = pop_until(q, 3);
  CHECK(p.count == 2);
}

TEST_CASE("fifo ring rejects heterogeneous delays") {
  auto q = make_queue(QueueKind::FIFORing, 4, 8);
  q.enqueue(ev(3));
  CHECK_THROWS_AS(q.enqueue(ev(4)), CapabilityError);
}

TEST_CASE("single spike policies") {
  auto hold = make_queue(QueueKind::SingleSpikeHold, 1, 8);
  CHECK(hold.enqueue(ev(5, 1.0)));
  CHECK_FALSE(hold.enqueue(ev(3, 2.0)));
  CHECK(pop_until(hold, 5).weight.primal == 1.0);

  auto drop = make_queue(QueueKind::SingleSpikeDrop, 1, 8);
  CHECK(drop.enqueue(ev(5, 1.0)));
  CHECK(drop.enqueue(ev(3, 2.0)));
  CHECK(drop.stats().replaced == 1);
  CHECK(pop_until(drop, 3).weight.primal == 2.0);
  CHECK(pop_until(drop, 5).empty());
}

TEST_CASE("sorted array delivers in step order") {
  auto q = make_queue(QueueKind::SortedArray, 4, 16);
  q.enqueue(ev(5, 5.0));
  q.enqueue(ev(2, 2.0));
  q.enqueue(ev(9, 9.0));
  CHECK(pop_until(q, 2).weight.primal == 2.0);
  CHECK(pop_until(q, 5).weight.primal == 5.0);
  CHECK(pop_until(q, 9).weight.primal == 9.0);
  CHECK(q.occupancy() == 0);
}

TEST_CASE("sorted array drops on full and keeps insertion order for ties") {
  auto q = make_queue(QueueKind::SortedArray, 4, 16);
  for (int i = 0; i < 4; ++i) CHECK(q.enqueue(ev(6, 0.1 * (i + 1))));
  CHECK_FALSE(q.enqueue(ev(2)));
  // 0.1 + 0.2 + 0.3 + 0.4 summed left to right.
  CHECK(pop_until(q, 6).weight.primal == ((0.1 + 0.2) + 0.30000000000000004) + 0.4);
}

TEST_CASE("binary heap") {
  auto q = make_queue(QueueKind::BinaryHeap, 7, 16);
  q.enqueue(ev(5, 5.0));
  q.enqueue(ev(2, 2.0));
  q.enqueue(ev(9, 9.0));
  CHECK(pop_until(q, 2).weight.primal == 2.0);
  CHECK(pop_until(q, 5).weight.primal == 5.0);
  CHECK(pop_until(q, 9).weight.primal == 9.0);

  auto full = make_queue(QueueKind::BinaryHeap, 7, 16);
  for (int i = 0; i < 7; ++i) CHECK(full.enqueue(ev(1 + i)));
  CHECK_FALSE(full.enqueue(ev(3)));
}

TEST_CASE("bit array") {
  auto q = make_queue(QueueKind::BitArray32, 32, 32);
  CHECK(q.enqueue(ev(3)));
  CHECK(pop_until(q, 2).empty());
  CHECK(q.pop_due().count == 1);

  auto same = make_queue(QueueKind::BitArray32, 32, 32);
  CHECK(same.enqueue(ev(3)));
  CHECK_FALSE(same.enqueue(ev(3)));

  auto bad = make_queue(QueueKind::BitArray32, 32, 32);
  CHECK_THROWS_AS(bad.enqueue(ev(3, 1.0, 1.0)), CapabilityError);
  CHECK_THROWS_AS(bad.enqueue(ev(3, 1.0, 0.0, 0.5)), CapabilityError);
  CHECK_THROWS_AS(bad.enqueue(ev(3, 2.0)), CapabilityError);
  bad.enqueue(ev(3));
  CHECK_THROWS_AS(bad.enqueue(ev(4)), CapabilityError);
}

TEST_CASE("do nothing drops everything") {
  auto q = make_queue(QueueKind::DoNothing, 1, 1);
  for (Step s = 1; s <= 10; ++s) CHECK_FALSE(q.enqueue(ev(q.now() + 1)));
  for (int i = 0; i < 20; ++i) CHECK(q.pop_due().empty());
  CHECK(q.stats().lost() == 10);
}

TEST_CASE("occupancy") {
  for (QueueKind k : {QueueKind::Ring, QueueKind::FIFORing, QueueKind::SortedArray, QueueKind::BinaryHeap,
                      QueueKind::SingleSpikeHold, QueueKind::BitArray32, QueueKind::DenseOracle}) {
    CAPTURE(kind_name(k));
    auto q = make_queue(k, 8, 8);
    CHECK(q.occupancy() == 0);
    q.enqueue(ev(2));
    CHECK(q.occupancy() == 1);
    pop_until(q, 2);
    CHECK(q.occupancy() == 0);
  }
}

TEST_CASE("lossless kinds conserve weight, tangent and time tangent") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Step> delay(1, 16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (QueueKind k : {QueueKind::Ring, QueueKind::SortedArray, QueueKind::BinaryHeap, QueueKind::DenseOracle}) {
    CAPTURE(kind_name(k));
    auto q = make_queue(k, 64, 16);
    AggregatedPulse in;
    AggregatedPulse out;
    for (int s = 0; s < 2000; ++s) {
      if (s < 1900 && q.occupancy() < 32) {
        const SpikeEvent e = ev(q.now() + delay(rng), u(rng), u(rng), u(rng));
        CHECK(q.enqueue(e));
        in += e;
      }
      out += q.pop_due();
    }
    CHECK(out.count == in.count);
    CHECK(out.weight.primal == doctest::Approx(in.weight.primal).epsilon(1e-12));
    CHECK(out.weight.tangent == doctest::Approx(in.weight.tangent).epsilon(1e-12));
    CHECK(out.weighted_time_tangent == doctest::Approx(in.weighted_time_tangent).epsilon(1e-12));
  }
}
