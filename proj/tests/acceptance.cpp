// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eventq/bench.hpp"
#include "eventq/event_queue.hpp"
#include "eventq/network.hpp"
#include "eventq/neuro.hpp"
#include "eventq/oracle.hpp"

using namespace eventq;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void note(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------------------

struct TraceGroup {
  const char* name;
  TraceSpec spec;
  std::vector<QueueConfig> candidates;
};

void oracle_equivalence() {
  constexpr std::size_t kTraces = 1000;
  constexpr std::size_t kEvents = 100000;

  // Each trace is replayed against every listed kind; the shapes cycle so
  // that every kind sees traces within its capabilities.
  std::vector<TraceGroup> groups{
      {"heterogeneous weighted",
       trace_spec_for({QueueKind::SortedArray, 64, 32}, kEvents),
       {{QueueKind::Ring, 32, 32}, {QueueKind::SortedArray, 64, 32}, {QueueKind::BinaryHeap, 64, 32}}},
      {"homogeneous weighted",
       trace_spec_for({QueueKind::FIFORing, 32, 32}, kEvents),
       {{QueueKind::FIFORing, 32, 32}, {QueueKind::Ring, 32, 32}, {QueueKind::BinaryHeap, 64, 32}}},
      {"single in flight",
       [] {
         TraceSpec s = trace_spec_for({QueueKind::SingleSpikeHold, 1, 8}, kEvents);
         s.homogeneous = true;
         return s;
       }(),
       {{QueueKind::SingleSpikeHold, 1, 8}, {QueueKind::FIFORing, 1, 8}}},
      {"unit homogeneous",
       trace_spec_for({QueueKind::BitArray32, 32, 31}, kEvents),
       {{QueueKind::BitArray32, 32, 31}, {QueueKind::Ring, 31, 31}}},
  };

  std::mt19937_64 rng(20240501);
  std::vector<std::vector<std::size_t>> equal(groups.size());
  std::vector<std::vector<std::size_t>> rejected(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    equal[g].assign(groups[g].candidates.size(), 0);
    rejected[g].assign(groups[g].candidates.size(), 0);
  }
  std::string first_divergence;
  std::uint64_t events = 0;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t t = 0; t < kTraces; ++t) {
    const std::size_t g = t % groups.size();
    const Trace trace = random_trace(groups[g].spec, rng);
    events += trace.size();
    const auto reports = dense_oracle_equivalence(trace, groups[g].candidates);
    for (std::size_t c = 0; c < reports.size(); ++c) {
      const auto& r = reports[c];
      if (r.equal()) {
        ++equal[g][c];
      } else if (r.verdict == EquivalenceReport::Verdict::Rejected) {
        ++rejected[g][c];
      } else if (first_divergence.empty()) {
        first_divergence = fmt("%s diverged on trace %zu at step %lld", kind_name(groups[g].candidates[c].kind).data(),
                               t, static_cast<long long>(r.divergence->step));
      }
    }
  }
  const double elapsed = seconds_since(t0);

  bool all_equal = first_divergence.empty();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t c = 0; c < groups[g].candidates.size(); ++c) {
      const auto& cfg = groups[g].candidates[c];
      note("%-22s %-16s cap %-3zu equal %zu/%zu rejected %zu", groups[g].name, kind_name(cfg.kind).data(),
           cfg.capacity, equal[g][c], kTraces / groups.size(), rejected[g][c]);
      if (equal[g][c] != kTraces / groups.size()) all_equal = false;
    }
  }
  if (!first_divergence.empty()) note("%s", first_divergence.c_str());
  report(all_equal && elapsed < 60.0, "oracle equivalence",
         fmt("%zu traces, %.3g events, %.1f s (limit 60 s)", kTraces, static_cast<double>(events), elapsed));
}

// ---------------------------------------------------------------------------

void analytic_delay_gradient() {
  const double tau = 0.2;
  double worst = 0.0;
  for (double d : {0.0503, 0.02, 0.0777, 0.1}) {
    for (double dt : {1e-3, 1e-4}) {
      const Step steps = static_cast<Step>(std::lround(0.4 / dt));
      const SingleSpikeProbe p = single_spike_probe(d, 1.0, tau, dt, 10, steps);
      const double expected = std::exp(-(p.end_time - p.t_post) / tau) / tau;
      const double rel = std::abs(p.current.tangent - expected) / expected;
      note("d=%-7g dt=%-6g di/dd=%.15e expected %.15e rel %.2e", d, dt, p.current.tangent, expected, rel);
      worst = std::max(worst, rel);
    }
  }
  report(worst < 1e-9, "analytic delay gradient", fmt("worst relative error %.2e (limit 1e-9)", worst));
}

// ---------------------------------------------------------------------------

struct GradStats {
  std::vector<double> errors;
  std::size_t skipped = 0;
};

// Draws directions until `count` of them keep the spike structure intact and
// carry a non-zero derivative.
GradStats rsnn_gradients(double dt, Step steps, std::size_t count) {
  const NetworkParams p = random_network(10, dt, 7);
  GradStats out;
  std::uint64_t draw = 1;
  while (out.errors.size() < count && draw < 200) {
    for (const auto& dir : sample_directions(p.n, count, draw++)) {
      if (out.errors.size() == count) break;
      const GradCheckRow row = check_direction(p, dir, 3, steps);
      if (!row.smooth || (row.jvp == 0.0 && row.fd == 0.0)) {
        ++out.skipped;
        continue;
      }
      out.errors.push_back(row.rel_err);
    }
  }
  return out;
}

void rsnn_gradient_check() {
  const GradStats base = rsnn_gradients(1e-3, 2000, 20);
  const GradStats half = rsnn_gradients(5e-4, 4000, 20);
  const double worst = base.errors.empty() ? INFINITY : *std::max_element(base.errors.begin(), base.errors.end());
  note("dt=1e-3: %zu directions, %zu skipped, median rel %.2e, max %.2e", base.errors.size(), base.skipped,
       median(base.errors), worst);
  note("dt=5e-4: %zu directions, %zu skipped, median rel %.2e, max %.2e", half.errors.size(), half.skipped,
       median(half.errors), *std::max_element(half.errors.begin(), half.errors.end()));
  report(base.errors.size() == 20 && worst < 5e-2, "rsnn gradient vs finite differences",
         fmt("max relative error %.2e over 20 directions (limit 5e-2)", worst));
  const double m1 = median(base.errors);
  const double m2 = median(half.errors);
  report(m2 < m1, "rsnn gradient error decreases with dt",
         fmt("median relative error %.2e at dt=1e-3, %.2e at dt=5e-4", m1, m2));
}

// ---------------------------------------------------------------------------

// Independent model of a single-slot holding queue: a spike sent at s
// occupies the slot until its delivery at s + d, and arrivals while the slot
// is taken are lost.
DropRate hold_queue_monte_carlo(double lambda, Step d, Step steps, std::uint64_t seed) {
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
  std::bernoulli_distribution spike(1.0 / lambda);
  const int slices = 50;
  const Step slice = steps / slices;
  std::vector<double> rates;
  std::uint64_t in = 0, lost = 0, slice_in = 0, slice_lost = 0;
  Step free_at = 0;
  for (Step s = 0; s < steps; ++s) {
    if (spike(rng)) {
      ++in;
      ++slice_in;
      if (s < free_at) {
        ++lost;
        ++slice_lost;
      } else {
        free_at = s + d;
      }
    }
    if ((s + 1) % slice == 0) {
      if (slice_in) rates.push_back(static_cast<double>(slice_lost) / static_cast<double>(slice_in));
      slice_in = slice_lost = 0;
    }
  }
  DropRate out;
  out.enqueued = in;
  out.lost = lost;
  out.rate = static_cast<double>(lost) / static_cast<double>(in);
  double mean = 0.0, var = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(rates.size());
  for (double r : rates) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rates.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(rates.size()));
  return out;
}

void drop_rates() {
  const DropRate none = measure_drop_rate({QueueKind::DoNothing, 1, 80}, 400.0, 80, 1000000, 1);
  report(none.rate == 1.0, "drop rate DoNothing", fmt("%.17g (%llu of %llu lost)", none.rate,
                                                     static_cast<unsigned long long>(none.lost),
                                                     static_cast<unsigned long long>(none.enqueued)));

  double worst_ring = 0.0;
  for (double lambda : {1.0, 10.0, 400.0}) {
    const DropRate r = measure_drop_rate({QueueKind::Ring, 80, 80}, lambda, 80, 1000000, 2);
    worst_ring = std::max(worst_ring, r.rate);
  }
  report(worst_ring == 0.0, "drop rate Ring", fmt("%.17g at lambda 1, 10, 400 with d=80", worst_ring));

  const DropRate fifo = measure_drop_rate({QueueKind::FIFORing, 4, 200}, 400.0, 200, 1000000, 3);
  // In-flight count is roughly Poisson with mean equal to the pressure.
  double tail = 1.0, term = std::exp(-0.5);
  for (int k = 0; k < 4; ++k) {
    tail -= term;
    term *= 0.5 / (k + 1);
  }
  note("FIFORing[4] lambda=400 d=200: %llu spikes, %llu lost, rate %.3e +- %.1e; P(Poisson(0.5) >= 4) = %.3e",
       static_cast<unsigned long long>(fifo.enqueued), static_cast<unsigned long long>(fifo.lost), fifo.rate,
       fifo.std_error, tail);
  report(fifo.rate < 1e-3, "drop rate FIFORing[4] at pressure 0.5", fmt("%.3e (limit 1e-3)", fifo.rate));

  const DropRate hold = measure_drop_rate({QueueKind::SingleSpikeHold, 1, 80}, 400.0, 80, 1000000, 4);
  const DropRate mc = hold_queue_monte_carlo(400.0, 80, 1000000, 99);
  const double se = std::sqrt(hold.std_error * hold.std_error + mc.std_error * mc.std_error);
  const double mp = 79.0 / 400.0;
  note("queue %.4f +- %.4f (%llu spikes), Monte Carlo %.4f +- %.4f (%llu spikes), renewal %.4f", hold.rate,
       hold.std_error, static_cast<unsigned long long>(hold.enqueued), mc.rate, mc.std_error,
       static_cast<unsigned long long>(mc.enqueued), mp / (1.0 + mp));
  report(std::abs(hold.rate - mc.rate) <= 2.0 * se, "drop rate SingleSpikeHold vs Monte Carlo",
         fmt("|%.4f - %.4f| = %.4f, 2 SE = %.4f", hold.rate, mc.rate, std::abs(hold.rate - mc.rate), 2.0 * se));
}

// ---------------------------------------------------------------------------

void scaling_trends() {
  const std::vector<std::size_t> caps{4, 8, 16, 32, 64};
  // One spike per queue and step with delay 4: every ring capacity on the
  // grid covers the horizon, and the sorted array shifts on every step.
  const PoissonWorkload w{1.0, 4, 64, 20000, 5};
  std::vector<double> sorted_ns, ring_ns;
  bool baseline_ok = true;
  std::string baseline_detail;
  auto check_baseline = [&](const BenchRecord& r) {
    if (r.baseline_ns > r.ns_per_step_per_queue) {
      baseline_ok = false;
      baseline_detail += fmt(" %s[%zu] %s", r.kind.c_str(), r.capacity, r.workload.c_str());
    }
  };
  // Round-robin over the grid so that slow phases of the machine are spread
  // over every capacity; each point is the median over rounds.
  std::vector<std::vector<double>> sorted_runs(caps.size()), ring_runs(caps.size()), base_runs(caps.size());
  for (int round = 0; round < 5; ++round) {
    for (std::size_t k = 0; k < caps.size(); ++k) {
      const std::size_t c = caps[k];
      const BenchRecord s = run_inference_bench({QueueKind::SortedArray, c, 4}, w, 5, 1);
      const BenchRecord r = run_inference_bench({QueueKind::Ring, c, c}, w, 5, 1);
      sorted_runs[k].push_back(s.ns_per_step_per_queue);
      ring_runs[k].push_back(r.ns_per_step_per_queue);
      base_runs[k].push_back(s.baseline_ns);
      check_baseline(s);
      check_baseline(r);
    }
  }
  for (std::size_t k = 0; k < caps.size(); ++k) {
    sorted_ns.push_back(median(sorted_runs[k]));
    ring_ns.push_back(median(ring_runs[k]));
    note("capacity %-3zu sorted %.2f ns  ring %.2f ns  donothing %.2f ns", caps[k], sorted_ns.back(), ring_ns.back(),
         median(base_runs[k]));
  }
  const bool monotone = std::is_sorted(sorted_ns.begin(), sorted_ns.end());
  const double sorted_ratio = sorted_ns.back() / sorted_ns.front();
  report(monotone && sorted_ratio > 1.5, "SortedArray cost grows with capacity",
         fmt("%s, ratio 64/4 = %.2f (limit > 1.5)", monotone ? "monotone" : "not monotone", sorted_ratio));
  const double ring_ratio = ring_ns.back() / ring_ns.front();
  report(ring_ratio < 2.0, "Ring cost flat in capacity", fmt("ratio 64/4 = %.2f (limit < 2)", ring_ratio));

  // Remaining kinds on the default single-queue workload.
  const PoissonWorkload single{400.0, 80, 1, 2000000, 6};
  for (QueueConfig cfg : std::vector<QueueConfig>{{QueueKind::LossyRing, 80, 80},
                                                  {QueueKind::FIFORing, 8, 80},
                                                  {QueueKind::SingleSpikeHold, 1, 80},
                                                  {QueueKind::SingleSpikeDrop, 1, 80},
                                                  {QueueKind::BinaryHeap, 64, 80},
                                                  {QueueKind::DenseOracle, 1, 80},
                                                  {QueueKind::Ring, 80, 80}}) {
    const BenchRecord r = run_inference_bench(cfg, single, 7, 2);
    note("%-16s %.2f ns  donothing %.2f ns", r.kind.c_str(), r.ns_per_step_per_queue, r.baseline_ns);
    check_baseline(r);
  }
  const PoissonWorkload bits{10.0, 20, 64, 100000, 7};
  for (Engine e : {Engine::Queues, Engine::Soa}) {
    const BenchRecord r = run_inference_bench({QueueKind::BitArray32, 32, 32}, bits, 7, 2, e);
    note("%-16s %-20s %.2f ns  donothing %.2f ns", r.kind.c_str(), r.workload.c_str(), r.ns_per_step_per_queue,
         r.baseline_ns);
    check_baseline(r);
  }
  report(baseline_ok, "DoNothing is the cheapest kind",
         baseline_ok ? "on every timed workload" : "slower than" + baseline_detail);

  // Forward AD against inference. Homogeneous integer-step delays so that
  // every gradient-capable kind accepts the network.
  RandomNetworkOptions opt;
  opt.homogeneous_delays = true;
  opt.delay_min = 0.02;
  bool ad_slower = true;
  std::string slow_detail;
  for (QueueConfig cfg : std::vector<QueueConfig>{{QueueKind::DoNothing, 1, 1},
                                                  {QueueKind::Ring, 1, 1},
                                                  {QueueKind::LossyRing, 1, 1},
                                                  {QueueKind::FIFORing, 8, 1},
                                                  {QueueKind::SingleSpikeHold, 1, 1},
                                                  {QueueKind::SingleSpikeDrop, 1, 1},
                                                  {QueueKind::SortedArray, 64, 1},
                                                  {QueueKind::BinaryHeap, 64, 1},
                                                  {QueueKind::DenseOracle, 1, 1}}) {
    NetworkParams p = random_network(32, 1e-3, 11, opt);
    p.queue = cfg;
    if (!capabilities_of({cfg.kind, std::max<std::size_t>(cfg.capacity, 1), 1}).supports_gradients) continue;
    // Alternating single runs; the verdict is the median of the paired ratios.
    std::vector<double> inf, ad, ratio;
    for (int pair = 0; pair < 15; ++pair) {
      inf.push_back(run_rsnn_bench(p, RsnnMode::Inference, 5000, 1, 1).ns_per_step_per_queue);
      ad.push_back(run_rsnn_bench(p, RsnnMode::ForwardAd, 5000, 1, 1).ns_per_step_per_queue);
      ratio.push_back(ad.back() / inf.back());
    }
    const double r = median(ratio);
    note("%-16s inference %.2f ns  forward-ad %.2f ns  (per neuron-step)  paired ratio %.3f",
         kind_name(cfg.kind).data(), median(inf), median(ad), r);
    if (!(r > 1.0)) {
      ad_slower = false;
      slow_detail += " " + std::string(kind_name(cfg.kind));
    }
  }
  report(ad_slower, "forward AD slower than inference",
         ad_slower ? "for every gradient-capable kind" : "not slower for" + slow_detail);
}

// ---------------------------------------------------------------------------

// Runs `f` and returns the capability it was rejected for, or "" if accepted.
std::string rejection(const std::function<void()>& f) {
  try {
    f();
  } catch (const CapabilityError& e) {
    return e.capability();
  }
  return "";
}

void capability_matrix() {
  struct Case {
    const char* what;
    std::string expected;
    std::function<void()> f;
  };
  const SpikeEvent unit{5, {1.0, 0.0}, 0.0};
  std::vector<Case> cases{
      {"fiforing heterogeneous delays", "heterogeneous_delay",
       [&] {
         EventQueue q = make_queue(QueueKind::FIFORing, 8, 16);
         q.enqueue(unit);
         q.enqueue(SpikeEvent{6, {1.0, 0.0}, 0.0});
       }},
      {"bitarray32 heterogeneous delays", "heterogeneous_delay",
       [&] {
         EventQueue q = make_queue(QueueKind::BitArray32, 32, 32);
         q.enqueue(unit);
         q.enqueue(SpikeEvent{6, {1.0, 0.0}, 0.0});
       }},
      {"bitarray32 weight tangent", "gradients",
       [&] { make_queue(QueueKind::BitArray32, 32, 32).enqueue(SpikeEvent{5, {1.0, 1.0}, 0.0}); }},
      {"bitarray32 time tangent", "gradients",
       [&] { make_queue(QueueKind::BitArray32, 32, 32).enqueue(SpikeEvent{5, {1.0, 0.0}, 0.5}); }},
      {"bitarray32 forward-ad network", "gradients",
       [&] {
         NetworkParams p = random_network(4, 1e-3, 1, {0.4, 0.02, 0.02, 1.8, 3.0, true});
         p.queue = {QueueKind::BitArray32, 32, 32};
         Network net(p, SeedDirection{SeedDirection::Target::Weight, 0, 1}, 1);
       }},
      {"bitarray32 max delay 33", "horizon", [&] { make_queue(QueueKind::BitArray32, 32, 33); }},
      {"bitarray32 enqueue delay 33", "horizon",
       [&] { make_queue(QueueKind::BitArray32, 32, 32).enqueue(SpikeEvent{33, {1.0, 0.0}, 0.0}); }},
      {"bgpq kind", "kind", [&] { make_queue(QueueKind::BGPQ, 64, 64); }},
  };
  bool ok = true;
  for (const auto& c : cases) {
    const std::string got = rejection(c.f);
    note("%-32s -> %s", c.what, got.empty() ? "accepted" : got.c_str());
    if (got != c.expected) ok = false;
  }
  report(ok, "capability matrix", fmt("%zu unsupported combinations rejected with named errors", cases.size()));
}

// ---------------------------------------------------------------------------

void delay_line() {
  const double dt = 1e-3;
  const double slope = 2.5;
  const double eps = 1e-6;
  double worst = 0.0;
  std::size_t compared = 0;
  for (double d : {0.02, 0.0371, 0.05}) {
    ContinuousDelayLine line({d, 1.0}, dt);
    for (int k = 0; k < 200; ++k) {
      const double t = k * dt;
      const Dual out = line.step({slope * t + 0.3, 0.0});
      if (!line.warmed_up()) continue;
      // Delayed ramp evaluated in continuous time, read at the sample the line returns.
      const double t_read = t - static_cast<double>(line.length()) * dt + d;
      auto delayed = [&](double delay) { return slope * (t_read - delay) + 0.3; };
      const double fd = (delayed(d + eps) - delayed(d - eps)) / (2.0 * eps);
      worst = std::max(worst, std::abs(out.tangent - fd) / std::abs(fd));
      ++compared;
    }
  }
  report(worst < 1e-3, "continuous delay line ramp",
         fmt("worst relative error %.2e over %zu warmed-up samples (limit 1e-3)", worst, compared));
}

}  // namespace

// With arguments, runs only the named sections.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, void (*)()>> sections{
      {"oracle", oracle_equivalence}, {"analytic", analytic_delay_gradient}, {"rsnn", rsnn_gradient_check},
      {"drop", drop_rates},           {"scaling", scaling_trends},           {"capability", capability_matrix},
      {"delayline", delay_line}};
  const std::vector<std::string> only(argv + 1, argv + argc);
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, run] : sections) {
    if (only.empty() || std::find(only.begin(), only.end(), name) != only.end()) run();
  }
  std::printf("%d criteria failed, %.0f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
