#include "eventq/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "eventq/batch_queues.hpp"

namespace eventq {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t lane_seed(std::uint64_t seed, std::uint64_t lane) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (lane + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Spike steps of one lane: first at g, then every 1 + g steps, g ~ Geometric(1/lambda).
class SpikeStream {
 public:
  SpikeStream(double lambda, std::uint64_t seed) : rng_(seed), gap_(1.0 / lambda) { next_ = gap_(rng_); }
  Step peek() const { return next_; }
  void advance() { next_ += 1 + gap_(rng_); }

 private:
  std::mt19937_64 rng_;
  std::geometric_distribution<Step> gap_;
  Step next_ = 0;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct RunCounts {
  std::uint64_t enqueued = 0;
  std::uint64_t lost = 0;
  std::uint64_t delivered = 0;
  double occupancy_sum = 0.0;

  friend bool operator==(const RunCounts& a, const RunCounts& b) {
    return a.enqueued == b.enqueued && a.lost == b.lost && a.delivered == b.delivered;
  }
};

SpikeEvent unit_event(Step deliver) {
  SpikeEvent ev;
  ev.deliver_step = deliver;
  return ev;
}

RunCounts replay_queues(const QueueConfig& config, const SpikeTrace& trace, Step delay, bool sample_occupancy) {
  std::vector<EventQueue> queues;
  queues.reserve(trace.n_queues);
  for (std::size_t q = 0; q < trace.n_queues; ++q) queues.push_back(make_queue(config));

  RunCounts counts;
  for (Step s = 0; s < trace.steps; ++s) {
    const SpikeEvent ev = unit_event(s + delay);
    for (std::uint64_t k = trace.step_offsets[s]; k < trace.step_offsets[s + 1]; ++k) {
      queues[trace.lanes[k]].enqueue(ev);
    }
    for (auto& q : queues) counts.delivered += q.pop_due().count;
    if (sample_occupancy) {
      for (const auto& q : queues) counts.occupancy_sum += static_cast<double>(q.occupancy());
    }
  }
  for (const auto& q : queues) {
    counts.enqueued += q.stats().enqueued;
    counts.lost += q.stats().lost();
  }
  return counts;
}

RunCounts replay_soa(const QueueConfig& config, const SpikeTrace& trace, Step delay, bool sample_occupancy) {
  const std::size_t lanes = trace.n_queues;
  RunCounts counts;
  switch (config.kind) {
    case QueueKind::DoNothing: {
      PulseColumns out(lanes);
      for (Step s = 0; s < trace.steps; ++s) {
        counts.enqueued += trace.step_offsets[s + 1] - trace.step_offsets[s];
        std::fill(out.weight.begin(), out.weight.end(), 0.0);
        std::fill(out.weight_tangent.begin(), out.weight_tangent.end(), 0.0);
        std::fill(out.weighted_time_tangent.begin(), out.weighted_time_tangent.end(), 0.0);
        std::fill(out.count.begin(), out.count.end(), 0.0);
      }
      counts.lost = counts.enqueued;
      return counts;
    }
    case QueueKind::Ring: {
      RingBatch batch(lanes, config.capacity, config.max_delay);
      PulseColumns out(lanes);
      std::uint64_t in_flight = 0;
      for (Step s = 0; s < trace.steps; ++s) {
        const SpikeEvent ev = unit_event(s + delay);
        for (std::uint64_t k = trace.step_offsets[s]; k < trace.step_offsets[s + 1]; ++k) {
          batch.enqueue(trace.lanes[k], ev);
        }
        in_flight += trace.step_offsets[s + 1] - trace.step_offsets[s];
        batch.pop_due(out);
        if (sample_occupancy) {
          in_flight -= static_cast<std::uint64_t>(batch.stats().delivered - counts.delivered);
          counts.delivered = batch.stats().delivered;
          counts.occupancy_sum += static_cast<double>(in_flight);
        }
      }
      counts.enqueued = batch.stats().enqueued;
      counts.lost = batch.stats().lost();
      counts.delivered = batch.stats().delivered;
      return counts;
    }
    case QueueKind::BitArray32: {
      BitArrayBatch batch(lanes, config.max_delay);
      std::vector<std::uint32_t> fired;
      std::uint64_t in_flight = 0;
      for (Step s = 0; s < trace.steps; ++s) {
        const SpikeEvent ev = unit_event(s + delay);
        for (std::uint64_t k = trace.step_offsets[s]; k < trace.step_offsets[s + 1]; ++k) {
          in_flight += batch.enqueue(trace.lanes[k], ev) ? 1 : 0;
        }
        batch.pop_due(fired);
        std::uint64_t step_out = 0;
        for (std::uint32_t f : fired) step_out += f;
        counts.delivered += step_out;
        if (sample_occupancy) {
          in_flight -= step_out;
          counts.occupancy_sum += static_cast<double>(in_flight);
        }
      }
      counts.enqueued = batch.stats().enqueued;
      counts.lost = batch.stats().lost();
      return counts;
    }
    default:
      throw ConfigError("soa engine supports donothing, ring and bitarray32, not " +
                        std::string(kind_name(config.kind)));
  }
}

void check_workload_fits(const QueueConfig& config, const PoissonWorkload& w) {
  // Build one queue up front so configuration errors surface before timing.
  (void)make_queue(config);
  if (config.kind != QueueKind::DoNothing && static_cast<std::size_t>(w.delay_steps) > config.max_delay) {
    throw CapabilityError("horizon", "delay " + std::to_string(w.delay_steps) + " exceeds max_delay " +
                                         std::to_string(config.max_delay));
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

void PoissonWorkload::validate() const {
  if (!(lambda_steps >= 1.0)) throw ConfigError("poisson workload: lambda must be >= 1 step");
  if (delay_steps < 1) throw ConfigError("poisson workload: delay must be >= 1 step");
  if (n_queues < 1) throw ConfigError("poisson workload: need at least one queue");
  if (steps < 1) throw ConfigError("poisson workload: need at least one step");
  const double expected = static_cast<double>(n_queues) * static_cast<double>(steps) / lambda_steps;
  if (expected > 4e8) throw ConfigError("poisson workload: too many spikes to pregenerate");
}

SpikeTrace gen_poisson(const PoissonWorkload& workload) {
  workload.validate();
  SpikeTrace trace;
  trace.n_queues = workload.n_queues;
  trace.steps = workload.steps;
  trace.step_offsets.assign(static_cast<std::size_t>(workload.steps) + 1, 0);

  // Two passes over identical streams: count per step, then fill.
  for (std::size_t q = 0; q < workload.n_queues; ++q) {
    for (SpikeStream s(workload.lambda_steps, lane_seed(workload.seed, q)); s.peek() < workload.steps; s.advance()) {
      ++trace.step_offsets[static_cast<std::size_t>(s.peek()) + 1];
    }
  }
  for (std::size_t i = 1; i < trace.step_offsets.size(); ++i) trace.step_offsets[i] += trace.step_offsets[i - 1];
  trace.lanes.resize(trace.step_offsets.back());
  std::vector<std::uint64_t> cursor(trace.step_offsets.begin(), trace.step_offsets.end() - 1);
  for (std::size_t q = 0; q < workload.n_queues; ++q) {
    for (SpikeStream s(workload.lambda_steps, lane_seed(workload.seed, q)); s.peek() < workload.steps; s.advance()) {
      trace.lanes[cursor[static_cast<std::size_t>(s.peek())]++] = static_cast<std::uint32_t>(q);
    }
  }
  return trace;
}

std::string_view engine_name(Engine engine) { return engine == Engine::Soa ? "soa" : "queues"; }

std::string platform_label() {
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  std::string cpu = "unknown-cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(line.find_first_not_of(' ', colon + 1));
      break;
    }
  }
  return std::string(host) + " " + cpu;
}

BenchRecord run_inference_bench(const QueueConfig& config, const PoissonWorkload& workload, int reps, int warmup,
                                Engine engine, bool with_baseline) {
  if (reps < 3) throw ConfigError("bench: need at least 3 reps");
  if (warmup < 1) throw ConfigError("bench: need at least 1 warmup rep");
  workload.validate();
  check_workload_fits(config, workload);
  const SpikeTrace trace = gen_poisson(workload);
  const auto replay = engine == Engine::Soa ? replay_soa : replay_queues;

  // The baseline is timed rep by rep between the runs of the measured kind,
  // so that drift in machine speed hits both alike.
  QueueConfig none = config;
  none.kind = QueueKind::DoNothing;
  const bool baseline = with_baseline && config.kind != QueueKind::DoNothing;
  auto timed = [&](const QueueConfig& c, const RunCounts* expect) {
    const auto t0 = Clock::now();
    const RunCounts counts = replay(c, trace, workload.delay_steps, false);
    const auto t1 = Clock::now();
    if (expect && !(counts == *expect)) throw std::runtime_error("bench: counts differ between reps of the same trace");
    return std::chrono::duration<double, std::nano>(t1 - t0).count();
  };

  RunCounts reference = replay(config, trace, workload.delay_steps, true);
  for (int i = 1; i < warmup; ++i) replay(config, trace, workload.delay_steps, false);
  for (int i = 0; baseline && i < warmup; ++i) replay(none, trace, workload.delay_steps, false);
  std::vector<double> times;
  std::vector<double> baseline_times;
  for (int r = 0; r < reps; ++r) {
    times.push_back(timed(config, &reference));
    if (baseline) baseline_times.push_back(timed(none, nullptr));
  }

  const double per = static_cast<double>(workload.steps) * static_cast<double>(workload.n_queues);
  BenchRecord rec;
  rec.workload = std::string(workload.n_queues > 1 ? "poisson_batched" : "poisson_single") +
                 (engine == Engine::Soa ? "_soa" : "");
  rec.kind = std::string(kind_name(config.kind));
  rec.capacity = config.capacity;
  rec.max_delay = config.max_delay;
  rec.batch = workload.n_queues;
  rec.lambda = workload.lambda_steps;
  rec.delay = workload.delay_steps;
  rec.steps = workload.steps;
  rec.reps = reps;
  rec.ns_per_step_per_queue = median(times) / per;
  rec.drop_rate = reference.enqueued ? static_cast<double>(reference.lost) / static_cast<double>(reference.enqueued)
                                     : 0.0;
  rec.spikes_in = trace.total();
  rec.spikes_out = reference.delivered;
  rec.seed = workload.seed;
  rec.platform = platform_label();
  rec.mean_occupancy = reference.occupancy_sum / per;
  if (config.kind == QueueKind::DoNothing) {
    rec.baseline_ns = rec.ns_per_step_per_queue;
  } else if (baseline) {
    rec.baseline_ns = median(baseline_times) / per;
  }
  return rec;
}

std::string_view mode_name(RsnnMode mode) { return mode == RsnnMode::ForwardAd ? "forward-ad" : "inference"; }

RsnnMode parse_mode(std::string_view name) {
  if (name == "inference") return RsnnMode::Inference;
  if (name == "forward-ad" || name == "forward_ad") return RsnnMode::ForwardAd;
  throw ConfigError("unknown mode '" + std::string(name) + "' (inference, forward-ad)");
}

BenchRecord run_rsnn_bench(const NetworkParams& params, RsnnMode mode, Step steps, int reps, int warmup,
                           std::uint64_t seed) {
  if (reps < 1) throw ConfigError("bench: need at least 1 rep");
  if (steps < 1) throw ConfigError("bench: need at least one step");
  std::optional<SeedDirection> direction;
  if (mode == RsnnMode::ForwardAd) direction = SeedDirection{SeedDirection::Target::Weight, 0, 1};

  // Construction validates the configuration before any timing.
  const Network probe(params, direction, seed);
  SimResult reference{};
  std::uint64_t enqueued = 0;
  std::vector<double> times;
  for (int r = -warmup; r < reps; ++r) {
    Network net(params, direction, seed);
    const auto t0 = Clock::now();
    const SimResult result = net.simulate(steps);
    const auto t1 = Clock::now();
    if (r == -warmup) {
      reference = result;
      enqueued = net.enqueued();
    } else if (result.signature != reference.signature) {
      throw std::runtime_error("bench: network runs of the same seed differ");
    }
    if (r >= 0) times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }

  double max_delay = 0.0;
  for (std::size_t pre = 0; pre < params.n; ++pre) {
    for (std::size_t post = 0; post < params.n; ++post) {
      if (pre != post) max_delay = std::max(max_delay, params.delay(pre, post));
    }
  }
  BenchRecord rec;
  rec.workload = "rsnn_" + std::string(mode == RsnnMode::ForwardAd ? "forward_ad" : "inference");
  rec.kind = std::string(kind_name(params.queue.kind));
  rec.delay = static_cast<Step>(std::ceil(max_delay / params.dt - 1e-9));
  rec.max_delay = static_cast<std::size_t>(rec.delay) + 1;
  rec.capacity = params.queue.kind == QueueKind::Ring ? rec.max_delay : params.queue.capacity;
  rec.batch = params.n;
  rec.lambda = params.drive_rate > 0.0 ? 1.0 / params.drive_rate : std::numeric_limits<double>::quiet_NaN();
  rec.steps = steps;
  rec.reps = reps;
  rec.ns_per_step_per_queue = median(times) / (static_cast<double>(steps) * static_cast<double>(params.n));
  rec.drop_rate = enqueued ? static_cast<double>(reference.drop_count) / static_cast<double>(enqueued) : 0.0;
  rec.spikes_in = enqueued;
  rec.spikes_out = reference.delivered;
  rec.seed = seed;
  rec.platform = platform_label();
  return rec;
}

DropRate measure_drop_rate(const QueueConfig& config, double lambda_steps, Step delay_steps, Step steps,
                           std::uint64_t seed) {
  PoissonWorkload w{lambda_steps, delay_steps, 1, steps, seed};
  w.validate();
  check_workload_fits(config, w);
  EventQueue queue = make_queue(config);

  constexpr int kSlices = 50;
  std::vector<double> slice_rates;
  std::uint64_t slice_in = 0;
  std::uint64_t slice_lost = 0;
  Step slice_end = std::max<Step>(1, steps / kSlices);
  SpikeStream stream(lambda_steps, lane_seed(seed, 0));
  for (Step s = 0; s < steps; ++s) {
    if (stream.peek() == s) {
      queue.enqueue(unit_event(s + delay_steps));
      stream.advance();
    }
    queue.pop_due();
    if (s + 1 == slice_end || s + 1 == steps) {
      const std::uint64_t in = queue.stats().enqueued - slice_in;
      const std::uint64_t lost = queue.stats().lost() - slice_lost;
      if (in > 0) slice_rates.push_back(static_cast<double>(lost) / static_cast<double>(in));
      slice_in = queue.stats().enqueued;
      slice_lost = queue.stats().lost();
      slice_end += std::max<Step>(1, steps / kSlices);
    }
  }

  DropRate out;
  out.enqueued = queue.stats().enqueued;
  out.lost = queue.stats().lost();
  out.rate = out.enqueued ? static_cast<double>(out.lost) / static_cast<double>(out.enqueued) : 0.0;
  out.low_confidence = out.enqueued < kMinConfidentSpikes;
  if (slice_rates.size() > 1) {
    double mean = 0.0;
    for (double r : slice_rates) mean += r;
    mean /= static_cast<double>(slice_rates.size());
    double var = 0.0;
    for (double r : slice_rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(slice_rates.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(slice_rates.size()));
  }
  return out;
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "batch") return SweepAxis::Batch;
  if (name == "capacity") return SweepAxis::Capacity;
  if (name == "pressure") return SweepAxis::Pressure;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (batch, capacity, pressure)");
}

std::vector<BenchRecord> sweep(SweepAxis axis, const std::vector<double>& grid, const QueueConfig& base,
                               const PoissonWorkload& workload, int reps, Engine engine) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("sweep: grid must be ascending");
  const bool ring = base.kind == QueueKind::Ring || base.kind == QueueKind::LossyRing;

  std::vector<BenchRecord> records;
  for (double g : grid) {
    QueueConfig config = base;
    PoissonWorkload w = workload;
    switch (axis) {
      case SweepAxis::Batch:
        if (!(g >= 1.0)) throw ConfigError("sweep: batch sizes must be >= 1");
        w.n_queues = static_cast<std::size_t>(g);
        records.push_back(run_inference_bench(config, w, reps, 2, engine));
        break;
      case SweepAxis::Capacity:
        if (!(g >= 1.0)) throw ConfigError("sweep: capacities must be >= 1");
        config.capacity = static_cast<std::size_t>(g);
        records.push_back(run_inference_bench(config, w, reps, 2, engine));
        break;
      case SweepAxis::Pressure: {
        if (!(g > 0.0)) throw ConfigError("sweep: pressures must be positive");
        w.delay_steps = std::max<Step>(1, std::lround(g * w.lambda_steps));
        config.max_delay = static_cast<std::size_t>(w.delay_steps);
        if (ring && config.capacity == 0) config.capacity = config.max_delay;
        const DropRate d = measure_drop_rate(config, w.lambda_steps, w.delay_steps, w.steps, w.seed);
        BenchRecord rec;
        rec.workload = "droprate";
        rec.kind = std::string(kind_name(config.kind));
        rec.capacity = config.capacity;
        rec.max_delay = config.max_delay;
        rec.batch = 1;
        rec.lambda = w.lambda_steps;
        rec.delay = w.delay_steps;
        rec.steps = w.steps;
        rec.reps = 1;
        rec.ns_per_step_per_queue = std::numeric_limits<double>::quiet_NaN();
        rec.drop_rate = d.rate;
        rec.spikes_in = d.enqueued;
        rec.spikes_out = d.enqueued - d.lost;
        rec.seed = w.seed;
        rec.platform = platform_label();
        records.push_back(std::move(rec));
        break;
      }
    }
  }
  return records;
}

void write_csv(std::ostream& os, const std::vector<BenchRecord>& records, bool header) {
  if (header) os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << csv_field(r.workload) << ',' << r.kind << ',' << r.capacity << ',' << r.max_delay << ',' << r.batch << ','
       << number(r.lambda) << ',' << r.delay << ',' << r.steps << ',' << r.reps << ','
       << number(r.ns_per_step_per_queue) << ',' << number(r.drop_rate) << ',' << r.spikes_in << ','
       << r.spikes_out << ',' << r.seed << ',' << csv_field(r.platform) << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<BenchRecord>& records) {
  auto num = [](double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) {
    out.push_back({{"workload", r.workload},
                   {"kind", r.kind},
                   {"capacity", r.capacity},
                   {"max_delay", r.max_delay},
                   {"batch", r.batch},
                   {"lambda", num(r.lambda)},
                   {"delay", r.delay},
                   {"steps", r.steps},
                   {"reps", r.reps},
                   {"ns_per_step_per_queue", num(r.ns_per_step_per_queue)},
                   {"drop_rate", num(r.drop_rate)},
                   {"spikes_in", r.spikes_in},
                   {"spikes_out", r.spikes_out},
                   {"seed", r.seed},
                   {"platform", r.platform}});
  }
  os << out.dump(2) << '\n';
}

void write_raster_csv(std::ostream& os, const std::vector<SpikeRecord>& spikes) {
  os << "step,neuron,value\n";
  os.precision(17);
  for (const auto& s : spikes) os << s.step << ',' << s.neuron << ',' << s.t_spk << '\n';
}

void write_voltage_csv(std::ostream& os, const NetworkParams& params, Step steps, std::uint64_t seed) {
  os << "step,neuron,value\n";
  os.precision(17);
  Network net(params, std::nullopt, seed);
  net.simulate(steps, [&os](const Network& n) {
    for (std::size_t j = 0; j < n.size(); ++j) os << n.step_index() << ',' << j << ',' << n.voltage(j).primal << '\n';
  });
}

}  // namespace eventq
