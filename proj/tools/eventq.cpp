// eventq: benchmarks, drop-rate sweeps, gradient checks and oracle runs.
//
// Exit codes: 0 success, 1 runtime error or divergence, 2 invalid
// configuration, 3 inconclusive.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "eventq/bench.hpp"
#include "eventq/network.hpp"
#include "eventq/oracle.hpp"

using namespace eventq;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2, kInconclusive = 3 };

struct Options {
  std::string queue = "ring";
  std::size_t capacity = 80;
  std::size_t max_delay = 0;  // 0: the delay
  double lambda = 400.0;
  Step delay = 80;
  std::size_t batch = 1;
  Step steps = 100000;
  int reps = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string engine = "queues";

  // bench rsnn / gradcheck
  std::size_t n = 10;
  std::string mode = "inference";
  double dt = 1e-3;
  double drive_rate = 0.0;
  double drive_amplitude = 0.0;
  double bias = std::nan("");

  // sweeps
  std::string axis = "batch";
  std::vector<double> grid;
  std::vector<std::size_t> capacities;
  std::vector<double> pressures{0.1, 0.25, 0.5, 1.0, 2.0, 4.0};

  // gradcheck
  std::size_t directions = 20;
  double tolerance = 5e-2;
  bool analytic = false;

  // verify
  std::size_t traces = 1000;
  std::size_t events = 100000;

  // dump
  std::string raster;
  std::string voltage;
};

QueueKind kind_of(const std::string& name) {
  if (auto k = parse_kind(name)) return *k;
  throw ConfigError("unknown queue kind '" + name + "'");
}

QueueConfig queue_config(const Options& o) {
  QueueConfig c;
  c.kind = kind_of(o.queue);
  c.capacity = o.capacity;
  c.max_delay = o.max_delay ? o.max_delay : static_cast<std::size_t>(o.delay);
  if (c.kind == QueueKind::BitArray32) c.capacity = 32;
  return c;
}

Engine engine_of(const std::string& name) {
  if (name == "queues") return Engine::Queues;
  if (name == "soa") return Engine::Soa;
  throw ConfigError("unknown engine '" + name + "' (queues, soa)");
}

void emit(const Options& o, const std::vector<BenchRecord>& records) {
  if (o.format != "csv" && o.format != "json") throw ConfigError("unknown format '" + o.format + "' (csv, json)");
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw std::runtime_error("cannot open " + o.out);
  }
  std::ostream& os = o.out.empty() ? std::cout : file;
  if (o.format == "json") {
    write_json(os, records);
  } else {
    write_csv(os, records);
  }
}

NetworkParams network_params(const Options& o) {
  NetworkParams p = random_network(o.n, o.dt, o.seed);
  p.queue = queue_config(o);
  p.drive_rate = o.drive_rate;
  p.drive_amplitude = o.drive_amplitude;
  if (!std::isnan(o.bias)) p.bias.assign(o.n, o.bias);
  return p;
}

int cmd_bench_poisson(const Options& o) {
  const QueueConfig config = queue_config(o);
  const PoissonWorkload w{o.lambda, o.delay, o.batch, o.steps, o.seed};
  const Engine engine = engine_of(o.engine);
  BenchRecord rec = run_inference_bench(config, w, o.reps, 2, engine, false);
  std::vector<BenchRecord> records;
  if (config.kind != QueueKind::DoNothing) {
    QueueConfig none = config;
    none.kind = QueueKind::DoNothing;
    records.push_back(run_inference_bench(none, w, o.reps, 2, engine, false));
  }
  records.push_back(rec);
  emit(o, records);
  return kOk;
}

int cmd_bench_rsnn(const Options& o) {
  const NetworkParams p = network_params(o);
  emit(o, {run_rsnn_bench(p, parse_mode(o.mode), o.steps, o.reps, 1, o.seed)});
  return kOk;
}

int cmd_bench_sweep(const Options& o) {
  const PoissonWorkload w{o.lambda, o.delay, o.batch, o.steps, o.seed};
  emit(o, sweep(parse_axis(o.axis), o.grid, queue_config(o), w, o.reps, engine_of(o.engine)));
  return kOk;
}

int cmd_droprate(const Options& o) {
  QueueConfig base = queue_config(o);
  const bool ring = base.kind == QueueKind::Ring || base.kind == QueueKind::LossyRing;
  std::vector<std::size_t> capacities = o.capacities;
  if (capacities.empty()) capacities.push_back(ring && o.capacity == 0 ? 0 : o.capacity);
  std::vector<double> pressures = o.pressures;
  std::sort(pressures.begin(), pressures.end());

  const PoissonWorkload w{o.lambda, o.delay, 1, o.steps, o.seed};
  std::vector<BenchRecord> records;
  for (std::size_t cap : capacities) {
    base.capacity = cap;
    auto rows = sweep(SweepAxis::Pressure, pressures, base, w, 1);
    records.insert(records.end(), rows.begin(), rows.end());
  }
  emit(o, records);
  return kOk;
}

int cmd_gradcheck(const Options& o) {
  if (o.analytic) {
    const double tau = 0.2;
    const double d = 0.0503;
    const SingleSpikeProbe probe = single_spike_probe(d, 1.0, tau, o.dt, 10, 400);
    const double expected = std::exp(-(probe.end_time - probe.t_post) / tau) / tau;
    const double rel = std::abs(probe.current.tangent - expected) / std::abs(expected);
    std::printf("direction,jvp,fd,rel_err\n");
    std::printf("delay[0][1],%.12e,%.12e,%.3e\n", probe.current.tangent, expected, rel);
    return rel < 1e-9 ? kOk : kRuntime;
  }

  const NetworkParams p = network_params(o);
  std::printf("direction,jvp,fd,rel_err,status\n");
  std::size_t smooth = 0;
  std::size_t failed = 0;
  for (const auto& dir : sample_directions(o.n, o.directions, o.seed + 1)) {
    const GradCheckRow row = check_direction(p, dir, o.seed, o.steps);
    const char* status = !row.smooth ? "skipped" : row.rel_err < o.tolerance ? "pass" : "fail";
    std::printf("%s,%.12e,%.12e,%.3e,%s\n", dir.describe().c_str(), row.jvp, row.fd, row.rel_err, status);
    if (!row.smooth) {
      std::fprintf(stderr, "%s: %s\n", dir.describe().c_str(), row.reason.c_str());
      continue;
    }
    ++smooth;
    if (row.rel_err >= o.tolerance) ++failed;
  }
  if (smooth == 0) {
    std::fprintf(stderr, "inconclusive: every sampled direction is non-smooth\n");
    return kInconclusive;
  }
  return failed == 0 ? kOk : kRuntime;
}

int cmd_verify(const Options& o) {
  std::vector<QueueConfig> configs;
  if (o.queue == "all") {
    configs = {{QueueKind::Ring, 32, 32},         {QueueKind::SortedArray, 64, 32},
               {QueueKind::BinaryHeap, 64, 32},   {QueueKind::FIFORing, 32, 32},
               {QueueKind::SingleSpikeHold, 1, 8}, {QueueKind::FIFORing, 1, 8},
               {QueueKind::BitArray32, 32, 31}};
  } else {
    QueueConfig c = queue_config(o);
    if (o.max_delay == 0) c.max_delay = 32;
    configs.push_back(c);
  }

  std::mt19937_64 rng(o.seed);
  bool diverged = false;
  for (const auto& config : configs) {
    const auto caps = capabilities_of(config);
    std::size_t equal = 0;
    std::size_t rejected = 0;
    std::optional<Divergence> first;
    for (std::size_t t = 0; t < o.traces && !first; ++t) {
      const Trace trace = random_trace(trace_spec_for(config, o.events), rng);
      const EquivalenceReport r = dense_oracle_equivalence(trace, config);
      if (r.verdict == EquivalenceReport::Verdict::Equal) ++equal;
      if (r.verdict == EquivalenceReport::Verdict::Rejected) ++rejected;
      if (r.divergence) first = r.divergence;
    }
    const std::string name = std::string(kind_name(config.kind)) + "[" + std::to_string(config.capacity) + "]";
    if (first) {
      std::printf("%-22s DIVERGED at step %lld: expected count %u weight %.17g, got count %u weight %.17g%s\n",
                  name.c_str(), static_cast<long long>(first->step), first->expected.count,
                  first->expected.weight.primal, first->got.count, first->got.weight.primal,
                  caps.lossy ? " (lossy kind; informational)" : "");
      if (!caps.lossy) diverged = true;
    } else {
      std::printf("%-22s equal on %zu traces (%zu rejected as outside capabilities)\n", name.c_str(), equal,
                  rejected);
    }
  }
  return diverged ? kRuntime : kOk;
}

int cmd_dump(const Options& o) {
  const NetworkParams p = network_params(o);
  if (!o.voltage.empty()) {
    std::ofstream f(o.voltage);
    write_voltage_csv(f, p, o.steps, o.seed);
  }
  if (!o.raster.empty()) {
    Network net(p, std::nullopt, o.seed);
    net.simulate(o.steps);
    std::ofstream f(o.raster);
    write_raster_csv(f, net.spikes());
  }
  return kOk;
}

void add_queue_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--queue", o.queue, "Queue kind");
  cmd->add_option("--capacity", o.capacity, "Queue capacity");
  cmd->add_option("--max-delay", o.max_delay, "Delay horizon in steps (default: --delay)");
}

void add_output_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output file (default stdout)");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_poisson_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--lambda", o.lambda, "Mean inter-spike interval in steps");
  cmd->add_option("--delay", o.delay, "Delay in steps");
  cmd->add_option("--batch", o.batch, "Number of queues");
  cmd->add_option("--steps", o.steps, "Steps per run");
  cmd->add_option("--reps", o.reps, "Timed repetitions");
  cmd->add_option("--engine", o.engine, "queues or soa");
}

void add_network_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n, "Neurons");
  cmd->add_option("--dt", o.dt, "Time step (tau_m = 1)");
  cmd->add_option("--drive-rate", o.drive_rate, "External kick probability per step");
  cmd->add_option("--drive-amplitude", o.drive_amplitude, "External kick size");
  cmd->add_option("--bias", o.bias, "Same bias current for every neuron");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike-event delay queues: benchmarks and checks"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Random seed")->envname("EVENTQ_SEED");

  auto* bench = app.add_subcommand("bench", "Timing benchmarks");
  bench->require_subcommand(1);
  auto* poisson = bench->add_subcommand("poisson", "Poisson spikes into single or batched queues");
  auto* rsnn = bench->add_subcommand("rsnn", "Recurrent LIF network");
  auto* sweep_cmd = bench->add_subcommand("sweep", "Batch, capacity or pressure sweep");
  for (auto* cmd : {poisson, rsnn, sweep_cmd}) {
    add_queue_flags(cmd, o);
    add_output_flags(cmd, o);
    cmd->add_option("--seed", o.seed, "Random seed")->envname("EVENTQ_SEED");
  }
  add_poisson_flags(poisson, o);
  add_poisson_flags(sweep_cmd, o);
  sweep_cmd->add_option("--axis", o.axis, "batch, capacity or pressure");
  sweep_cmd->add_option("--grid", o.grid, "Ascending grid values")->delimiter(',')->required();
  add_network_flags(rsnn, o);
  rsnn->add_option("--mode", o.mode, "inference or forward-ad");
  rsnn->add_option("--steps", o.steps, "Steps per run");
  rsnn->add_option("--reps", o.reps, "Timed repetitions");

  auto* droprate = app.add_subcommand("droprate", "Drop rates over a queue-pressure grid");
  add_queue_flags(droprate, o);
  add_output_flags(droprate, o);
  droprate->add_option("--seed", o.seed, "Random seed")->envname("EVENTQ_SEED");
  droprate->add_option("--lambda", o.lambda, "Mean inter-spike interval in steps");
  droprate->add_option("--steps", o.steps, "Steps per point");
  droprate->add_option("--capacities", o.capacities, "Capacity grid")->delimiter(',');
  droprate->add_option("--pressures", o.pressures, "delay/lambda grid")->delimiter(',');

  auto* gradcheck = app.add_subcommand("gradcheck", "Forward-mode gradients against finite differences");
  add_network_flags(gradcheck, o);
  gradcheck->add_option("--queue", o.queue, "Queue kind");
  gradcheck->add_option("--capacity", o.capacity, "Queue capacity");
  gradcheck->add_option("--seed", o.seed, "Random seed")->envname("EVENTQ_SEED");
  gradcheck->add_option("--steps", o.steps, "Steps per run");
  gradcheck->add_option("--directions", o.directions, "Sampled directions");
  gradcheck->add_option("--tol", o.tolerance, "Relative error tolerance");
  gradcheck->add_flag("--analytic", o.analytic, "Single spike against the closed form");

  auto* verify = app.add_subcommand("verify", "Randomized equivalence against the dense oracle");
  verify->add_option("--queue", o.queue, "Queue kind, or all");
  verify->add_option("--capacity", o.capacity, "Queue capacity");
  verify->add_option("--max-delay", o.max_delay, "Delay horizon in steps");
  verify->add_option("--seed", o.seed, "Random seed")->envname("EVENTQ_SEED");
  verify->add_option("--traces", o.traces, "Random traces per kind");
  verify->add_option("--events", o.events, "Events per trace");

  auto* dump = app.add_subcommand("dump", "Raster and voltage traces of a network run as CSV");
  add_network_flags(dump, o);
  dump->add_option("--queue", o.queue, "Queue kind");
  dump->add_option("--capacity", o.capacity, "Queue capacity");
  dump->add_option("--seed", o.seed, "Random seed")->envname("EVENTQ_SEED");
  dump->add_option("--steps", o.steps, "Steps");
  dump->add_option("--raster", o.raster, "Spike raster CSV");
  dump->add_option("--voltage", o.voltage, "Voltage trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kConfig;
  }

  // Subcommand defaults that differ from the poisson bench.
  if (rsnn->parsed() && rsnn->count("--steps") == 0) o.steps = 1000;
  if (gradcheck->parsed() && gradcheck->count("--steps") == 0) o.steps = 2000;
  if (gradcheck->parsed() && gradcheck->count("--queue") == 0) o.queue = "ring";
  if (droprate->parsed()) {
    if (droprate->count("--steps") == 0) o.steps = 1000000;
    // Ring kinds default to one slot per delay step at every grid point.
    if (droprate->count("--capacity") == 0 && (o.queue == "ring" || o.queue == "lossyring")) o.capacity = 0;
  }
  if (dump->parsed() && dump->count("--steps") == 0) o.steps = 2000;

  try {
    if (poisson->parsed()) return cmd_bench_poisson(o);
    if (rsnn->parsed()) return cmd_bench_rsnn(o);
    if (sweep_cmd->parsed()) return cmd_bench_sweep(o);
    if (droprate->parsed()) return cmd_droprate(o);
    if (gradcheck->parsed()) return cmd_gradcheck(o);
    if (verify->parsed()) return cmd_verify(o);
    if (dump->parsed()) return cmd_dump(o);
  } catch (const CapabilityError& e) {
    std::fprintf(stderr, "configuration error (capability '%s'): %s\n", e.capability().c_str(), e.what());
    return kConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kRuntime;
}
