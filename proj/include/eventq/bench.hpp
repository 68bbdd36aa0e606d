#pragma once

// Poisson and recurrent-network workloads, the timing harness, drop-rate
// Monte Carlo, and CSV/JSON emission of the results.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eventq/event_queue.hpp"
#include "eventq/network.hpp"

namespace eventq {

struct PoissonWorkload {
  double lambda_steps = 400.0;  // mean inter-spike interval per queue
  Step delay_steps = 80;
  std::size_t n_queues = 1;
  Step steps = 100000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Spike steps of every queue in step-major order: the queues spiking at
/// step s are lanes[step_offsets[s] .. step_offsets[s + 1]).
struct SpikeTrace {
  std::size_t n_queues = 0;
  Step steps = 0;
  std::vector<std::uint64_t> step_offsets;
  std::vector<std::uint32_t> lanes;

  std::uint64_t total() const { return lanes.size(); }
};

/// Bernoulli(1/lambda) spikes per queue and step (at most one per step),
/// drawn as geometric gaps. Queue q uses its own stream derived from the seed,
/// so a queue's spikes do not depend on the batch size.
SpikeTrace gen_poisson(const PoissonWorkload& workload);

/// Which implementation runs a batched Poisson workload: one EventQueue per
/// lane, or the structure-of-arrays batches (Ring, BitArray32, DoNothing only).
enum class Engine { Queues, Soa };

std::string_view engine_name(Engine engine);

struct BenchRecord {
  std::string workload;
  std::string kind;
  std::size_t capacity = 0;
  std::size_t max_delay = 0;
  std::size_t batch = 0;
  double lambda = 0.0;
  Step delay = 0;
  Step steps = 0;
  int reps = 0;
  double ns_per_step_per_queue = 0.0;  // median over reps; NaN when not timed
  double drop_rate = 0.0;
  std::uint64_t spikes_in = 0;
  std::uint64_t spikes_out = 0;
  std::uint64_t seed = 0;
  std::string platform;
  // Not part of the CSV schema.
  double baseline_ns = 0.0;  // DoNothing on the same workload
  double mean_occupancy = 0.0;
};

/// Hostname and CPU model.
std::string platform_label();

/// Median wall time of `reps` runs after `warmup` untimed runs; every run
/// starts from fresh queues and replays the same trace. Also times the
/// DoNothing baseline, one run after each timed rep, when `with_baseline` is set.
BenchRecord run_inference_bench(const QueueConfig& config, const PoissonWorkload& workload, int reps = 5,
                                int warmup = 2, Engine engine = Engine::Queues, bool with_baseline = true);

enum class RsnnMode { Inference, ForwardAd };

std::string_view mode_name(RsnnMode mode);
RsnnMode parse_mode(std::string_view name);

/// Times `steps` steps of the network; forward AD seeds weight[0][1].
BenchRecord run_rsnn_bench(const NetworkParams& params, RsnnMode mode, Step steps, int reps = 5, int warmup = 1,
                           std::uint64_t seed = 0);

struct DropRate {
  double rate = 0.0;
  double std_error = 0.0;  // batch means over 50 equal slices of the run
  std::uint64_t enqueued = 0;
  std::uint64_t lost = 0;
  bool low_confidence = false;  // fewer than 1000 spikes generated
};

inline constexpr std::uint64_t kMinConfidentSpikes = 1000;

/// Single queue fed by Bernoulli(1/lambda) spikes with a fixed delay.
DropRate measure_drop_rate(const QueueConfig& config, double lambda_steps, Step delay_steps, Step steps,
                           std::uint64_t seed);

enum class SweepAxis { Batch, Capacity, Pressure };

SweepAxis parse_axis(std::string_view name);

/// One record per grid point. Batch: grid is the queue count. Capacity: grid
/// is the capacity (ring kinds also get max_delay = capacity). Pressure: grid
/// is delay/lambda with lambda fixed; records carry drop rates, not timings.
std::vector<BenchRecord> sweep(SweepAxis axis, const std::vector<double>& grid, const QueueConfig& base,
                               const PoissonWorkload& workload, int reps = 5, Engine engine = Engine::Queues);

inline constexpr const char* kCsvHeader =
    "workload,kind,capacity,max_delay,batch,lambda,delay,steps,reps,ns_per_step_per_queue,drop_rate,spikes_in,"
    "spikes_out,seed,platform";

void write_csv(std::ostream& os, const std::vector<BenchRecord>& records, bool header = true);
void write_json(std::ostream& os, const std::vector<BenchRecord>& records);

/// Debug dumps, one row per (step, neuron, value): spike times and voltages.
void write_raster_csv(std::ostream& os, const std::vector<SpikeRecord>& spikes);
void write_voltage_csv(std::ostream& os, const NetworkParams& params, Step steps, std::uint64_t seed);

}  // namespace eventq
