#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "samegibbs/data.hpp"
#include "samegibbs/model.hpp"
#include "samegibbs/network.hpp"

namespace samegibbs {

// Piecewise-constant SAME replication schedule: segment i holds m for
// `passes` consecutive passes. The last segment extends indefinitely.
struct SameSegment {
  std::size_t m = 1;
  std::size_t passes = 1;

  friend bool operator==(const SameSegment&, const SameSegment&) = default;
};

class SameSchedule {
 public:
  SameSchedule() : segments_{{1, 1}} {}
  static SameSchedule constant(std::size_t m) { return SameSchedule({{m, 1}}); }
  // Throws Error{invalid_config} for an empty schedule, m = 0 or passes = 0.
  explicit SameSchedule(std::vector<SameSegment> segments);
  // Parses "m" or "m1xp1,m2xp2,..." (e.g. "1x50,5x150").
  static SameSchedule parse(const std::string& text);

  std::size_t m_for_pass(std::size_t pass) const;  // 0-based
  std::size_t max_m() const;
  std::span<const SameSegment> segments() const noexcept { return segments_; }
  std::string to_string() const;

  friend bool operator==(const SameSchedule&, const SameSchedule&) = default;

 private:
  std::vector<SameSegment> segments_;
};

// SAME replication factor for a 0-based pass index.
inline std::size_t anneal_m(const SameSchedule& schedule, std::size_t pass) {
  return schedule.m_for_pass(pass);
}

enum class AccumulatorMode { moving_sum, exponential };

struct SamplerConfig {
  SameSchedule same;
  std::size_t minibatch_size = 12500;
  std::size_t num_passes = 200;
  DirichletPrior prior;
  AccumulatorMode accumulator = AccumulatorMode::moving_sum;
  double exp_decay = 0.9;
  std::uint64_t seed = 1;
  std::size_t sweeps_per_minibatch = 1;
  // Replace Dirichlet draws of the CPTs with posterior means.
  bool map_estimate = false;
  // 0 selects the OpenMP default.
  std::size_t threads = 0;
  // Keep latent assignments per minibatch across passes. Defaults to on in
  // moving-sum mode and off in exponential mode, where resident state must not
  // grow with the dataset.
  std::optional<bool> persist_latent;

  bool persists_latent() const {
    return persist_latent.value_or(accumulator == AccumulatorMode::moving_sum);
  }
  // Throws Error{invalid_config}.
  void validate(std::size_t num_vars) const;
};

// m copies of a minibatch. states holds a complete assignment per
// (replica, case): states[(r * capacity + c) * num_vars + v]. Observed cells
// equal the source minibatch in every replica.
struct ReplicatedMinibatch {
  const Minibatch* source = nullptr;
  std::size_t replicas = 0;
  std::vector<State> states;

  std::span<State> assignment(std::size_t replica, std::size_t c) {
    const std::size_t n = source->num_vars;
    return {states.data() + (replica * source->capacity + c) * n, n};
  }
  std::span<const State> assignment(std::size_t replica, std::size_t c) const {
    const std::size_t n = source->num_vars;
    return {states.data() + (replica * source->capacity + c) * n, n};
  }
};

// Forms m copies of `mb`; latent cells are drawn uniformly at random from a
// stream keyed by (key, global case, replica, variable).
ReplicatedMinibatch replicate_minibatch(const Network& net, const Minibatch& mb, std::size_t m,
                                        std::uint64_t key);

// Resizes an existing replicated minibatch to m replicas over `mb`, keeping the
// latent cells of surviving replicas and initializing new ones uniformly.
void resize_replicas(const Network& net, ReplicatedMinibatch& rep, const Minibatch& mb,
                     std::size_t m, std::uint64_t key);

// Optional instrumentation for a sweep.
struct SweepProbe {
  std::vector<std::uint32_t> visits;       // per cell of rep.states
  std::vector<std::size_t> group_order;    // color groups in processing order
};

// One chromatic Gibbs sweep with frozen CPTs: color groups in order, every
// latent cell of every real case in every replica resampled once from its
// full conditional. The draw for a cell is keyed by (key, global case,
// replica, variable), so results do not depend on the thread count.
void resample_latent(const Network& net, const Coloring& coloring, const CptSet& cpts,
                     ReplicatedMinibatch& rep, std::uint64_t key, std::size_t threads = 0,
                     SweepProbe* probe = nullptr);

// Counts of the complete assignments of all replicas, each case weighted by
// its minibatch weight. Reduced in a fixed order.
CountSet tally_counts(const Network& net, const ReplicatedMinibatch& rep, std::size_t threads = 0);

// resample_latent followed by tally_counts.
CountSet sweep(const Network& net, const Coloring& coloring, const CptSet& cpts,
               ReplicatedMinibatch& rep, std::uint64_t key, std::size_t threads = 0,
               SweepProbe* probe = nullptr);

// Running state counts. In moving-sum mode the last counts of each minibatch
// are kept so they can be replaced on the next visit; in exponential mode only
// the decayed total is stored.
class CountAccumulator {
 public:
  CountAccumulator(TableShape shape, AccumulatorMode mode);

  AccumulatorMode mode() const noexcept { return mode_; }
  const CountSet& total() const noexcept { return total_; }
  std::size_t stored_minibatches() const noexcept;
  const CountSet* minibatch_counts(std::size_t mb_id) const;

  // total <- total - previous[mb_id] + counts; previous[mb_id] <- counts.
  void update_moving_sum(std::size_t mb_id, const CountSet& counts);
  // total <- decay * total + counts. Throws Error{invalid_config} unless
  // decay is in (0, 1].
  void update_exponential(const CountSet& counts, double decay);

  std::size_t bytes() const noexcept;

 private:
  TableShape shape_;
  AccumulatorMode mode_;
  CountSet total_;
  std::vector<std::optional<CountSet>> per_minibatch_;
};

struct TraceRecord {
  std::size_t pass = 0;       // 1-based pass just completed
  double seconds = 0.0;       // wall time since the run started
  double pass_seconds = 0.0;  // wall time of this pass
  std::uint64_t vars_sampled = 0;  // n x cases x m x sweeps in this pass
  std::optional<double> kl_avg;
  std::optional<double> vars_per_sec;
};

struct Trace {
  std::vector<TraceRecord> records;
};

// CSV with header "pass,seconds,kl_avg,vars_per_sec"; unavailable values are
// written as "nan".
std::string trace_to_csv(const Trace& trace);

struct MemoryReport {
  std::size_t model_bytes = 0;        // current CPTs
  std::size_t accumulator_bytes = 0;  // running counts (+ per-minibatch counts)
  std::size_t latent_bytes = 0;       // persisted latent assignments
  std::size_t working_bytes = 0;      // minibatch and replica buffers
};

struct RunResult {
  CptSet cpts;
  Trace trace;
  MemoryReport memory;
};

// Called after each pass with the 1-based pass number and the current CPTs.
using PassCallback = std::function<void(std::size_t pass, const CptSet& cpts)>;

// SAME Gibbs engine over a streamed dataset.
class SameGibbsSampler {
 public:
  // Throws Error{invalid_config}.
  SameGibbsSampler(const Network& net, SamplerConfig config);

  const Network& network() const noexcept { return net_; }
  const Coloring& coloring() const noexcept { return coloring_; }
  const SamplerConfig& config() const noexcept { return config_; }

  // Runs num_passes over `data`. Throws Error{dimension_mismatch} when the
  // data does not fit the network and Error{empty_data} when the source has no
  // cases.
  RunResult run(MinibatchSource& data, const CptSet* truth = nullptr,
                const PassCallback& on_pass = {});

 private:
  const Network& net_;
  SamplerConfig config_;
  Coloring coloring_;
};

// Convenience wrapper: minibatches over an in-memory matrix.
RunResult run_sampler(const Network& net, const DataMatrix& data, const SamplerConfig& config,
                      const CptSet* truth = nullptr, const PassCallback& on_pass = {});

}  // namespace samegibbs
