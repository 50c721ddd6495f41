#include "samegibbs/sampler.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <sstream>

#include "kernels.hpp"
#include "samegibbs/error.hpp"
#include "samegibbs/metrics.hpp"
#include "samegibbs/rng.hpp"

namespace samegibbs {
namespace {

constexpr std::size_t kSweepChunk = 256;   // replica-cases per sampling task
constexpr std::size_t kTallyChunk = 2048;  // replica-cases per count buffer

inline std::uint32_t lo32(std::size_t x) { return static_cast<std::uint32_t>(x); }
inline std::uint32_t hi32(std::size_t x) { return static_cast<std::uint32_t>(static_cast<std::uint64_t>(x) >> 32); }

int thread_count(std::size_t requested) {
  return requested == 0 ? omp_get_max_threads() : static_cast<int>(requested);
}

void init_replica(const Network& net, const Minibatch& mb, ReplicatedMinibatch& rep, std::size_t r,
                  std::uint64_t key) {
  const std::size_t n = mb.num_vars;
  for (std::size_t c = 0; c < mb.capacity; ++c) {
    auto assignment = rep.assignment(r, c);
    const auto observed = mb.case_cells(c);
    const std::size_t global = mb.first_case + c;
    for (std::size_t v = 0; v < n; ++v) {
      if (observed[v] != kMissing) {
        assignment[v] = observed[v];
      } else if (c < mb.num_cases) {
        const double u = uniform_at(key, lo32(global), hi32(global), lo32(r), lo32(v));
        assignment[v] = static_cast<State>(u * static_cast<double>(net.cardinality(v)));
      } else {
        assignment[v] = 0;
      }
    }
  }
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

SameSchedule::SameSchedule(std::vector<SameSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw Error(ErrorCode::invalid_config, "SAME schedule is empty");
  for (const auto& s : segments_) {
    if (s.m == 0) throw Error(ErrorCode::invalid_config, "SAME replication m must be at least 1");
    if (s.passes == 0) throw Error(ErrorCode::invalid_config, "SAME schedule segment with zero passes");
  }
}

SameSchedule SameSchedule::parse(const std::string& text) {
  std::vector<SameSegment> segments;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](std::string_view s) {
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
      throw Error(ErrorCode::invalid_config, "bad SAME schedule '" + text + "'");
    }
    return value;
  };
  if (text.empty() || text.back() == ',') {
    throw Error(ErrorCode::invalid_config, "bad SAME schedule '" + text + "'");
  }
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) {
      segments.push_back({number(item), 1});
    } else {
      segments.push_back({number(std::string_view(item).substr(0, x)),
                          number(std::string_view(item).substr(x + 1))});
    }
  }
  return SameSchedule(std::move(segments));
}

std::size_t SameSchedule::m_for_pass(std::size_t pass) const {
  for (const auto& s : segments_) {
    if (pass < s.passes) return s.m;
    pass -= s.passes;
  }
  return segments_.back().m;
}

std::size_t SameSchedule::max_m() const {
  std::size_t m = 0;
  for (const auto& s : segments_) m = std::max(m, s.m);
  return m;
}

std::string SameSchedule::to_string() const {
  if (segments_.size() == 1) return std::to_string(segments_.front().m);
  std::string out;
  for (const auto& s : segments_) {
    if (!out.empty()) out += ',';
    out += std::to_string(s.m) + "x" + std::to_string(s.passes);
  }
  return out;
}

void SamplerConfig::validate(std::size_t num_vars) const {
  if (minibatch_size == 0) throw Error(ErrorCode::invalid_config, "minibatch size must be at least 1");
  if (sweeps_per_minibatch == 0) throw Error(ErrorCode::invalid_config, "sweeps per minibatch must be at least 1");
  if (!(exp_decay > 0.0 && exp_decay <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "exponential decay must be in (0, 1]");
  }
  prior.validate(num_vars);
  SameSchedule check(std::vector<SameSegment>(same.segments().begin(), same.segments().end()));
  (void)check;
}

ReplicatedMinibatch replicate_minibatch(const Network& net, const Minibatch& mb, std::size_t m,
                                        std::uint64_t key) {
  if (m == 0) throw Error(ErrorCode::invalid_config, "SAME replication m must be at least 1");
  ReplicatedMinibatch rep;
  rep.source = &mb;
  rep.replicas = m;
  rep.states.resize(m * mb.capacity * mb.num_vars);
  for (std::size_t r = 0; r < m; ++r) init_replica(net, mb, rep, r, key);
  return rep;
}

void resize_replicas(const Network& net, ReplicatedMinibatch& rep, const Minibatch& mb, std::size_t m,
                     std::uint64_t key) {
  if (m == 0) throw Error(ErrorCode::invalid_config, "SAME replication m must be at least 1");
  const std::size_t old = rep.replicas;
  rep.source = &mb;
  rep.states.resize(m * mb.capacity * mb.num_vars);
  rep.replicas = m;
  for (std::size_t r = old; r < m; ++r) init_replica(net, mb, rep, r, key);
}

void resample_latent(const Network& net, const Coloring& coloring, const CptSet& cpts,
                     ReplicatedMinibatch& rep, std::uint64_t key, std::size_t threads, SweepProbe* probe) {
  const Minibatch& mb = *rep.source;
  const std::size_t n = mb.num_vars;
  const std::size_t real = mb.num_cases;
  const std::size_t units = rep.replicas * real;
  if (units == 0) return;
  const std::size_t chunks = (units + kSweepChunk - 1) / kSweepChunk;
  std::size_t max_card = 0;
  for (std::size_t v = 0; v < n; ++v) max_card = std::max(max_card, net.cardinality(v));
  if (probe != nullptr && probe->visits.size() != rep.states.size()) probe->visits.assign(rep.states.size(), 0);

  std::atomic<bool> failed{false};
  std::atomic<std::size_t> failed_var{0};
  const int nthreads = thread_count(threads);

  for (std::size_t g = 0; g < coloring.groups.size(); ++g) {
    const auto& group = coloring.groups[g];
    if (probe != nullptr) probe->group_order.push_back(g);
#pragma omp parallel num_threads(nthreads) if (chunks > 1)
    {
      std::vector<double> weights(max_card);
#pragma omp for schedule(static)
      for (std::size_t k = 0; k < chunks; ++k) {
        const std::size_t end = std::min(units, (k + 1) * kSweepChunk);
        for (std::size_t unit = k * kSweepChunk; unit < end; ++unit) {
          const std::size_t r = unit / real;
          const std::size_t c = unit % real;
          const std::size_t global = mb.first_case + c;
          const auto observed = mb.case_cells(c);
          auto assignment = rep.assignment(r, c);
          for (VarIndex v : group) {
            if (observed[v] != kMissing) continue;
            const double total =
                detail::conditional_weights(net, cpts, v, std::span<const State>(assignment), weights.data());
            if (!(total > 0.0)) {
              failed_var.store(v);
              failed.store(true);
              continue;
            }
            const double u = uniform_at(key, lo32(global), hi32(global), lo32(r), lo32(v));
            assignment[v] = detail::draw_state(weights.data(), net.cardinality(v), total, u);
            if (probe != nullptr) ++probe->visits[(r * mb.capacity + c) * n + v];
          }
        }
      }
    }
    if (failed.load()) {
      throw Error(ErrorCode::zero_support,
                  "full conditional of variable " + std::to_string(failed_var.load()) + " has no support");
    }
  }
}

CountSet tally_counts(const Network& net, const ReplicatedMinibatch& rep, std::size_t threads) {
  const Minibatch& mb = *rep.source;
  const std::size_t real = mb.num_cases;
  const std::size_t units = rep.replicas * real;
  const TableShape shape(net);
  const std::size_t chunks = (units + kTallyChunk - 1) / kTallyChunk;
  std::vector<CountSet> partial(chunks, CountSet(shape));
#pragma omp parallel for schedule(static) num_threads(thread_count(threads)) if (chunks > 1)
  for (std::size_t k = 0; k < chunks; ++k) {
    const std::size_t end = std::min(units, (k + 1) * kTallyChunk);
    for (std::size_t unit = k * kTallyChunk; unit < end; ++unit) {
      const std::size_t c = unit % real;
      const double w = mb.weights[c];
      if (w == 0.0) continue;
      accumulate_counts(net, rep.assignment(unit / real, c), partial[k], w);
    }
  }
  CountSet total(shape);
  auto out = total.values();
  for (const CountSet& p : partial) {
    const auto in = p.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
  }
  return total;
}

CountSet sweep(const Network& net, const Coloring& coloring, const CptSet& cpts, ReplicatedMinibatch& rep,
               std::uint64_t key, std::size_t threads, SweepProbe* probe) {
  resample_latent(net, coloring, cpts, rep, key, threads, probe);
  return tally_counts(net, rep, threads);
}

CountAccumulator::CountAccumulator(TableShape shape, AccumulatorMode mode)
    : shape_(std::move(shape)), mode_(mode), total_(shape_) {}

std::size_t CountAccumulator::stored_minibatches() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(per_minibatch_.begin(), per_minibatch_.end(), [](const auto& c) { return c.has_value(); }));
}

const CountSet* CountAccumulator::minibatch_counts(std::size_t mb_id) const {
  if (mb_id >= per_minibatch_.size() || !per_minibatch_[mb_id]) return nullptr;
  return &*per_minibatch_[mb_id];
}

void CountAccumulator::update_moving_sum(std::size_t mb_id, const CountSet& counts) {
  if (!(counts.shape() == shape_)) throw Error(ErrorCode::shape_mismatch, "counts do not fit accumulator");
  if (mode_ != AccumulatorMode::moving_sum) {
    throw Error(ErrorCode::invalid_config, "moving-sum update on an exponential accumulator");
  }
  if (mb_id >= per_minibatch_.size()) per_minibatch_.resize(mb_id + 1);
  auto total = total_.values();
  if (per_minibatch_[mb_id]) {
    const auto old = per_minibatch_[mb_id]->values();
    for (std::size_t i = 0; i < total.size(); ++i) total[i] -= old[i];
  }
  const auto add = counts.values();
  for (std::size_t i = 0; i < total.size(); ++i) total[i] += add[i];
  per_minibatch_[mb_id] = counts;
}

void CountAccumulator::update_exponential(const CountSet& counts, double decay) {
  if (!(counts.shape() == shape_)) throw Error(ErrorCode::shape_mismatch, "counts do not fit accumulator");
  if (!(decay > 0.0 && decay <= 1.0)) throw Error(ErrorCode::invalid_config, "exponential decay must be in (0, 1]");
  auto total = total_.values();
  const auto add = counts.values();
  for (std::size_t i = 0; i < total.size(); ++i) total[i] = decay * total[i] + add[i];
}

std::size_t CountAccumulator::bytes() const noexcept {
  std::size_t b = total_.bytes() + per_minibatch_.capacity() * sizeof(std::optional<CountSet>);
  for (const auto& c : per_minibatch_)
    if (c) b += c->bytes();
  return b;
}

std::string trace_to_csv(const Trace& trace) {
  std::string out = "pass,seconds,kl_avg,vars_per_sec\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.pass);
    out += ',';
    out += format_double(r.seconds);
    out += ',';
    out += r.kl_avg ? format_double(*r.kl_avg) : "nan";
    out += ',';
    out += r.vars_per_sec ? format_double(*r.vars_per_sec) : "nan";
    out += '\n';
  }
  return out;
}

SameGibbsSampler::SameGibbsSampler(const Network& net, SamplerConfig config)
    : net_(net), config_(std::move(config)) {
  config_.validate(net_.num_vars());
  coloring_ = color_graph(moralize(net_), derive_key(config_.seed, "coloring"));
}

RunResult SameGibbsSampler::run(MinibatchSource& data, const CptSet* truth, const PassCallback& on_pass) {
  using Clock = std::chrono::steady_clock;
  const std::size_t n = net_.num_vars();
  if (data.num_vars() != n) {
    throw Error(ErrorCode::dimension_mismatch, "data has " + std::to_string(data.num_vars()) +
                                                   " variables, network has " + std::to_string(n));
  }
  const TableShape shape(net_);
  if (truth != nullptr && !(truth->shape() == shape)) {
    throw Error(ErrorCode::shape_mismatch, "truth CPTs do not fit the network");
  }

  const std::uint64_t seed = config_.seed;
  const bool persist = config_.persists_latent();
  RunResult result{init_cpts(net_, derive_key(seed, "init")), {}, {}};
  CountAccumulator counts(shape, config_.accumulator);
  std::vector<std::vector<State>> latent_store;
  std::vector<std::size_t> latent_replicas;
  Minibatch mb;
  ReplicatedMinibatch rep;
  std::size_t working_bytes = 0;

  const auto start = Clock::now();
  for (std::size_t pass = 0; pass < config_.num_passes; ++pass) {
    const auto pass_start = Clock::now();
    const std::size_t m = anneal_m(config_.same, pass);
    std::uint64_t vars_sampled = 0;
    std::size_t mb_id = 0;
    data.rewind();
    while (data.next(mb)) {
      if (mb.num_vars != n) throw Error(ErrorCode::dimension_mismatch, "minibatch variable count mismatch");
      for (std::size_t c = 0; c < mb.num_cases; ++c) {
        const auto cells = mb.case_cells(c);
        for (std::size_t v = 0; v < n; ++v) {
          if (cells[v] != kMissing && cells[v] >= net_.cardinality(v)) {
            throw Error(ErrorCode::dimension_mismatch,
                        "state " + std::to_string(cells[v]) + " of variable " + std::to_string(v) +
                            " in case " + std::to_string(mb.first_case + c) + " exceeds cardinality");
          }
        }
      }

      const std::uint64_t init_key = derive_key(seed, "latent-init", {pass, mb_id});
      if (persist && mb_id < latent_store.size() && !latent_store[mb_id].empty()) {
        rep.source = &mb;
        rep.states = std::move(latent_store[mb_id]);
        rep.replicas = latent_replicas[mb_id];
        if (rep.replicas != m) resize_replicas(net_, rep, mb, m, init_key);
      } else {
        rep = replicate_minibatch(net_, mb, m, init_key);
      }

      for (std::size_t s = 0; s < config_.sweeps_per_minibatch; ++s) {
        resample_latent(net_, coloring_, result.cpts, rep, derive_key(seed, "sweep", {pass, mb_id, s}),
                        config_.threads);
      }
      const CountSet fresh = tally_counts(net_, rep, config_.threads);
      if (config_.accumulator == AccumulatorMode::moving_sum) {
        counts.update_moving_sum(mb_id, fresh);
      } else {
        counts.update_exponential(fresh, config_.exp_decay);
      }
      result.cpts = config_.map_estimate
                        ? posterior_mean_cpts(counts.total(), config_.prior)
                        : sample_cpts(counts.total(), config_.prior, derive_key(seed, "cpt", {pass, mb_id}));

      vars_sampled += static_cast<std::uint64_t>(n) * mb.num_cases * m * config_.sweeps_per_minibatch;
      working_bytes = std::max(working_bytes, mb.bytes() + rep.states.capacity() * sizeof(State));
      if (persist) {
        if (mb_id >= latent_store.size()) {
          latent_store.resize(mb_id + 1);
          latent_replicas.resize(mb_id + 1, 0);
        }
        latent_store[mb_id] = std::move(rep.states);
        latent_replicas[mb_id] = rep.replicas;
        rep.states = {};
      }
      ++mb_id;
    }
    if (mb_id == 0) throw Error(ErrorCode::empty_data, "data source produced no cases");

    TraceRecord record;
    record.pass = pass + 1;
    const auto now = Clock::now();
    record.seconds = std::chrono::duration<double>(now - start).count();
    record.pass_seconds = std::chrono::duration<double>(now - pass_start).count();
    record.vars_sampled = vars_sampled;
    if (record.pass_seconds > 0.0) record.vars_per_sec = static_cast<double>(vars_sampled) / record.pass_seconds;
    if (truth != nullptr) record.kl_avg = kl_avg(*truth, result.cpts);
    result.trace.records.push_back(record);
    if (on_pass) on_pass(pass + 1, result.cpts);
  }

  result.memory.model_bytes = result.cpts.bytes();
  result.memory.accumulator_bytes = counts.bytes();
  for (const auto& s : latent_store) result.memory.latent_bytes += s.capacity() * sizeof(State);
  result.memory.working_bytes = working_bytes;
  return result;
}

RunResult run_sampler(const Network& net, const DataMatrix& data, const SamplerConfig& config,
                      const CptSet* truth, const PassCallback& on_pass) {
  data.validate_against(net);
  MatrixMinibatchSource source(data, config.minibatch_size);
  SameGibbsSampler sampler(net, config);
  return sampler.run(source, truth, on_pass);
}

}  // namespace samegibbs
