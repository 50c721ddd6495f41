#include "samegibbs/datagen.hpp"

#include <algorithm>
#include <string>

#include "kernels.hpp"
#include "samegibbs/error.hpp"
#include "samegibbs/rng.hpp"

namespace samegibbs {
namespace {

inline std::uint32_t lo32(std::size_t x) { return static_cast<std::uint32_t>(x); }
inline std::uint32_t hi32(std::size_t x) { return static_cast<std::uint32_t>(static_cast<std::uint64_t>(x) >> 32); }

}  // namespace

DataMatrix forward_sample(const Network& net, const CptSet& cpts, std::size_t num_cases,
                          std::uint64_t seed) {
  if (!(cpts.shape() == TableShape(net))) throw Error(ErrorCode::shape_mismatch, "CPTs do not fit network");
  const std::uint64_t key = derive_key(seed, "forward-sample");
  const std::size_t n = net.num_vars();
  std::vector<Entry> entries;
  entries.reserve(n * num_cases);
  std::vector<State> assignment(n);
  for (std::size_t c = 0; c < num_cases; ++c) {
    for (VarIndex v : net.topo_order()) {
      const auto row = cpts.row(v, net.parent_config(v, std::span<const State>(assignment)));
      const double u = uniform_at(key, lo32(c), hi32(c), lo32(v), 0);
      assignment[v] = detail::draw_state(row.data(), row.size(), 1.0, u);
    }
    for (std::size_t v = 0; v < n; ++v) entries.push_back({v, c, assignment[v]});
  }
  return DataMatrix(n, num_cases, std::move(entries));
}

DataMatrix mask(const DataMatrix& data, double hide_fraction, std::uint64_t seed) {
  if (!(hide_fraction >= 0.0 && hide_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "hide fraction must be in [0, 1]");
  }
  const std::uint64_t key = derive_key(seed, "mask");
  std::vector<Entry> kept;
  kept.reserve(static_cast<std::size_t>(static_cast<double>(data.nnz()) * (1.0 - hide_fraction)) + 16);
  for (const Entry& e : data.entries()) {
    const double u = uniform_at(key, lo32(e.case_index), hi32(e.case_index), lo32(e.var), 0);
    if (u >= hide_fraction) kept.push_back(e);
  }
  return DataMatrix(data.num_vars(), data.num_cases(), std::move(kept));
}

DataMatrix replicate(const DataMatrix& data, std::size_t times) {
  if (times == 0) throw Error(ErrorCode::invalid_config, "replication count must be at least 1");
  std::vector<Entry> entries;
  entries.reserve(data.nnz() * times);
  for (std::size_t j = 0; j < times; ++j)
    for (const Entry& e : data.entries())
      entries.push_back({e.var, j * data.num_cases() + e.case_index, e.state});
  return DataMatrix(data.num_vars(), data.num_cases() * times, std::move(entries));
}

TrainTestSplit train_test_split(const DataMatrix& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_config, "train fraction must be in (0, 1)");
  }
  const std::uint64_t key = derive_key(seed, "train-test-split");
  std::vector<Entry> train, test;
  for (const Entry& e : data.entries()) {
    const double u = uniform_at(key, lo32(e.case_index), hi32(e.case_index), lo32(e.var), 0);
    (u < train_fraction ? train : test).push_back(e);
  }
  return {DataMatrix(data.num_vars(), data.num_cases(), std::move(train)),
          DataMatrix(data.num_vars(), data.num_cases(), std::move(test))};
}

Network random_network(std::size_t num_vars, std::size_t max_parents, std::size_t max_cardinality,
                       std::uint64_t seed, double edge_probability) {
  CounterRng rng(derive_key(seed, "random-network"), 0);
  std::vector<std::size_t> cards(num_vars);
  for (auto& k : cards) k = 2 + rng.next_u32() % (std::max<std::size_t>(max_cardinality, 2) - 1);
  std::vector<Edge> edges;
  std::vector<VarIndex> candidates;
  for (std::size_t v = 1; v < num_vars; ++v) {
    candidates.resize(v);
    for (std::size_t u = 0; u < v; ++u) candidates[u] = u;
    // partial Fisher-Yates
    std::size_t taken = 0;
    for (std::size_t i = 0; i < candidates.size() && taken < max_parents; ++i) {
      const std::size_t j = i + rng.next_u32() % (candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      if (rng.uniform() < edge_probability) {
        edges.push_back({candidates[i], v});
        ++taken;
      }
    }
  }
  return Network::build(std::move(cards), edges);
}

}  // namespace samegibbs
