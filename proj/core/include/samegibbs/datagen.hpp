#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "samegibbs/data.hpp"
#include "samegibbs/model.hpp"
#include "samegibbs/network.hpp"

namespace samegibbs {

// Complete cases drawn variable by variable in topological order.
DataMatrix forward_sample(const Network& net, const CptSet& cpts, std::size_t num_cases,
                          std::uint64_t seed);

// Drops each present entry independently with probability hide_fraction.
// Throws Error{invalid_config} unless hide_fraction is in [0, 1].
DataMatrix mask(const DataMatrix& data, double hide_fraction, std::uint64_t seed);

// Tiles the cases `times` times; copy j of case c becomes case j * cases + c.
DataMatrix replicate(const DataMatrix& data, std::size_t times);

struct TrainTestSplit {
  DataMatrix train;
  DataMatrix test;
};

// Partitions present entries (not cases): each goes to train with
// probability train_fraction. Throws Error{invalid_config} unless the
// fraction is in (0, 1).
TrainTestSplit train_test_split(const DataMatrix& data, double train_fraction, std::uint64_t seed);

// Random DAG over `num_vars` variables with at most `max_parents` parents per
// node, drawn from earlier indices. Used for synthetic experiments.
Network random_network(std::size_t num_vars, std::size_t max_parents, std::size_t max_cardinality,
                       std::uint64_t seed, double edge_probability = 0.5);

}  // namespace samegibbs
