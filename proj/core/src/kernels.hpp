#pragma once

// Inner loops shared by the model and sampler translation units.

#include <cstddef>
#include <span>

#include "samegibbs/model.hpp"
#include "samegibbs/network.hpp"
#include "samegibbs/rng.hpp"

namespace samegibbs::detail {

// Row of `child`'s CPT with `skip` (a parent of child) contributing 0.
inline std::size_t row_without(const Network& net, VarIndex child, VarIndex skip,
                               std::span<const State> assignment) {
  std::size_t row = 0;
  const auto ps = net.parents(child);
  const auto st = net.parent_strides(child);
  for (std::size_t k = 0; k < ps.size(); ++k)
    if (ps[k] != skip) row += static_cast<std::size_t>(assignment[ps[k]]) * st[k];
  return row;
}

// Unnormalized full conditional of v; returns the total weight.
inline double conditional_weights(const Network& net, const CptSet& cpts, VarIndex v,
                                  std::span<const State> assignment, double* out) {
  const std::size_t card = net.cardinality(v);
  const auto own = cpts.row(v, row_without(net, v, v, assignment));
  for (std::size_t s = 0; s < card; ++s) out[s] = own[s];
  for (const ChildLink& link : net.child_links(v)) {
    const std::size_t base = row_without(net, link.child, v, assignment);
    const std::size_t child_card = net.cardinality(link.child);
    const State child_state = assignment[link.child];
    const double* table = cpts.table(link.child).data() + child_state;
    for (std::size_t s = 0; s < card; ++s) out[s] *= table[(base + s * link.stride) * child_card];
  }
  double total = 0.0;
  for (std::size_t s = 0; s < card; ++s) total += out[s];
  return total;
}

// Inverse-CDF draw from unnormalized weights with total `total`.
inline State draw_state(const double* weights, std::size_t card, double total, double u) {
  double target = u * total;
  for (std::size_t s = 0; s + 1 < card; ++s) {
    target -= weights[s];
    if (target < 0.0) return static_cast<State>(s);
  }
  // Walk back over trailing zero-weight states left by rounding.
  std::size_t s = card - 1;
  while (s > 0 && weights[s] == 0.0) --s;
  return static_cast<State>(s);
}

}  // namespace samegibbs::detail
