#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace samegibbs {

using VarIndex = std::size_t;

struct Edge {
  VarIndex parent;
  VarIndex child;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Link from a variable to one of its children, with the stride the variable
// contributes to the child's parent-configuration index.
struct ChildLink {
  VarIndex child;
  std::size_t stride;
};

// A validated DAG of discrete variables.
//
// Parent lists are stored in ascending index order. A CPT row for variable v
// is addressed by the mixed-radix index over its parents in that order, with
// the last (highest-index) parent varying fastest.
class Network {
 public:
  // Throws Error{invalid_index, duplicate_edge, cardinality_too_small,
  // cycle_detected}.
  static Network build(std::vector<std::size_t> cardinalities, std::span<const Edge> edges);

  std::size_t num_vars() const noexcept { return cardinalities_.size(); }
  std::size_t cardinality(VarIndex v) const { return cardinalities_[v]; }
  std::span<const std::size_t> cardinalities() const noexcept { return cardinalities_; }
  std::span<const VarIndex> parents(VarIndex v) const { return parents_[v]; }
  std::span<const std::size_t> parent_strides(VarIndex v) const { return parent_strides_[v]; }
  std::span<const ChildLink> child_links(VarIndex v) const { return child_links_[v]; }
  std::span<const VarIndex> topo_order() const noexcept { return topo_order_; }

  // Number of CPT rows of v: product of parent cardinalities (1 for roots).
  std::size_t num_parent_configs(VarIndex v) const { return num_configs_[v]; }

  // Edges sorted by (child, parent).
  std::vector<Edge> edges() const;

  // Row of v's CPT selected by the parent states in `assignment`.
  template <typename StateT>
  std::size_t parent_config(VarIndex v, std::span<const StateT> assignment) const {
    std::size_t row = 0;
    const auto& ps = parents_[v];
    const auto& st = parent_strides_[v];
    for (std::size_t k = 0; k < ps.size(); ++k) row += static_cast<std::size_t>(assignment[ps[k]]) * st[k];
    return row;
  }

 private:
  std::vector<std::size_t> cardinalities_;
  std::vector<std::vector<VarIndex>> parents_;
  std::vector<std::vector<std::size_t>> parent_strides_;
  std::vector<std::vector<ChildLink>> child_links_;
  std::vector<std::size_t> num_configs_;
  std::vector<VarIndex> topo_order_;
};

// All u with v among u's parents, ascending. Throws Error{invalid_index}.
std::vector<VarIndex> children_of(const Network& net, VarIndex v);

// Undirected graph with sorted, duplicate-free neighbor lists.
class MoralGraph {
 public:
  MoralGraph() = default;
  MoralGraph(std::size_t num_vars, std::span<const std::pair<VarIndex, VarIndex>> edges);

  std::size_t num_vars() const noexcept { return adjacency_.size(); }
  std::span<const VarIndex> neighbors(VarIndex v) const { return adjacency_[v]; }
  std::size_t degree(VarIndex v) const { return adjacency_[v].size(); }
  std::size_t max_degree() const noexcept;
  bool has_edge(VarIndex u, VarIndex v) const;

  // Each undirected edge once, as (low, high), sorted.
  std::vector<std::pair<VarIndex, VarIndex>> edges() const;

 private:
  std::vector<std::vector<VarIndex>> adjacency_;
};

// Parent-child edges plus co-parent completions, orientation dropped.
MoralGraph moralize(const Network& net);

struct Coloring {
  std::vector<std::uint32_t> colors;         // per variable, in [0, num_colors)
  std::size_t num_colors = 0;
  std::vector<std::vector<VarIndex>> groups;  // groups[c] = variables of color c, ascending

  bool is_proper(const MoralGraph& g) const;
};

// Balanced greedy coloring: vertices in order of decreasing degree (ties by
// index); each takes the admissible color with the smallest class so far (ties
// by color id), opening a new color only when none is admissible. Uses at most
// max_degree + 1 colors. The result depends only on the graph; `seed` is part
// of the signature so randomized heuristics can be swapped in.
Coloring color_graph(const MoralGraph& g, std::uint64_t seed = 0);

}  // namespace samegibbs
