#include "samegibbs/network.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "samegibbs/error.hpp"

namespace samegibbs {

Network Network::build(std::vector<std::size_t> cardinalities, std::span<const Edge> edges) {
  const std::size_t n = cardinalities.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (cardinalities[v] < 2) {
      throw Error(ErrorCode::cardinality_too_small,
                  "variable " + std::to_string(v) + " has cardinality " +
                      std::to_string(cardinalities[v]));
    }
  }

  Network net;
  net.cardinalities_ = std::move(cardinalities);
  net.parents_.assign(n, {});
  for (const Edge& e : edges) {
    if (e.parent >= n || e.child >= n) {
      throw Error(ErrorCode::invalid_index, "edge (" + std::to_string(e.parent) + ", " +
                                                std::to_string(e.child) + ") with " +
                                                std::to_string(n) + " variables");
    }
    if (e.parent == e.child) {
      throw Error(ErrorCode::cycle_detected, "self loop on variable " + std::to_string(e.parent));
    }
    net.parents_[e.child].push_back(e.parent);
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto& ps = net.parents_[v];
    std::sort(ps.begin(), ps.end());
    if (auto dup = std::adjacent_find(ps.begin(), ps.end()); dup != ps.end()) {
      throw Error(ErrorCode::duplicate_edge,
                  "edge (" + std::to_string(*dup) + ", " + std::to_string(v) + ") repeated");
    }
  }

  // Kahn's algorithm, smallest ready index first.
  std::vector<std::vector<VarIndex>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    indegree[v] = net.parents_[v].size();
    for (VarIndex p : net.parents_[v]) children[p].push_back(v);
  }
  std::priority_queue<VarIndex, std::vector<VarIndex>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  while (!ready.empty()) {
    const VarIndex v = ready.top();
    ready.pop();
    net.topo_order_.push_back(v);
    for (VarIndex c : children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  if (net.topo_order_.size() != n) throw Error(ErrorCode::cycle_detected, "edge set contains a cycle");

  net.parent_strides_.assign(n, {});
  net.num_configs_.assign(n, 1);
  net.child_links_.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    const auto& ps = net.parents_[v];
    auto& strides = net.parent_strides_[v];
    strides.assign(ps.size(), 1);
    std::size_t stride = 1;
    for (std::size_t k = ps.size(); k-- > 0;) {
      strides[k] = stride;
      stride *= net.cardinalities_[ps[k]];
    }
    net.num_configs_[v] = stride;
    for (std::size_t k = 0; k < ps.size(); ++k) net.child_links_[ps[k]].push_back({v, strides[k]});
  }
  return net;
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  for (std::size_t v = 0; v < num_vars(); ++v)
    for (VarIndex p : parents_[v]) out.push_back({p, v});
  return out;
}

std::vector<VarIndex> children_of(const Network& net, VarIndex v) {
  if (v >= net.num_vars()) {
    throw Error(ErrorCode::invalid_index, "variable " + std::to_string(v) + " out of range");
  }
  std::vector<VarIndex> out;
  for (const ChildLink& link : net.child_links(v)) out.push_back(link.child);
  std::sort(out.begin(), out.end());
  return out;
}

MoralGraph::MoralGraph(std::size_t num_vars, std::span<const std::pair<VarIndex, VarIndex>> edges)
    : adjacency_(num_vars) {
  for (auto [u, v] : edges) {
    if (u >= num_vars || v >= num_vars) throw Error(ErrorCode::invalid_index, "moral edge out of range");
    if (u == v) continue;
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

std::size_t MoralGraph::max_degree() const noexcept {
  std::size_t d = 0;
  for (const auto& nbrs : adjacency_) d = std::max(d, nbrs.size());
  return d;
}

bool MoralGraph::has_edge(VarIndex u, VarIndex v) const {
  if (u >= num_vars() || v >= num_vars()) return false;
  return std::binary_search(adjacency_[u].begin(), adjacency_[u].end(), v);
}

std::vector<std::pair<VarIndex, VarIndex>> MoralGraph::edges() const {
  std::vector<std::pair<VarIndex, VarIndex>> out;
  for (std::size_t u = 0; u < num_vars(); ++u)
    for (VarIndex v : adjacency_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

MoralGraph moralize(const Network& net) {
  std::vector<std::pair<VarIndex, VarIndex>> edges;
  for (std::size_t v = 0; v < net.num_vars(); ++v) {
    const auto ps = net.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      edges.emplace_back(ps[i], v);
      for (std::size_t j = i + 1; j < ps.size(); ++j) edges.emplace_back(ps[i], ps[j]);
    }
  }
  return MoralGraph(net.num_vars(), edges);
}

bool Coloring::is_proper(const MoralGraph& g) const {
  if (colors.size() != g.num_vars()) return false;
  for (std::size_t v = 0; v < colors.size(); ++v) {
    if (colors[v] >= num_colors) return false;
    for (VarIndex u : g.neighbors(v))
      if (colors[u] == colors[v]) return false;
  }
  return true;
}

Coloring color_graph(const MoralGraph& g, std::uint64_t /*seed*/) {
  const std::size_t n = g.num_vars();
  std::vector<VarIndex> order(n);
  std::iota(order.begin(), order.end(), VarIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](VarIndex a, VarIndex b) { return g.degree(a) > g.degree(b); });

  constexpr std::uint32_t kUncolored = ~std::uint32_t{0};
  Coloring out;
  out.colors.assign(n, kUncolored);
  std::vector<std::size_t> class_size;
  std::vector<char> blocked;
  for (VarIndex v : order) {
    blocked.assign(class_size.size(), 0);
    for (VarIndex u : g.neighbors(v))
      if (out.colors[u] != kUncolored) blocked[out.colors[u]] = 1;
    std::uint32_t best = kUncolored;
    for (std::uint32_t c = 0; c < class_size.size(); ++c) {
      if (blocked[c]) continue;
      if (best == kUncolored || class_size[c] < class_size[best]) best = c;
    }
    if (best == kUncolored) {
      best = static_cast<std::uint32_t>(class_size.size());
      class_size.push_back(0);
    }
    out.colors[v] = best;
    ++class_size[best];
  }
  out.num_colors = class_size.size();
  out.groups.assign(out.num_colors, {});
  for (std::size_t v = 0; v < n; ++v) out.groups[out.colors[v]].push_back(v);
  return out;
}

}  // namespace samegibbs
