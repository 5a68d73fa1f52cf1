#include "mcembed/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mcembed {

namespace {

bool nearly_equal(double a, double b) {
  if (a == b) return true;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-12 * scale;
}

double link_weight_at(LinkWeights weight, LinkId l) { return weight[static_cast<std::size_t>(l)]; }

// Walks from src towards dst choosing, at every step, the smallest-id
// neighbour that still lies on a shortest path (according to `to_dst`).
std::optional<Path> lexicographic_path(const SubstrateNetwork& net, NodeId src, NodeId dst,
                                       LinkWeights weight, const std::vector<double>& to_dst) {
  Path path;
  if (!std::isfinite(to_dst[static_cast<std::size_t>(src)])) return std::nullopt;
  std::vector<bool> visited(net.node_count(), false);
  NodeId u = src;
  visited[static_cast<std::size_t>(u)] = true;
  while (u != dst) {
    const double here = to_dst[static_cast<std::size_t>(u)];
    bool advanced = false;
    for (LinkId l : net.out_links(u)) {
      const double w = link_weight_at(weight, l);
      if (!std::isfinite(w)) continue;
      const NodeId v = net.link(l).head;
      if (visited[static_cast<std::size_t>(v)]) continue;
      const double there = to_dst[static_cast<std::size_t>(v)];
      if (!std::isfinite(there)) continue;
      if (nearly_equal(w + there, here)) {
        path.links.push_back(l);
        path.weight += w;
        visited[static_cast<std::size_t>(v)] = true;
        u = v;
        advanced = true;
        break;
      }
    }
    if (!advanced) return std::nullopt;
  }
  return path;
}

std::string unreachable_message(NodeId a, NodeId b) {
  std::ostringstream msg;
  msg << "no path from node " << a << " to node " << b;
  return msg.str();
}

}  // namespace

std::vector<NodeId> path_nodes(const SubstrateNetwork& net, NodeId src, std::span<const LinkId> links) {
  std::vector<NodeId> out{src};
  for (LinkId l : links) out.push_back(net.link(l).head);
  return out;
}

std::vector<double> dijkstra(const SubstrateNetwork& net, NodeId src, LinkWeights weight, bool reverse) {
  if (weight.size() != net.link_count()) throw std::invalid_argument("weight vector size mismatch");
  std::vector<double> dist(net.node_count(), kInfinity);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(src)] = 0.0;
  heap.emplace(0.0, src);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (LinkId l : reverse ? net.in_links(u) : net.out_links(u)) {
      const double w = link_weight_at(weight, l);
      if (!std::isfinite(w)) continue;
      if (w < 0.0) throw std::invalid_argument("negative link weight");
      const NodeId v = reverse ? net.link(l).tail : net.link(l).head;
      const double nd = d + w;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

Outcome<Path> shortest_path(const SubstrateNetwork& net, NodeId src, NodeId dst, LinkWeights weight) {
  if (!net.has_node(src) || !net.has_node(dst)) throw std::invalid_argument("unknown endpoint");
  if (src == dst) return Path{};
  const auto to_dst = dijkstra(net, dst, weight, /*reverse=*/true);
  auto p = lexicographic_path(net, src, dst, weight, to_dst);
  if (!p) return fail(FailureKind::Unreachable, unreachable_message(src, dst));
  return std::move(*p);
}

const std::vector<double>& DistanceCache::from(NodeId src) {
  auto it = forward_.find(src);
  if (it == forward_.end()) it = forward_.emplace(src, dijkstra(net_, src, weight_, false)).first;
  return it->second;
}

const std::vector<double>& DistanceCache::to(NodeId dst) {
  auto it = reverse_.find(dst);
  if (it == reverse_.end()) it = reverse_.emplace(dst, dijkstra(net_, dst, weight_, true)).first;
  return it->second;
}

Outcome<Path> DistanceCache::path(NodeId src, NodeId dst) {
  if (src == dst) return Path{};
  auto p = lexicographic_path(net_, src, dst, weight_, to(dst));
  if (!p) return fail(FailureKind::Unreachable, unreachable_message(src, dst));
  return std::move(*p);
}

std::size_t MetricClosure::index_of(NodeId n) const {
  auto it = std::lower_bound(terminals.begin(), terminals.end(), n);
  if (it == terminals.end() || *it != n) throw std::out_of_range("node is not a closure terminal");
  return static_cast<std::size_t>(it - terminals.begin());
}

double MetricClosure::directed(NodeId a, NodeId b) const { return distance[index_of(a)][index_of(b)]; }

double MetricClosure::weight(NodeId a, NodeId b) const {
  return 0.5 * (directed(a, b) + directed(b, a));
}

const Path& MetricClosure::path(NodeId a, NodeId b) const { return paths[index_of(a)][index_of(b)]; }

std::vector<WeightedEdge> MetricClosure::edges() const {
  std::vector<WeightedEdge> out;
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    for (std::size_t j = i + 1; j < terminals.size(); ++j) {
      out.push_back({terminals[i], terminals[j], 0.5 * (distance[i][j] + distance[j][i])});
    }
  }
  return out;
}

Outcome<MetricClosure> metric_closure(DistanceCache& cache, std::span<const NodeId> terminals) {
  MetricClosure closure;
  closure.terminals.assign(terminals.begin(), terminals.end());
  std::sort(closure.terminals.begin(), closure.terminals.end());
  closure.terminals.erase(std::unique(closure.terminals.begin(), closure.terminals.end()),
                          closure.terminals.end());
  const std::size_t k = closure.terminals.size();
  closure.distance.assign(k, std::vector<double>(k, 0.0));
  closure.paths.assign(k, std::vector<Path>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const auto& dist = cache.from(closure.terminals[i]);
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const NodeId a = closure.terminals[i];
      const NodeId b = closure.terminals[j];
      if (!std::isfinite(dist[static_cast<std::size_t>(b)])) {
        return fail(FailureKind::Unreachable, unreachable_message(a, b));
      }
      auto p = cache.path(a, b);
      if (!p) return p.failure();
      closure.distance[i][j] = p->weight;
      closure.paths[i][j] = std::move(p).value();
    }
  }
  return closure;
}

Outcome<MetricClosure> metric_closure(const SubstrateNetwork& net, std::span<const NodeId> terminals,
                                      LinkWeights weight) {
  for (NodeId t : terminals) {
    if (!net.has_node(t)) throw std::invalid_argument("unknown terminal");
  }
  DistanceCache cache(net, weight);
  return metric_closure(cache, terminals);
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace

Outcome<std::vector<WeightedEdge>> mst(std::span<const int> vertices, std::vector<WeightedEdge> edges) {
  std::vector<int> verts(vertices.begin(), vertices.end());
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  auto index = [&](int v) -> std::size_t {
    auto it = std::lower_bound(verts.begin(), verts.end(), v);
    if (it == verts.end() || *it != v) throw std::invalid_argument("edge endpoint is not a vertex");
    return static_cast<std::size_t>(it - verts.begin());
  };
  for (auto& e : edges) {
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  DisjointSets sets(verts.size());
  std::vector<WeightedEdge> tree;
  for (const auto& e : edges) {
    if (e.u == e.v || !std::isfinite(e.weight)) continue;
    if (sets.unite(index(e.u), index(e.v))) tree.push_back(e);
  }
  if (!verts.empty() && tree.size() + 1 != verts.size()) {
    return fail(FailureKind::Unreachable, "spanning tree input is disconnected");
  }
  return tree;
}

namespace {

bool path_less(const SubstrateNetwork& net, NodeId src, const Path& a, const Path& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  return path_nodes(net, src, a.links) < path_nodes(net, src, b.links);
}

}  // namespace

std::vector<Path> k_shortest_paths(const SubstrateNetwork& net, NodeId src, NodeId dst,
                                   LinkWeights weight, std::size_t k) {
  std::vector<Path> accepted;
  if (k == 0 || src == dst) return accepted;
  auto first = shortest_path(net, src, dst, weight);
  if (!first) return accepted;
  accepted.push_back(std::move(first).value());

  std::vector<Path> candidates;
  std::vector<double> masked(weight.begin(), weight.end());
  while (accepted.size() < k) {
    const Path& last = accepted.back();
    const auto last_nodes = path_nodes(net, src, last.links);
    for (std::size_t i = 0; i + 1 < last_nodes.size(); ++i) {
      std::copy(weight.begin(), weight.end(), masked.begin());
      const NodeId spur = last_nodes[i];
      const std::span<const LinkId> root(last.links.data(), i);
      for (const auto& p : accepted) {
        if (p.links.size() > i && std::equal(root.begin(), root.end(), p.links.begin())) {
          masked[static_cast<std::size_t>(p.links[i])] = kInfinity;
        }
      }
      for (std::size_t r = 0; r < i; ++r) {
        const NodeId gone = last_nodes[r];
        for (LinkId l : net.out_links(gone)) masked[static_cast<std::size_t>(l)] = kInfinity;
        for (LinkId l : net.in_links(gone)) masked[static_cast<std::size_t>(l)] = kInfinity;
      }
      auto spur_path = shortest_path(net, spur, dst, masked);
      if (!spur_path) continue;
      Path total;
      total.links.assign(root.begin(), root.end());
      total.links.insert(total.links.end(), spur_path->links.begin(), spur_path->links.end());
      for (LinkId l : total.links) total.weight += weight[static_cast<std::size_t>(l)];
      const bool known =
          std::any_of(candidates.begin(), candidates.end(), [&](const Path& c) { return c.links == total.links; }) ||
          std::any_of(accepted.begin(), accepted.end(), [&](const Path& c) { return c.links == total.links; });
      if (!known) candidates.push_back(std::move(total));
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [&](const Path& a, const Path& b) { return path_less(net, src, a, b); });
    accepted.push_back(std::move(*best));
    candidates.erase(best);
  }
  return accepted;
}

SimplePaths all_simple_paths(const SubstrateNetwork& net, NodeId src, NodeId dst, LinkWeights weight,
                             std::size_t limit) {
  SimplePaths result;
  if (src == dst) {
    result.paths.push_back(Path{});
    return result;
  }
  std::vector<bool> on_path(net.node_count(), false);
  Path current;
  std::function<void(NodeId)> dfs = [&](NodeId u) {
    if (!result.complete) return;
    for (LinkId l : net.out_links(u)) {
      const double w = weight[static_cast<std::size_t>(l)];
      if (!std::isfinite(w)) continue;
      const NodeId v = net.link(l).head;
      if (on_path[static_cast<std::size_t>(v)]) continue;
      current.links.push_back(l);
      current.weight += w;
      if (v == dst) {
        if (result.paths.size() >= limit) {
          result.complete = false;
        } else {
          result.paths.push_back(current);
        }
      } else {
        on_path[static_cast<std::size_t>(v)] = true;
        dfs(v);
        on_path[static_cast<std::size_t>(v)] = false;
      }
      current.links.pop_back();
      current.weight -= w;
      if (!result.complete) return;
    }
  };
  on_path[static_cast<std::size_t>(src)] = true;
  dfs(src);
  // Recompute weights exactly; the running sum above accumulates rounding.
  for (auto& p : result.paths) {
    p.weight = 0.0;
    for (LinkId l : p.links) p.weight += weight[static_cast<std::size_t>(l)];
  }
  return result;
}

}  // namespace mcembed
