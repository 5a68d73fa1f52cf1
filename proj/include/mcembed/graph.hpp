#pragma once

#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "mcembed/outcome.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Per-link cost indexed by link id. Non-negative; +inf removes the link.
using LinkWeights = std::span<const double>;

struct Path {
  std::vector<LinkId> links;
  double weight = 0.0;
};

// Node sequence visited by `links` when starting at `src`.
std::vector<NodeId> path_nodes(const SubstrateNetwork& net, NodeId src, std::span<const LinkId> links);

// Single-source distances. With `reverse`, distances are *to* `src`.
std::vector<double> dijkstra(const SubstrateNetwork& net, NodeId src, LinkWeights weight,
                             bool reverse = false);

// Minimum-weight directed path; among equal-weight paths the one with the
// lexicographically smallest node sequence.
Outcome<Path> shortest_path(const SubstrateNetwork& net, NodeId src, NodeId dst, LinkWeights weight);

// Memoizes forward and reverse Dijkstra runs for one weight vector. Used when
// many closures share most of their terminals.
class DistanceCache {
 public:
  DistanceCache(const SubstrateNetwork& net, LinkWeights weight) : net_(net), weight_(weight) {}

  const std::vector<double>& from(NodeId src);
  const std::vector<double>& to(NodeId dst);
  Outcome<Path> path(NodeId src, NodeId dst);

 private:
  const SubstrateNetwork& net_;
  LinkWeights weight_;
  std::unordered_map<NodeId, std::vector<double>> forward_;
  std::unordered_map<NodeId, std::vector<double>> reverse_;
};

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// Complete graph over a terminal set whose edges carry shortest-path
// distances of the substrate. Distances are directed; the undirected edge
// weight handed to the spanning tree is the mean of the two directions, which
// keeps the triangle inequality and equals the distance on symmetric weights.
struct MetricClosure {
  std::vector<NodeId> terminals;                // ascending, unique
  std::vector<std::vector<double>> distance;    // [a][b], terminal indices
  std::vector<std::vector<Path>> paths;         // [a][b] realizing path

  std::size_t index_of(NodeId n) const;
  double directed(NodeId a, NodeId b) const;
  double weight(NodeId a, NodeId b) const;
  const Path& path(NodeId a, NodeId b) const;
  // One undirected edge per terminal pair, endpoints are node ids (u < v).
  std::vector<WeightedEdge> edges() const;
};

Outcome<MetricClosure> metric_closure(const SubstrateNetwork& net, std::span<const NodeId> terminals,
                                      LinkWeights weight);
Outcome<MetricClosure> metric_closure(DistanceCache& cache, std::span<const NodeId> terminals);

// Kruskal. Edges are considered in ascending (weight, smaller endpoint,
// larger endpoint) order, so the result does not depend on input order.
// Fails with Unreachable if the edges do not connect `vertices`.
Outcome<std::vector<WeightedEdge>> mst(std::span<const int> vertices, std::vector<WeightedEdge> edges);

// Yen's loopless k shortest paths, ascending weight then node sequence.
std::vector<Path> k_shortest_paths(const SubstrateNetwork& net, NodeId src, NodeId dst,
                                   LinkWeights weight, std::size_t k);

// Every simple directed path src -> dst over links of finite weight, in DFS
// order of ascending head id. `limit` caps the enumeration; the returned flag
// is false when the cap was hit.
struct SimplePaths {
  std::vector<Path> paths;
  bool complete = true;
};
SimplePaths all_simple_paths(const SubstrateNetwork& net, NodeId src, NodeId dst, LinkWeights weight,
                             std::size_t limit);

}  // namespace mcembed
