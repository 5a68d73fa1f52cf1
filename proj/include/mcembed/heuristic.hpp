#pragma once

#include <span>
#include <vector>

#include "mcembed/graph.hpp"
#include "mcembed/outcome.hpp"
#include "mcembed/service.hpp"
#include "mcembed/solution.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

struct JprOptions {
  CostWeights weights;
  // C(m) stand-in for switch heads. Non-positive means
  // 0.1 * min over NFV nodes of C(n).
  double switch_pseudo_capacity = 0.0;
  // Candidate paths examined by the multipath extension.
  std::size_t k_max = 16;
  // When the best key-node candidate cannot be completed, fall back to the
  // next one in (placed count, cost) order.
  bool fall_back = true;
};

// omega = alpha * (rate / B + 1) + beta * rate / C, C being the head's
// processing capacity or `switch_pseudo_capacity` for a switch head.
double link_weight(const LinkRecord& link, const NodeRecord& head, double rate, double alpha, double beta,
                   double switch_pseudo_capacity);
double link_weight(double link_capacity, double head_capacity, double rate, double alpha, double beta);

double default_switch_pseudo_capacity(const SubstrateNetwork& net);

// Per-link weights on the current residuals. Links without residual
// bandwidth get +inf.
std::vector<double> jpr_link_weights(const SubstrateNetwork& net, double rate, CostWeights w,
                                     double switch_pseudo_capacity);

// R_k = B_k * rate / sum(B). Requires sum(B) >= rate and B_k > 0.
std::vector<double> proportional_split(std::span<const double> bottlenecks, double rate);

struct RatedPath {
  Path path;
  double bottleneck = 0.0;
  double rate = 0.0;
};

// Up to J link-disjoint paths from -> to, picked from the k_max shortest
// paths (by `weight`) in descending bottleneck order over `residual`, with
// the rate split proportionally. Infeasible when even J paths cannot carry
// `rate`.
Outcome<std::vector<RatedPath>> multipath_extend(const SubstrateNetwork& net, NodeId from, NodeId to, double rate,
                                                 int max_paths, LinkWeights weight, std::span<const double> residual,
                                                 std::size_t k_max = 16);

// Source-to-destination walk with the positions (node indices along the
// walk) at which chain functions are hosted.
struct DestinationRoute {
  NodeId destination = 0;
  std::vector<LinkId> links;
  std::vector<std::size_t> positions;  // positions[k] hosts f_{k+1}
  std::vector<NodeId> instances;       // node hosting f_{k+1}
  std::size_t placed() const { return instances.size(); }
};

struct GreedyResult {
  std::vector<DestinationRoute> routes;  // ascending destination
  std::vector<Placement> placements;
  std::size_t placed_total = 0;
};

// Walks each source-to-destination path in ascending destination order and
// hosts the next unplaced functions at the first nodes able to take them,
// reusing instances already opened for this request. `node_residual` is
// debited for every new instance.
GreedyResult greedy_place(const SubstrateNetwork& net, const ServiceRequest& r,
                          const std::vector<std::pair<NodeId, std::vector<LinkId>>>& paths,
                          std::vector<double>& node_residual);

// The JPR heuristic. Pure: the ledger of `net` is not modified.
Outcome<EmbeddingSolution> jpr_embed(const SubstrateNetwork& net, const ServiceRequest& r,
                                     const JprOptions& options = {});

}  // namespace mcembed
