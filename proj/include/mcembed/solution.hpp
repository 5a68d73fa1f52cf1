#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcembed/service.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

// One NF instance: f_{nf_index} (1-based chain position) hosted on `node`
// for the listed destinations.
struct Placement {
  NodeId node = 0;
  int nf_index = 1;
  std::vector<NodeId> served;  // ascending
};

// Route of segment `nf_index` (0 = source to f_1, |V| = f_|V| to t) for one
// destination in one tree (1-based).
struct RoutedSegment {
  int tree = 1;
  int nf_index = 0;
  NodeId destination = 0;
  std::vector<LinkId> links;
  double rate = 0.0;
};

struct EmbeddingSolution {
  int request = 0;
  std::vector<Placement> placements;
  std::vector<RoutedSegment> segments;
  std::vector<double> tree_rates;  // d^j, index j-1
  double total_cost = 0.0;

  int active_trees() const;
  bool empty() const { return placements.empty() && segments.empty(); }
};

struct CostWeights {
  double alpha = 0.6;
  double beta = 0.4;
};

struct Violation {
  std::string constraint;  // "link capacity", "chain order", ...
  std::string detail;
  std::string describe() const { return constraint + ": " + detail; }
};

// Checks the solution against the request and the *current residual* state
// of `net`. Returns the first violated constraint, or nullopt when clean.
std::optional<Violation> validate_solution(const EmbeddingSolution& sol, const SubstrateNetwork& net,
                                           const ServiceRequest& r);

// Rate carried by link l: for every (tree, segment) the largest per-
// destination rate routed over l (multicast copies share the link), summed
// over (tree, segment).
std::vector<double> link_loads(const EmbeddingSolution& sol, std::size_t link_count);

// Resources consumed: link loads plus the processing demand of every placed
// instance.
ResourceDelta resource_usage(const EmbeddingSolution& sol, const ServiceRequest& r, std::size_t link_count);

// alpha * sum over used (l, j, i) of (gamma / B(l) + 1)
//   + beta * sum over instances of C(f_i) / C(n),
// with B and C taken from the current residuals of `net`.
// Throws std::invalid_argument if the solution does not validate.
double evaluate_cost(const EmbeddingSolution& sol, const SubstrateNetwork& net, const ServiceRequest& r,
                     CostWeights w);
// Same sum without validation (used while a solution is under construction).
double raw_cost(const EmbeddingSolution& sol, const SubstrateNetwork& net, const ServiceRequest& r,
                CostWeights w);

// Reserve the solution's resources on the ledger.
Outcome<ReservationId> commit(SubstrateNetwork& net, const EmbeddingSolution& sol, const ServiceRequest& r);

// Per-destination instance node for chain position i in [0, |V|+1]
// (0 is the source, |V|+1 the destination itself). -1 when unassigned.
NodeId instance_node(const EmbeddingSolution& sol, const ServiceRequest& r, int i, NodeId t);

// Orders placements/segments canonically and merges duplicate instances.
void normalize(EmbeddingSolution& sol);

}  // namespace mcembed
