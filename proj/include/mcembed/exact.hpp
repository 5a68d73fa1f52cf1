#pragma once

#include <cstddef>
#include <vector>

#include "mcembed/heuristic.hpp"
#include "mcembed/outcome.hpp"
#include "mcembed/service.hpp"
#include "mcembed/solution.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

struct ExactLimits {
  int max_nodes = 10;
  int max_nfs = 2;
  int max_destinations = 3;
  int max_requests = 4;
  std::size_t max_links = 128;
  // Simple paths enumerated per (from, to) pair before giving up.
  std::size_t max_paths_per_pair = 200000;
  // Embeddings enumerated per request by the multi-service search.
  std::size_t max_embeddings = 400000;
};

enum class SearchMode {
  BranchAndBound,  // prune on partial cost against the incumbent
  Exhaustive,      // prune on feasibility only
};

struct SearchStats {
  std::size_t placements = 0;  // complete placement assignments visited
  std::size_t leaves = 0;      // complete routings evaluated
};

// Minimum-cost single-tree embedding. Routes are simple paths; equal-cost
// optima are resolved by the smallest (placement, route index) encoding so
// both search modes return the same solution.
Outcome<EmbeddingSolution> exact_single_path(const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w,
                                             const ExactLimits& limits = {},
                                             SearchMode mode = SearchMode::BranchAndBound,
                                             SearchStats* stats = nullptr);

// Any embedding using at most `max_trees` (1 or 2) trees. With two trees
// every segment is routed in both trees, tree 1 carrying d1 and tree 2
// carrying d-bar - d1 for some common d1.
Outcome<EmbeddingSolution> exact_feasible(const SubstrateNetwork& net, const ServiceRequest& r, int max_trees,
                                          const ExactLimits& limits = {});

struct MultiServiceResult {
  std::vector<int> accepted;                 // request ids, ascending
  double throughput = 0.0;                   // R*
  double cost = 0.0;                         // minimum cost at R*
  std::vector<EmbeddingSolution> solutions;  // one per accepted request
};

// Maximum aggregate throughput over all subsets that can be embedded jointly
// (single tree each), then minimum total cost among the maximizers. Costs use
// the residuals of `net` at call time for every request.
Outcome<MultiServiceResult> exact_multi_service(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests,
                                                CostWeights w, double a1, double a2, const ExactLimits& limits = {});

enum class Embedder { Exact, Jpr };

struct RateSearch {
  double rate = 0.0;  // largest feasible probe, 0 if none
  int probes = 0;
};

// Bisection on d-bar over [0, sum of residual capacity leaving the source].
// Each probe copies `tmpl` with rate = d-bar, every C(f) = d-bar and
// max_trees = J. JPR feasibility need not be monotone in d-bar; the result
// is then simply the largest probe that succeeded.
RateSearch max_supported_rate(const SubstrateNetwork& net, const ServiceRequest& tmpl, int max_trees, Embedder embedder,
                              double tolerance, const ExactLimits& limits = {}, const JprOptions& jpr = {});

}  // namespace mcembed
