#pragma once

// Small seeded networks and requests shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mcembed/rng.hpp"
#include "mcembed/service.hpp"
#include "mcembed/substrate.hpp"

namespace fixture {

struct Instance {
  mcembed::SubstrateNetwork net;
  mcembed::ServiceRequest request;
};

struct TinySpec {
  std::vector<std::pair<int, int>> grids{{2, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}};
  int max_nfs = 2;
  int max_destinations = 2;
  double rate_min = 0.1;
  double rate_max = 0.9;
  int max_trees = 1;
};

// King-mesh instance of at most 8 nodes with capacities in [0.5, 2] and a
// request whose rate is drawn so that some links are binding.
inline Instance tiny_instance(std::uint64_t seed, const TinySpec& spec = {}) {
  mcembed::Rng rng(seed);
  const auto [w, h] = spec.grids[rng.index(spec.grids.size())];
  const int n = w * h;
  const int nfv = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
  Instance out{mcembed::build_mesh(w, h, nfv, {0.5, 2.0}, 2, 0.8, rng.index(1ULL << 62)), {}};
  auto& r = out.request;
  r.id = 0;
  std::vector<mcembed::NodeId> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = i;
  rng.shuffle(nodes);
  r.source = nodes[0];
  const int nd = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(std::min(spec.max_destinations, n - 1))));
  r.destinations.assign(nodes.begin() + 1, nodes.begin() + 1 + nd);
  std::sort(r.destinations.begin(), r.destinations.end());
  r.rate = rng.uniform(spec.rate_min, spec.rate_max);
  const int nv = static_cast<int>(rng.index(static_cast<std::size_t>(spec.max_nfs + 1)));
  for (int i = 0; i < nv; ++i) r.chain.push_back({static_cast<int>(rng.index(2)), r.rate});
  r.max_trees = spec.max_trees;
  return out;
}

// Undirected path 0 - 1 - ... - (n-1) with both link directions. A positive
// entry of node_caps makes that node an NFV node admitting types 0..3.
inline mcembed::SubstrateNetwork line(const std::vector<double>& node_caps, double link_cap) {
  mcembed::SubstrateNetwork net;
  for (std::size_t i = 0; i < node_caps.size(); ++i) {
    const bool nfv = node_caps[i] > 0.0;
    net.add_node(nfv ? mcembed::NodeKind::Nfv : mcembed::NodeKind::Switch, nfv ? node_caps[i] : 0.0,
                 nfv ? std::vector<int>{0, 1, 2, 3} : std::vector<int>{}, {double(i), 0.0});
  }
  for (std::size_t i = 0; i + 1 < node_caps.size(); ++i) {
    net.add_link(int(i), int(i + 1), link_cap);
    net.add_link(int(i + 1), int(i), link_cap);
  }
  return net;
}

inline mcembed::ServiceRequest request(int source, std::vector<int> destinations, std::vector<int> types, double rate,
                                       int max_trees = 1) {
  mcembed::ServiceRequest r;
  r.source = source;
  std::sort(destinations.begin(), destinations.end());
  r.destinations = std::move(destinations);
  for (int t : types) r.chain.push_back({t, rate});
  r.rate = rate;
  r.max_trees = max_trees;
  return r;
}

}  // namespace fixture

#include "mcembed/solution.hpp"
#include "oracles.hpp"

namespace fixture {

// Single-tree solution with a random NFV host per (function, destination)
// and a random simple path per segment. Empty optional after `tries`
// attempts without a validator-clean draw.
inline std::optional<mcembed::EmbeddingSolution> random_solution(const mcembed::SubstrateNetwork& net,
                                                                 const mcembed::ServiceRequest& r, mcembed::Rng& rng,
                                                                 int tries = 50) {
  const auto hosts = net.nfv_nodes();
  if (hosts.empty() && !r.chain.empty()) return std::nullopt;
  const int nv = int(r.chain.size());
  for (int attempt = 0; attempt < tries; ++attempt) {
    mcembed::EmbeddingSolution sol;
    sol.request = r.id;
    sol.tree_rates = {r.rate};
    std::map<std::pair<int, int>, std::vector<int>> served;
    std::map<std::pair<int, int>, int> host;  // (i, t) -> node
    for (int t : r.destinations) {
      host[{0, t}] = r.source;
      host[{nv + 1, t}] = t;
      for (int i = 1; i <= nv; ++i) {
        const int n = hosts[rng.index(hosts.size())];
        host[{i, t}] = n;
        served[{n, i}].push_back(t);
      }
    }
    for (auto& [key, ts] : served) sol.placements.push_back({key.first, key.second, ts});
    bool routed = true;
    for (int t : r.destinations) {
      for (int i = 0; i <= nv && routed; ++i) {
        const int a = host[{i, t}];
        const int b = host[{i + 1, t}];
        if (a == b) continue;
        auto options = oracle::simple_paths(net, a, b);
        if (options.empty()) {
          routed = false;
          break;
        }
        sol.segments.push_back({1, i, t, options[rng.index(options.size())], r.rate});
      }
    }
    if (!routed) continue;
    mcembed::normalize(sol);
    if (!mcembed::validate_solution(sol, net, r)) return sol;
  }
  return std::nullopt;
}

}  // namespace fixture
