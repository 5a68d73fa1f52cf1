#include "mcembed/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace mcembed {

double link_weight(double link_capacity, double head_capacity, double rate, double alpha, double beta) {
  if (!(link_capacity > 0.0) || !(head_capacity > 0.0)) {
    throw std::invalid_argument("link weight needs positive link and head capacities");
  }
  if (!(rate > 0.0)) throw std::invalid_argument("link weight needs a positive rate");
  return alpha * (rate / link_capacity + 1.0) + beta * (rate / head_capacity);
}

double link_weight(const LinkRecord& link, const NodeRecord& head, double rate, double alpha, double beta,
                   double switch_pseudo_capacity) {
  check_weights(alpha, beta, "alpha, beta");
  const double c = head.is_nfv() ? head.processing_capacity : switch_pseudo_capacity;
  return link_weight(link.capacity, c, rate, alpha, beta);
}

double default_switch_pseudo_capacity(const SubstrateNetwork& net) {
  double smallest = kInfinity;
  for (const auto& n : net.nodes()) {
    if (n.is_nfv()) smallest = std::min(smallest, n.processing_capacity);
  }
  if (!std::isfinite(smallest)) {
    // No NFV node at all: fall back to a tenth of the smallest link.
    for (const auto& l : net.links()) smallest = std::min(smallest, l.capacity);
  }
  return std::isfinite(smallest) ? 0.1 * smallest : 1.0;
}

std::vector<double> jpr_link_weights(const SubstrateNetwork& net, double rate, CostWeights w,
                                     double switch_pseudo_capacity) {
  check_weights(w.alpha, w.beta, "alpha, beta");
  if (!(switch_pseudo_capacity > 0.0)) switch_pseudo_capacity = default_switch_pseudo_capacity(net);
  std::vector<double> out(net.link_count(), kInfinity);
  for (const auto& l : net.links()) {
    const double b = net.residual_link(l.id);
    if (!(b > 0.0)) continue;
    const auto& head = net.node(l.head);
    const double c = net.residual_node(head.id);
    const double cap = head.is_nfv() && c > 0.0 ? c : switch_pseudo_capacity;
    out[static_cast<std::size_t>(l.id)] = link_weight(b, cap, rate, w.alpha, w.beta);
  }
  return out;
}

std::vector<double> proportional_split(std::span<const double> bottlenecks, double rate) {
  if (bottlenecks.empty()) throw std::invalid_argument("proportional split needs at least one path");
  if (!(rate > 0.0)) throw std::invalid_argument("proportional split needs a positive rate");
  double total = 0.0;
  for (double b : bottlenecks) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("bottlenecks must be positive and finite");
    total += b;
  }
  if (total + capacity_tolerance(rate) < rate) throw std::invalid_argument("bottlenecks cannot carry the rate");
  std::vector<double> out;
  out.reserve(bottlenecks.size());
  for (double b : bottlenecks) out.push_back(std::min(b, b * rate / total));
  return out;
}

Outcome<std::vector<RatedPath>> multipath_extend(const SubstrateNetwork& net, NodeId from, NodeId to, double rate,
                                                 int max_paths, LinkWeights weight, std::span<const double> residual,
                                                 std::size_t k_max) {
  if (max_paths < 1) throw std::invalid_argument("multipath extension needs J >= 1");
  if (!(rate > 0.0)) throw std::invalid_argument("multipath extension needs a positive rate");
  if (from == to) return std::vector<RatedPath>{RatedPath{Path{}, kInfinity, rate}};

  std::vector<double> masked(weight.begin(), weight.end());
  for (std::size_t l = 0; l < masked.size(); ++l) {
    if (!(residual[l] > 0.0)) masked[l] = kInfinity;
  }
  auto candidates = k_shortest_paths(net, from, to, masked, k_max);
  std::vector<RatedPath> ranked;
  for (auto& p : candidates) {
    double b = kInfinity;
    for (LinkId l : p.links) b = std::min(b, residual[static_cast<std::size_t>(l)]);
    ranked.push_back(RatedPath{std::move(p), b, 0.0});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RatedPath& a, const RatedPath& b) { return a.bottleneck > b.bottleneck; });

  std::vector<RatedPath> chosen;
  std::set<LinkId> used;
  double total = 0.0;
  for (auto& c : ranked) {
    if (static_cast<int>(chosen.size()) == max_paths) break;
    const bool disjoint =
        std::none_of(c.path.links.begin(), c.path.links.end(), [&](LinkId l) { return used.count(l) > 0; });
    if (!disjoint) continue;
    used.insert(c.path.links.begin(), c.path.links.end());
    total += c.bottleneck;
    chosen.push_back(std::move(c));
    if (total + capacity_tolerance(rate) >= rate) break;
  }
  if (chosen.empty() || total + capacity_tolerance(rate) < rate) {
    std::ostringstream msg;
    msg << "at most " << total << " packet/s fits between nodes " << from << " and " << to << " on "
        << max_paths << " path(s), " << rate << " required";
    return fail(FailureKind::Infeasible, msg.str());
  }
  std::vector<double> b;
  for (const auto& c : chosen) b.push_back(c.bottleneck);
  const auto rates = proportional_split(b, rate);
  for (std::size_t k = 0; k < chosen.size(); ++k) chosen[k].rate = rates[k];
  return chosen;
}

namespace {

using InstanceMap = std::map<std::pair<NodeId, int>, std::size_t>;  // (node, i) -> placement index

struct PlacementState {
  const SubstrateNetwork& net;
  const ServiceRequest& r;
  std::vector<Placement>& placements;
  InstanceMap& instances;
  std::vector<double>& node_residual;

  // Whether v may host f_{k+1} for every destination in `group`.
  bool eligible(NodeId v, std::size_t k, std::span<const NodeId> group) const {
    if (v == r.source) return false;
    if (std::find(group.begin(), group.end(), v) != group.end()) return false;
    if (instances.count({v, static_cast<int>(k) + 1})) return true;
    const auto& node = net.node(v);
    const auto& f = r.chain[k];
    return node.is_nfv() && node.admits(f.nf_type) &&
           f.processing_demand <= node_residual[static_cast<std::size_t>(v)] + capacity_tolerance(node.processing_capacity);
  }

  // Hosts as many consecutive functions from f_{k+1} on v as possible.
  // Returns the next unplaced 0-based index.
  std::size_t place_run(NodeId v, std::size_t k, std::span<const NodeId> group) {
    while (k < r.chain.size() && eligible(v, k, group)) {
      const std::pair<NodeId, int> key{v, static_cast<int>(k) + 1};
      auto it = instances.find(key);
      if (it == instances.end()) {
        node_residual[static_cast<std::size_t>(v)] =
            std::max(0.0, node_residual[static_cast<std::size_t>(v)] - r.chain[k].processing_demand);
        placements.push_back(Placement{v, key.second, {}});
        it = instances.emplace(key, placements.size() - 1).first;
      }
      auto& served = placements[it->second].served;
      for (NodeId t : group) {
        served.insert(std::lower_bound(served.begin(), served.end(), t), t);
      }
      ++k;
    }
    return k;
  }
};

InstanceMap index_instances(const std::vector<Placement>& placements) {
  InstanceMap out;
  for (std::size_t p = 0; p < placements.size(); ++p) {
    out.emplace(std::make_pair(placements[p].node, placements[p].nf_index), p);
  }
  return out;
}

// Segment boundaries (link offsets) along a route.
std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(const DestinationRoute& route) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t from = 0;
  for (std::size_t p : route.positions) {
    out.emplace_back(from, p);
    from = p;
  }
  out.emplace_back(from, route.links.size());
  return out;
}

std::vector<RoutedSegment> provisional_segments(const GreedyResult& g, double rate) {
  std::vector<RoutedSegment> out;
  for (const auto& route : g.routes) {
    const auto bounds = segment_bounds(route);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto [a, b] = bounds[i];
      if (a == b) continue;
      out.push_back(RoutedSegment{1, static_cast<int>(i), route.destination,
                                  std::vector<LinkId>(route.links.begin() + static_cast<std::ptrdiff_t>(a),
                                                      route.links.begin() + static_cast<std::ptrdiff_t>(b)),
                                  rate});
    }
  }
  return out;
}

// KPMST: spanning tree of the metric closure over {key, s, D}, expanded into
// substrate paths and reduced to one shortest path per destination inside
// the expansion.
Outcome<std::vector<std::pair<NodeId, std::vector<LinkId>>>> kpmst_paths(const SubstrateNetwork& net,
                                                                         const ServiceRequest& r,
                                                                         DistanceCache& cache, LinkWeights weight,
                                                                         std::optional<NodeId> key) {
  std::vector<NodeId> terminals(r.destinations.begin(), r.destinations.end());
  terminals.push_back(r.source);
  if (key) terminals.push_back(*key);
  auto closure = metric_closure(cache, terminals);
  if (!closure) return closure.failure();
  auto tree = mst(closure->terminals, closure->edges());
  if (!tree) return tree.failure();

  std::map<NodeId, std::vector<NodeId>> adjacent;
  for (const auto& e : *tree) {
    adjacent[e.u].push_back(e.v);
    adjacent[e.v].push_back(e.u);
  }
  std::vector<bool> in_topology(net.link_count(), false);
  std::set<NodeId> visited{r.source};
  std::vector<NodeId> frontier{r.source};
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      auto& around = adjacent[u];
      std::sort(around.begin(), around.end());
      for (NodeId v : around) {
        if (!visited.insert(v).second) continue;
        for (LinkId l : closure->path(u, v).links) in_topology[static_cast<std::size_t>(l)] = true;
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }

  std::vector<double> restricted(weight.begin(), weight.end());
  for (std::size_t l = 0; l < restricted.size(); ++l) {
    if (!in_topology[l]) restricted[l] = kInfinity;
  }
  std::vector<std::pair<NodeId, std::vector<LinkId>>> out;
  for (NodeId t : r.destinations) {
    auto p = shortest_path(net, r.source, t, restricted);
    if (!p) return p.failure();
    out.emplace_back(t, std::move(p)->links);
  }
  return out;
}

struct Candidate {
  std::optional<NodeId> key;
  GreedyResult greedy;
  std::vector<double> node_residual;
  double cost = 0.0;
};

// Attaches the functions greedy placement could not host. Destinations with
// the same placed prefix are handled together: the chain continues from the
// nearest eligible NFV node reachable from their common path, then each
// destination is reached by a shortest path.
std::optional<std::string> correct(const SubstrateNetwork& net, const ServiceRequest& r, DistanceCache& cache,
                                   GreedyResult& g, std::vector<double>& node_residual) {
  const std::size_t nv = r.chain.size();
  auto instances = index_instances(g.placements);
  PlacementState state{net, r, g.placements, instances, node_residual};

  std::vector<std::vector<std::size_t>> groups;
  {
    std::map<std::pair<std::size_t, std::vector<NodeId>>, std::size_t> group_of;
    for (std::size_t q = 0; q < g.routes.size(); ++q) {
      const auto& route = g.routes[q];
      if (route.placed() == nv) continue;
      auto [it, fresh] = group_of.emplace(std::make_pair(route.placed(), route.instances), groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(q);
    }
  }
  const auto nfv = net.nfv_nodes();

  for (const auto& members : groups) {
    std::vector<NodeId> group;
    for (std::size_t q : members) group.push_back(g.routes[q].destination);
    const std::size_t a = g.routes[members.front()].placed();

    std::vector<std::vector<NodeId>> walks;
    for (std::size_t q : members) walks.push_back(path_nodes(net, r.source, g.routes[q].links));
    std::size_t common = walks.front().size();
    for (const auto& w : walks) {
      std::size_t k = 0;
      while (k < common && k < w.size() && w[k] == walks.front()[k]) ++k;
      common = k;
    }

    // Attachment candidates as per-member walk positions.
    std::vector<std::vector<std::size_t>> attach;
    std::size_t lowest = 0;
    std::vector<std::size_t> own;
    for (std::size_t q : members) {
      const auto& route = g.routes[q];
      own.push_back(a == 0 ? 0 : route.positions[a - 1]);
      lowest = std::max(lowest, own.back());
    }
    if (lowest < common) {
      for (std::size_t pos = lowest; pos < common; ++pos) attach.emplace_back(members.size(), pos);
    } else {
      attach.push_back(own);
    }

    struct Choice {
      double distance = kInfinity;
      std::size_t attach = 0;
      NodeId node = -1;
    } best;
    for (std::size_t c = 0; c < attach.size(); ++c) {
      const NodeId at = walks.front()[attach[c].front()];
      const auto& dist = cache.from(at);
      for (NodeId v : nfv) {
        if (!state.eligible(v, a, group)) continue;
        const double d = dist[static_cast<std::size_t>(v)];
        if (!std::isfinite(d)) continue;
        const bool better = d < best.distance || (d == best.distance && best.node >= 0 && c > best.attach) ||
                            (d == best.distance && best.node >= 0 && c == best.attach && v < best.node);
        if (best.node < 0 || better) best = Choice{d, c, v};
      }
    }
    if (best.node < 0) {
      std::ostringstream msg;
      msg << "no reachable NFV node can host f_" << a + 1 << " (type " << r.chain[a].nf_type << ")";
      return msg.str();
    }

    const NodeId c_node = walks.front()[attach[best.attach].front()];
    for (std::size_t m = 0; m < members.size(); ++m) {
      auto& route = g.routes[members[m]];
      route.links.resize(attach[best.attach][m]);
    }
    auto extend = [&](NodeId from, NodeId to) -> bool {
      auto p = cache.path(from, to);
      if (!p) return false;
      for (std::size_t q : members) {
        auto& links = g.routes[q].links;
        links.insert(links.end(), p->links.begin(), p->links.end());
      }
      return true;
    };
    if (!extend(c_node, best.node)) return std::string("attachment path vanished");

    NodeId at = best.node;
    std::size_t k = a;
    while (true) {
      const std::size_t next = state.place_run(at, k, group);
      for (std::size_t q : members) {
        auto& route = g.routes[q];
        for (std::size_t x = k; x < next; ++x) {
          route.positions.push_back(route.links.size());
          route.instances.push_back(at);
        }
      }
      k = next;
      if (k == nv) break;
      const auto& dist = cache.from(at);
      NodeId pick = -1;
      for (NodeId v : nfv) {
        if (!state.eligible(v, k, group)) continue;
        const double d = dist[static_cast<std::size_t>(v)];
        if (!std::isfinite(d)) continue;
        if (pick < 0 || d < dist[static_cast<std::size_t>(pick)]) pick = v;
      }
      if (pick < 0) {
        std::ostringstream msg;
        msg << "no reachable NFV node can host f_" << k + 1 << " (type " << r.chain[k].nf_type << ")";
        return msg.str();
      }
      if (!extend(at, pick)) return std::string("attachment path vanished");
      at = pick;
    }
    for (std::size_t q : members) {
      auto& route = g.routes[q];
      auto p = cache.path(at, route.destination);
      if (!p) return std::string("destination unreachable after attachment");
      route.links.insert(route.links.end(), p->links.begin(), p->links.end());
    }
  }
  g.placed_total = 0;
  for (const auto& route : g.routes) g.placed_total += route.placed();
  return std::nullopt;
}

// Allocates rates segment by segment; segments that do not fit at the full
// rate are re-routed over up to J link-disjoint paths.
Outcome<EmbeddingSolution> allocate(const SubstrateNetwork& net, const ServiceRequest& r, const GreedyResult& g,
                                    LinkWeights weight, std::size_t k_max) {
  std::vector<double> residual(net.residual_links().begin(), net.residual_links().end());
  std::map<std::tuple<LinkId, int, int>, double> gamma;
  EmbeddingSolution sol;
  sol.request = r.id;
  sol.placements = g.placements;

  auto increments = [&](const std::vector<LinkId>& links, int tree, int i, double rate) {
    std::map<LinkId, double> out;
    for (LinkId l : links) {
      auto it = gamma.find({l, tree, i});
      const double have = it == gamma.end() ? 0.0 : it->second;
      out[l] = std::max(0.0, rate - have);
    }
    return out;
  };
  auto apply = [&](const std::vector<LinkId>& links, int tree, int i, double rate) {
    for (const auto& [l, inc] : increments(links, tree, i, rate)) {
      residual[static_cast<std::size_t>(l)] = std::max(0.0, residual[static_cast<std::size_t>(l)] - inc);
      auto& have = gamma[{l, tree, i}];
      have = std::max(have, rate);
    }
  };

  for (const auto& route : g.routes) {
    const auto walk = path_nodes(net, r.source, route.links);
    const auto bounds = segment_bounds(route);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto [a, b] = bounds[i];
      const NodeId from = walk[a];
      const NodeId to = walk[b];
      if (from == to) continue;
      std::vector<LinkId> links(route.links.begin() + static_cast<std::ptrdiff_t>(a),
                                route.links.begin() + static_cast<std::ptrdiff_t>(b));
      const int seg = static_cast<int>(i);
      bool fits = true;
      for (const auto& [l, inc] : increments(links, 1, seg, r.rate)) {
        if (inc > residual[static_cast<std::size_t>(l)] + capacity_tolerance(net.link(l).capacity)) fits = false;
      }
      if (fits) {
        apply(links, 1, seg, r.rate);
        sol.segments.push_back(RoutedSegment{1, seg, route.destination, std::move(links), r.rate});
        continue;
      }
      auto pieces = multipath_extend(net, from, to, r.rate, r.max_trees, weight, residual, k_max);
      if (!pieces) return pieces.failure();
      for (std::size_t k = 0; k < pieces->size(); ++k) {
        const auto& piece = (*pieces)[k];
        const int tree = static_cast<int>(k) + 1;
        apply(piece.path.links, tree, seg, piece.rate);
        sol.segments.push_back(RoutedSegment{tree, seg, route.destination, piece.path.links, piece.rate});
      }
    }
  }
  int trees = 1;
  for (const auto& s : sol.segments) trees = std::max(trees, s.tree);
  sol.tree_rates.assign(static_cast<std::size_t>(trees), 0.0);
  for (const auto& s : sol.segments) {
    auto& d = sol.tree_rates[static_cast<std::size_t>(s.tree - 1)];
    d = std::max(d, s.rate);
  }
  if (sol.segments.empty()) sol.tree_rates[0] = r.rate;
  normalize(sol);
  return sol;
}

}  // namespace

GreedyResult greedy_place(const SubstrateNetwork& net, const ServiceRequest& r,
                          const std::vector<std::pair<NodeId, std::vector<LinkId>>>& paths,
                          std::vector<double>& node_residual) {
  GreedyResult out;
  auto instances = index_instances(out.placements);
  PlacementState state{net, r, out.placements, instances, node_residual};
  auto ordered = paths;
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [t, links] : ordered) {
    DestinationRoute route;
    route.destination = t;
    route.links = links;
    const auto walk = path_nodes(net, r.source, links);
    std::size_t k = 0;
    const NodeId group[1] = {t};
    for (std::size_t q = 1; q + 1 < walk.size() && k < r.chain.size(); ++q) {
      const std::size_t next = state.place_run(walk[q], k, group);
      for (std::size_t x = k; x < next; ++x) {
        route.positions.push_back(q);
        route.instances.push_back(walk[q]);
      }
      k = next;
    }
    out.placed_total += route.placed();
    out.routes.push_back(std::move(route));
  }
  return out;
}

Outcome<EmbeddingSolution> jpr_embed(const SubstrateNetwork& net, const ServiceRequest& r, const JprOptions& options) {
  r.check(&net);
  check_weights(options.weights.alpha, options.weights.beta, "alpha, beta");
  const auto nfv = net.nfv_nodes();
  for (const auto& f : r.chain) {
    const bool any = std::any_of(nfv.begin(), nfv.end(), [&](NodeId n) {
      return n != r.source && net.node(n).admits(f.nf_type);
    });
    if (!any) {
      std::ostringstream msg;
      msg << "no admissible NFV node for NF type " << f.nf_type;
      return fail(FailureKind::Infeasible, msg.str());
    }
  }

  const double pseudo = options.switch_pseudo_capacity > 0.0 ? options.switch_pseudo_capacity
                                                             : default_switch_pseudo_capacity(net);
  const auto weight = jpr_link_weights(net, r.rate, options.weights, pseudo);
  DistanceCache cache(net, weight);

  std::vector<std::optional<NodeId>> keys(nfv.begin(), nfv.end());
  keys.emplace_back(std::nullopt);
  std::vector<Candidate> candidates;
  for (const auto& key : keys) {
    auto paths = kpmst_paths(net, r, cache, weight, key);
    if (!paths) continue;
    Candidate c;
    c.key = key;
    c.node_residual.assign(net.residual_nodes().begin(), net.residual_nodes().end());
    c.greedy = greedy_place(net, r, *paths, c.node_residual);
    EmbeddingSolution partial;
    partial.placements = c.greedy.placements;
    partial.segments = provisional_segments(c.greedy, r.rate);
    c.cost = raw_cost(partial, net, r, options.weights);
    candidates.push_back(std::move(c));
  }
  if (candidates.empty()) {
    return fail(FailureKind::Infeasible, "source cannot reach every destination");
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.greedy.placed_total != b.greedy.placed_total) return a.greedy.placed_total > b.greedy.placed_total;
    return a.cost < b.cost;
  });

  std::optional<Failure> first_failure;
  for (auto& c : candidates) {
    auto failure = correct(net, r, cache, c.greedy, c.node_residual);
    if (!failure) {
      auto sol = allocate(net, r, c.greedy, weight, options.k_max);
      if (sol) {
        if (auto v = validate_solution(*sol, net, r)) {
          failure = "internal: candidate failed validation (" + v->describe() + ")";
        } else {
          sol->total_cost = raw_cost(*sol, net, r, options.weights);
          return sol;
        }
      } else {
        failure = sol.failure().reason;
      }
    }
    if (!first_failure) first_failure = fail(FailureKind::Infeasible, *failure);
    if (!options.fall_back) break;
  }
  return *first_failure;
}

}  // namespace mcembed
