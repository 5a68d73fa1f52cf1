#include "mcembed/solution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace mcembed {

int EmbeddingSolution::active_trees() const {
  return static_cast<int>(std::count_if(tree_rates.begin(), tree_rates.end(), [](double d) { return d > 0.0; }));
}

namespace {

double rate_tolerance(double rate) { return 1e-9 * std::max(rate, 1.0); }

template <class... Args>
std::string format(Args&&... args) {
  std::ostringstream out;
  (out << ... << args);
  return out.str();
}

Violation violation(std::string constraint, std::string detail) {
  return Violation{std::move(constraint), std::move(detail)};
}

}  // namespace

NodeId instance_node(const EmbeddingSolution& sol, const ServiceRequest& r, int i, NodeId t) {
  if (i == 0) return r.source;
  if (i == static_cast<int>(r.chain.size()) + 1) return t;
  for (const auto& p : sol.placements) {
    if (p.nf_index == i && std::binary_search(p.served.begin(), p.served.end(), t)) return p.node;
  }
  return -1;
}

std::vector<double> link_loads(const EmbeddingSolution& sol, std::size_t link_count) {
  std::map<std::tuple<LinkId, int, int>, double> gamma;
  for (const auto& s : sol.segments) {
    for (LinkId l : s.links) {
      auto& g = gamma[{l, s.tree, s.nf_index}];
      g = std::max(g, s.rate);
    }
  }
  std::vector<double> load(link_count, 0.0);
  for (const auto& [key, g] : gamma) {
    const auto l = static_cast<std::size_t>(std::get<0>(key));
    if (l >= link_count) throw std::invalid_argument("segment references an unknown link");
    load[l] += g;
  }
  return load;
}

ResourceDelta resource_usage(const EmbeddingSolution& sol, const ServiceRequest& r, std::size_t link_count) {
  ResourceDelta delta;
  const auto load = link_loads(sol, link_count);
  for (std::size_t l = 0; l < load.size(); ++l) {
    if (load[l] > 0.0) delta.links.emplace_back(static_cast<LinkId>(l), load[l]);
  }
  for (const auto& p : sol.placements) {
    delta.nodes.emplace_back(p.node, r.chain.at(static_cast<std::size_t>(p.nf_index - 1)).processing_demand);
  }
  return delta;
}

std::optional<Violation> validate_solution(const EmbeddingSolution& sol, const SubstrateNetwork& net,
                                           const ServiceRequest& r) {
  try {
    r.check(&net);
  } catch (const std::invalid_argument& e) {
    return violation("request", e.what());
  }
  if (sol.request != r.id) return violation("request", format("solution is for request ", sol.request));
  const int nv = static_cast<int>(r.chain.size());
  const double tol = rate_tolerance(r.rate);

  // Trees and rates.
  if (sol.tree_rates.empty() || static_cast<int>(sol.tree_rates.size()) > r.max_trees) {
    return violation("tree count", format(sol.tree_rates.size(), " trees, limit ", r.max_trees));
  }
  double total_rate = 0.0;
  for (std::size_t j = 0; j < sol.tree_rates.size(); ++j) {
    const double d = sol.tree_rates[j];
    if (!(d >= 0.0) || d > r.rate + tol) {
      return violation("rate requirement", format("tree ", j + 1, " rate ", d, " outside [0, ", r.rate, "]"));
    }
    total_rate += d;
  }
  if (total_rate < r.rate - tol) {
    return violation("rate requirement", format("tree rates sum to ", total_rate, " < ", r.rate));
  }

  // Placements.
  std::set<std::pair<NodeId, int>> instances;
  std::map<std::pair<int, NodeId>, NodeId> serving;  // (i, t) -> node
  std::map<NodeId, double> node_demand;
  for (const auto& p : sol.placements) {
    if (p.nf_index < 1 || p.nf_index > nv) {
      return violation("one instance per pair", format("placement with NF index ", p.nf_index));
    }
    if (!net.has_node(p.node) || !net.node(p.node).is_nfv()) {
      return violation("admittability", format("node ", p.node, " is not an NFV node"));
    }
    const auto& f = r.chain[static_cast<std::size_t>(p.nf_index - 1)];
    if (!net.node(p.node).admits(f.nf_type)) {
      return violation("admittability", format("node ", p.node, " does not admit NF type ", f.nf_type));
    }
    if (p.node == r.source) {
      return violation("boundary placement", format("f_", p.nf_index, " placed on the source"));
    }
    if (!instances.emplace(p.node, p.nf_index).second) {
      return violation("one instance per pair", format("duplicate instance of f_", p.nf_index, " on node ", p.node));
    }
    if (p.served.empty()) return violation("one instance per pair", format("instance on node ", p.node, " serves nobody"));
    for (NodeId t : p.served) {
      if (!std::binary_search(r.destinations.begin(), r.destinations.end(), t)) {
        return violation("one instance per pair", format("node ", t, " is not a destination"));
      }
      if (t == p.node) {
        return violation("boundary placement", format("f_", p.nf_index, " placed on its own destination ", t));
      }
      if (!serving.emplace(std::make_pair(p.nf_index, t), p.node).second) {
        return violation("one instance per pair",
                         format("destination ", t, " served by two instances of f_", p.nf_index));
      }
    }
    node_demand[p.node] += f.processing_demand;
  }
  for (int i = 1; i <= nv; ++i) {
    for (NodeId t : r.destinations) {
      if (!serving.count({i, t})) {
        return violation("one instance per pair", format("no instance of f_", i, " serves destination ", t));
      }
    }
  }
  for (const auto& [n, demand] : node_demand) {
    const double avail = net.residual_node(n);
    if (demand > avail + capacity_tolerance(net.node(n).processing_capacity)) {
      return violation("node capacity", format("node ", n, " needs ", demand, " but has ", avail));
    }
  }

  auto endpoint = [&](int i, NodeId t) -> NodeId {
    if (i == 0) return r.source;
    if (i == nv + 1) return t;
    return serving.at({i, t});
  };

  // Segments.
  std::set<std::tuple<int, int, NodeId>> seen;
  std::map<std::pair<int, NodeId>, double> delivered;
  for (const auto& s : sol.segments) {
    if (s.tree < 1 || s.tree > static_cast<int>(sol.tree_rates.size())) {
      return violation("tree count", format("segment uses tree ", s.tree));
    }
    if (s.nf_index < 0 || s.nf_index > nv) {
      return violation("chain order", format("segment index ", s.nf_index, " outside [0, ", nv, "]"));
    }
    if (!std::binary_search(r.destinations.begin(), r.destinations.end(), s.destination)) {
      return violation("flow conservation", format("segment for non-destination ", s.destination));
    }
    if (!seen.emplace(s.tree, s.nf_index, s.destination).second) {
      return violation("flow conservation", format("duplicate segment (tree ", s.tree, ", i ", s.nf_index,
                                                   ", t ", s.destination, ")"));
    }
    if (!(s.rate > 0.0) || s.rate > sol.tree_rates[static_cast<std::size_t>(s.tree - 1)] + tol) {
      return violation("rate requirement", format("segment rate ", s.rate, " outside (0, d^", s.tree, "]"));
    }
    const NodeId from = endpoint(s.nf_index, s.destination);
    const NodeId to = endpoint(s.nf_index + 1, s.destination);
    NodeId at = from;
    for (LinkId l : s.links) {
      if (l < 0 || static_cast<std::size_t>(l) >= net.link_count()) {
        return violation("flow conservation", format("unknown link ", l));
      }
      if (net.link(l).tail != at) {
        return violation("flow conservation", format("segment (tree ", s.tree, ", i ", s.nf_index, ", t ",
                                                     s.destination, ") breaks at link ", l));
      }
      at = net.link(l).head;
    }
    if (at != to) {
      // Ending on the instance of a different chain position means the
      // traversal order was broken; anything else is a dangling walk.
      for (int k = 0; k <= nv + 1; ++k) {
        if (k != s.nf_index && k != s.nf_index + 1 && endpoint(k, s.destination) == at) {
          return violation("chain order", format("segment ", s.nf_index, " for destination ", s.destination,
                                                 " ends at f_", k, " instance (node ", at, "), expected node ", to));
        }
      }
      return violation("flow conservation", format("segment ", s.nf_index, " for destination ", s.destination,
                                                   " ends at node ", at, ", expected ", to));
    }
    delivered[{s.nf_index, s.destination}] += s.rate;
  }
  for (int i = 0; i <= nv; ++i) {
    for (NodeId t : r.destinations) {
      if (endpoint(i, t) == endpoint(i + 1, t)) continue;
      const double got = delivered.count({i, t}) ? delivered[{i, t}] : 0.0;
      if (got < r.rate - tol) {
        return violation("rate requirement",
                         format("segment ", i, " for destination ", t, " carries ", got, " < ", r.rate));
      }
    }
  }

  const auto load = link_loads(sol, net.link_count());
  for (std::size_t l = 0; l < load.size(); ++l) {
    const double avail = net.residual_link(static_cast<LinkId>(l));
    if (load[l] > avail + capacity_tolerance(net.link(static_cast<LinkId>(l)).capacity)) {
      return violation("link capacity", format("link ", l, " carries ", load[l], " but has ", avail));
    }
  }
  return std::nullopt;
}

double raw_cost(const EmbeddingSolution& sol, const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w) {
  std::map<std::tuple<LinkId, int, int>, double> gamma;
  for (const auto& s : sol.segments) {
    for (LinkId l : s.links) {
      auto& g = gamma[{l, s.tree, s.nf_index}];
      g = std::max(g, s.rate);
    }
  }
  double link_term = 0.0;
  for (const auto& [key, g] : gamma) {
    const double b = net.residual_link(std::get<0>(key));
    link_term += (b > 0.0 ? g / b : 0.0) + 1.0;
  }
  double node_term = 0.0;
  for (const auto& p : sol.placements) {
    const double c = net.residual_node(p.node);
    if (c > 0.0) node_term += r.chain.at(static_cast<std::size_t>(p.nf_index - 1)).processing_demand / c;
  }
  return w.alpha * link_term + w.beta * node_term;
}

double evaluate_cost(const EmbeddingSolution& sol, const SubstrateNetwork& net, const ServiceRequest& r,
                     CostWeights w) {
  if (sol.empty()) return 0.0;
  if (auto v = validate_solution(sol, net, r)) {
    throw std::invalid_argument("cannot cost an invalid solution: " + v->describe());
  }
  return raw_cost(sol, net, r, w);
}

Outcome<ReservationId> commit(SubstrateNetwork& net, const EmbeddingSolution& sol, const ServiceRequest& r) {
  return net.reserve(resource_usage(sol, r, net.link_count()));
}

void normalize(EmbeddingSolution& sol) {
  std::map<std::pair<int, NodeId>, std::set<NodeId>> merged;
  for (const auto& p : sol.placements) merged[{p.nf_index, p.node}].insert(p.served.begin(), p.served.end());
  sol.placements.clear();
  for (const auto& [key, served] : merged) {
    sol.placements.push_back(Placement{key.second, key.first, std::vector<NodeId>(served.begin(), served.end())});
  }
  std::sort(sol.segments.begin(), sol.segments.end(), [](const RoutedSegment& a, const RoutedSegment& b) {
    return std::tie(a.tree, a.nf_index, a.destination) < std::tie(b.tree, b.nf_index, b.destination);
  });
}

}  // namespace mcembed
