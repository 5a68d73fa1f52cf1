#include "mcembed/exact.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mcembed/graph.hpp"

namespace mcembed {

namespace {

constexpr std::size_t kMaxLinks = 128;
using LinkSet = std::bitset<kMaxLinks>;

struct PathEntry {
  std::vector<LinkId> links;
  LinkSet set;
  double cost = 0.0;
};

// Simple paths per (from, to) over the usable links, cheapest first.
class PathTable {
 public:
  PathTable(const SubstrateNetwork& net, std::vector<double> weight, std::size_t limit)
      : net_(net), weight_(std::move(weight)), limit_(limit) {}

  const std::vector<PathEntry>& get(NodeId a, NodeId b) {
    auto key = std::make_pair(a, b);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    auto found = all_simple_paths(net_, a, b, weight_, limit_);
    if (!found.complete) overflow_ = true;
    std::vector<PathEntry> entries;
    for (auto& p : found.paths) {
      PathEntry e;
      e.links = std::move(p.links);
      for (LinkId l : e.links) {
        e.set.set(static_cast<std::size_t>(l));
        e.cost += weight_[static_cast<std::size_t>(l)];
      }
      entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(), [](const PathEntry& x, const PathEntry& y) {
      if (x.cost != y.cost) return x.cost < y.cost;
      return x.links < y.links;
    });
    return table_.emplace(key, std::move(entries)).first->second;
  }

  double distance(NodeId a, NodeId b) {
    const auto& entries = get(a, b);
    return entries.empty() ? kInfinity : entries.front().cost;
  }

  bool overflow() const { return overflow_; }
  double weight(LinkId l) const { return weight_[static_cast<std::size_t>(l)]; }

 private:
  const SubstrateNetwork& net_;
  std::vector<double> weight_;
  std::size_t limit_;
  std::map<std::pair<NodeId, NodeId>, std::vector<PathEntry>> table_;
  bool overflow_ = false;
};

bool cost_less(double a, double b) { return a < b - 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::optional<Failure> check_limits(const SubstrateNetwork& net, const ServiceRequest& r, const ExactLimits& limits) {
  std::ostringstream msg;
  if (static_cast<int>(net.node_count()) > limits.max_nodes) {
    msg << net.node_count() << " nodes exceed the limit of " << limits.max_nodes;
  } else if (net.link_count() > std::min(limits.max_links, kMaxLinks)) {
    msg << net.link_count() << " links exceed the limit of " << std::min(limits.max_links, kMaxLinks);
  } else if (static_cast<int>(r.chain.size()) > limits.max_nfs) {
    msg << r.chain.size() << " NFs exceed the limit of " << limits.max_nfs;
  } else if (static_cast<int>(r.destinations.size()) > limits.max_destinations) {
    msg << r.destinations.size() << " destinations exceed the limit of " << limits.max_destinations;
  } else {
    return std::nullopt;
  }
  return fail(FailureKind::TooLarge, msg.str());
}

// Distinct (segment, from, to) routing demand; destinations sharing it are
// served by one path (sharing never costs more and never adds load).
struct Demand {
  int segment = 0;
  NodeId from = 0;
  NodeId to = 0;
  std::vector<NodeId> destinations;
};

// Enumerates placements (per (i, t) hosting node) for one request, then
// routings over them.
class Search {
 public:
  enum class Goal { Optimize, FirstFeasible, EnumerateAll };

  Search(const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w, const ExactLimits& limits, int trees)
      : net_(net), r_(r), w_(w), trees_(trees), nv_(r.chain.size()), nd_(r.destinations.size()),
        paths_(net, usable_weights(net, r, w, trees), limits.max_paths_per_pair) {
    for (std::size_t i = 1; i <= nv_; ++i) {
      const auto& f = r.chain[i - 1];
      std::vector<NodeId> ok;
      for (NodeId n : net.nfv_nodes()) {
        if (n != r.source && net.node(n).admits(f.nf_type)) ok.push_back(n);
      }
      candidates_.push_back(std::move(ok));
    }
    choice_.assign(nv_ * nd_, -1);
    demand_.assign(net.node_count(), 0.0);
    per_segment_.resize(nv_ + 1);
    use_count_.assign(net.link_count(), 0);
    use1_.assign(net.link_count(), 0);
    use2_.assign(net.link_count(), 0);
  }

  Goal goal = Goal::Optimize;
  SearchMode mode = SearchMode::BranchAndBound;
  SearchStats stats;
  // EnumerateAll: called with (cost, solution) for every feasible embedding;
  // returning false stops the search.
  std::function<bool(double, EmbeddingSolution&&)> visit;

  bool found() const { return have_best_; }
  bool overflow() const { return paths_.overflow(); }
  double best_cost() const { return best_cost_; }
  EmbeddingSolution best() const { return best_solution_; }

  void run() { place(0); }

 private:
  static std::vector<double> usable_weights(const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w,
                                            int trees) {
    std::vector<double> out(net.link_count(), kInfinity);
    for (const auto& l : net.links()) {
      const double b = net.residual_link(l.id);
      const bool usable = trees == 1 ? b + capacity_tolerance(l.capacity) >= r.rate : b > 0.0;
      if (usable) out[static_cast<std::size_t>(l.id)] = w.alpha * (r.rate / b + 1.0);
    }
    return out;
  }

  NodeId endpoint(std::size_t i, std::size_t t_index) const {
    if (i == 0) return r_.source;
    if (i == nv_ + 1) return r_.destinations[t_index];
    return choice_[(i - 1) * nd_ + t_index];
  }

  bool stopped() const { return stop_; }

  double instance_cost(NodeId n, std::size_t i) const {
    const double c = net_.residual_node(n);
    return c > 0.0 ? w_.beta * r_.chain[i - 1].processing_demand / c : 0.0;
  }

  // Routing lower bound from the placement choices made so far: for every
  // segment, the costliest of its known demands taken alone.
  double routing_bound() const {
    double total = 0.0;
    for (std::size_t i = 0; i <= nv_; ++i) {
      double seg = 0.0;
      for (std::size_t t = 0; t < nd_; ++t) {
        const NodeId a = endpoint(i, t);
        const NodeId b = endpoint(i + 1, t);
        if (a < 0 || b < 0 || a == b) continue;
        seg = std::max(seg, const_cast<PathTable&>(paths_).distance(a, b));
      }
      total += seg;
    }
    return total;
  }

  bool prune(double bound) const {
    if (goal != Goal::Optimize || mode == SearchMode::Exhaustive || !have_best_) return false;
    return cost_less(best_cost_, bound);
  }

  void place(std::size_t k) {
    if (stopped()) return;
    if (k == nv_ * nd_) {
      ++stats.placements;
      start_routing();
      return;
    }
    const std::size_t i = k / nd_ + 1;
    const std::size_t t = k % nd_;
    const NodeId dest = r_.destinations[t];
    const double need = r_.chain[i - 1].processing_demand;
    for (NodeId n : candidates_[i - 1]) {
      if (n == dest) continue;
      auto key = std::make_pair(n, static_cast<int>(i));
      const bool fresh = instances_[key] == 0;
      double added = 0.0;
      if (fresh) {
        const double cap = net_.residual_node(n) + capacity_tolerance(net_.node(n).processing_capacity);
        if (demand_[static_cast<std::size_t>(n)] + need > cap) {
          if (instances_[key] == 0) instances_.erase(key);
          continue;
        }
        demand_[static_cast<std::size_t>(n)] += need;
        added = instance_cost(n, i);
      }
      ++instances_[key];
      choice_[k] = n;
      placement_cost_ += added;
      const double saved = placement_cost_;
      if (!std::isinf(routing_bound()) && !prune(placement_cost_ + routing_bound())) place(k + 1);
      placement_cost_ = saved - added;
      choice_[k] = -1;
      if (--instances_[key] == 0) {
        instances_.erase(key);
        demand_[static_cast<std::size_t>(n)] -= need;
      }
      if (stopped()) return;
    }
  }

  void start_routing() {
    demands_.clear();
    std::map<std::tuple<int, NodeId, NodeId>, std::size_t> index;
    for (std::size_t i = 0; i <= nv_; ++i) {
      for (std::size_t t = 0; t < nd_; ++t) {
        const NodeId a = endpoint(i, t);
        const NodeId b = endpoint(i + 1, t);
        if (a == b) continue;
        auto key = std::make_tuple(static_cast<int>(i), a, b);
        auto [it, fresh] = index.emplace(key, demands_.size());
        if (fresh) demands_.push_back(Demand{static_cast<int>(i), a, b, {}});
        demands_[it->second].destinations.push_back(r_.destinations[t]);
      }
    }
    for (const auto& d : demands_) {
      if (paths_.get(d.from, d.to).empty()) return;
    }
    route_index_.assign(demands_.size(), 0);
    route_index2_.assign(demands_.size(), 0);
    routing_cost_ = 0.0;
    for (auto& s : per_segment_) s.reset();
    if (trees_ == 1) {
      route(0);
    } else {
      per_segment2_.assign(nv_ + 1, LinkSet{});
      route_two(0);
    }
  }

  double uncovered_cost(const PathEntry& p, const LinkSet& covered) const {
    double c = 0.0;
    for (LinkId l : p.links) {
      if (!covered.test(static_cast<std::size_t>(l))) c += paths_.weight(l);
    }
    return c;
  }

  // Lower bound on the routing still to add for demands q >= from.
  double remaining_bound(std::size_t from) {
    std::vector<double> seg(nv_ + 1, 0.0);
    for (std::size_t q = from; q < demands_.size(); ++q) {
      const auto& d = demands_[q];
      const auto& covered = per_segment_[static_cast<std::size_t>(d.segment)];
      double covered_cost = 0.0;
      for (std::size_t l = 0; l < net_.link_count(); ++l) {
        if (covered.test(l)) covered_cost += paths_.weight(static_cast<LinkId>(l));
      }
      double best = kInfinity;
      for (const auto& p : paths_.get(d.from, d.to)) {
        if (p.cost - covered_cost >= best) break;
        best = std::min(best, uncovered_cost(p, covered));
      }
      auto& s = seg[static_cast<std::size_t>(d.segment)];
      s = std::max(s, best);
    }
    return std::accumulate(seg.begin(), seg.end(), 0.0);
  }

  bool fits(const PathEntry& p, const LinkSet& covered) const {
    for (LinkId l : p.links) {
      if (covered.test(static_cast<std::size_t>(l))) continue;
      const double cap = net_.residual_link(l) + capacity_tolerance(net_.link(l).capacity);
      if ((use_count_[static_cast<std::size_t>(l)] + 1) * r_.rate > cap) return false;
    }
    return true;
  }

  void route(std::size_t q) {
    if (stopped()) return;
    if (q == demands_.size()) {
      leaf();
      return;
    }
    const auto& d = demands_[q];
    auto& covered = per_segment_[static_cast<std::size_t>(d.segment)];
    const auto& options = paths_.get(d.from, d.to);
    for (std::size_t idx = 0; idx < options.size(); ++idx) {
      const auto& p = options[idx];
      if (!fits(p, covered)) continue;
      const LinkSet fresh = p.set & ~covered;
      const double added = uncovered_cost(p, covered);
      if (goal == Goal::Optimize && mode == SearchMode::BranchAndBound && have_best_ &&
          cost_less(best_cost_, placement_cost_ + routing_cost_ + added)) {
        continue;
      }
      covered |= fresh;
      for (LinkId l : p.links) {
        if (fresh.test(static_cast<std::size_t>(l))) ++use_count_[static_cast<std::size_t>(l)];
      }
      routing_cost_ += added;
      route_index_[q] = idx;
      if (!prune(placement_cost_ + routing_cost_ + remaining_bound(q + 1))) route(q + 1);
      routing_cost_ -= added;
      for (LinkId l : p.links) {
        if (fresh.test(static_cast<std::size_t>(l))) --use_count_[static_cast<std::size_t>(l)];
      }
      covered &= ~fresh;
      if (stopped()) return;
    }
  }

  // Interval of d1 compatible with the tree-1 / tree-2 link usage counts.
  std::pair<double, double> tree_rate_interval() const {
    double lo = 0.0;
    double hi = r_.rate;
    for (std::size_t l = 0; l < net_.link_count(); ++l) {
      const int n1 = use1_[l];
      const int n2 = use2_[l];
      if (n1 == 0 && n2 == 0) continue;
      const double cap = net_.residual_link(static_cast<LinkId>(l)) +
                         capacity_tolerance(net_.link(static_cast<LinkId>(l)).capacity);
      // n1 * d1 + n2 * (d - d1) <= cap
      const double slope = n1 - n2;
      const double rhs = cap - n2 * r_.rate;
      if (slope > 0) {
        hi = std::min(hi, rhs / slope);
      } else if (slope < 0) {
        lo = std::max(lo, rhs / slope);
      } else if (rhs < 0) {
        return {1.0, 0.0};
      }
    }
    return {lo, hi};
  }

  void route_two(std::size_t q) {
    if (stopped()) return;
    if (q == demands_.size()) {
      const auto [lo, hi] = tree_rate_interval();
      if (lo <= hi) {
        d1_ = hi;
        leaf();
      }
      return;
    }
    const auto& d = demands_[q];
    auto& cov1 = per_segment_[static_cast<std::size_t>(d.segment)];
    auto& cov2 = per_segment2_[static_cast<std::size_t>(d.segment)];
    const auto& options = paths_.get(d.from, d.to);
    for (std::size_t a = 0; a < options.size(); ++a) {
      const LinkSet fresh1 = options[a].set & ~cov1;
      cov1 |= fresh1;
      for (std::size_t l = 0; l < kMaxLinks; ++l) {
        if (fresh1.test(l)) ++use1_[l];
      }
      // The two trees are interchangeable; order them on the first demand.
      for (std::size_t b = q == 0 ? a : 0; b < options.size(); ++b) {
        const LinkSet fresh2 = options[b].set & ~cov2;
        cov2 |= fresh2;
        for (std::size_t l = 0; l < kMaxLinks; ++l) {
          if (fresh2.test(l)) ++use2_[l];
        }
        const auto [lo, hi] = tree_rate_interval();
        route_index_[q] = a;
        route_index2_[q] = b;
        if (lo <= hi) route_two(q + 1);
        for (std::size_t l = 0; l < kMaxLinks; ++l) {
          if (fresh2.test(l)) --use2_[l];
        }
        cov2 &= ~fresh2;
        if (stopped()) break;
      }
      for (std::size_t l = 0; l < kMaxLinks; ++l) {
        if (fresh1.test(l)) --use1_[l];
      }
      cov1 &= ~fresh1;
      if (stopped()) return;
    }
  }

  std::vector<int> encoding() const {
    std::vector<int> out(choice_.begin(), choice_.end());
    for (std::size_t idx : route_index_) out.push_back(static_cast<int>(idx));
    return out;
  }

  EmbeddingSolution materialize() const {
    EmbeddingSolution sol;
    sol.request = r_.id;
    std::map<std::pair<int, NodeId>, std::vector<NodeId>> served;
    for (std::size_t i = 1; i <= nv_; ++i) {
      for (std::size_t t = 0; t < nd_; ++t) served[{static_cast<int>(i), endpoint(i, t)}].push_back(r_.destinations[t]);
    }
    for (auto& [key, ts] : served) sol.placements.push_back(Placement{key.second, key.first, ts});
    auto& paths = const_cast<PathTable&>(paths_);
    const double d1 = trees_ == 1 ? r_.rate : d1_;
    const double d2 = r_.rate - d1;
    const bool tree1 = d1 > 0.0;
    const bool tree2 = trees_ == 2 && d2 > 1e-12 * r_.rate;
    for (std::size_t q = 0; q < demands_.size(); ++q) {
      const auto& d = demands_[q];
      for (NodeId t : d.destinations) {
        const auto& opts = paths.get(d.from, d.to);
        if (tree1) sol.segments.push_back(RoutedSegment{1, d.segment, t, opts[route_index_[q]].links, d1});
        if (tree2) {
          sol.segments.push_back(RoutedSegment{tree1 ? 2 : 1, d.segment, t, opts[route_index2_[q]].links, d2});
        }
      }
    }
    if (tree1) sol.tree_rates.push_back(d1);
    if (tree2) sol.tree_rates.push_back(d2);
    normalize(sol);
    return sol;
  }

  void leaf() {
    ++stats.leaves;
    const double cost = placement_cost_ + routing_cost_;
    if (goal == Goal::EnumerateAll) {
      if (visit && !visit(cost, materialize())) stop_ = true;
      return;
    }
    if (goal == Goal::FirstFeasible) {
      best_cost_ = cost;
      best_solution_ = materialize();
      have_best_ = true;
      stop_ = true;
      return;
    }
    auto code = encoding();
    const bool better = !have_best_ || cost_less(cost, best_cost_) ||
                        (!cost_less(best_cost_, cost) && code < best_code_);
    if (better) {
      best_cost_ = cost;
      best_code_ = std::move(code);
      best_solution_ = materialize();
      have_best_ = true;
    }
  }

  const SubstrateNetwork& net_;
  const ServiceRequest& r_;
  CostWeights w_;
  int trees_;
  std::size_t nv_;
  std::size_t nd_;
  PathTable paths_;
  std::vector<std::vector<NodeId>> candidates_;
  std::vector<NodeId> choice_;
  std::map<std::pair<NodeId, int>, int> instances_;
  std::vector<double> demand_;
  double placement_cost_ = 0.0;

  std::vector<Demand> demands_;
  std::vector<LinkSet> per_segment_;
  std::vector<LinkSet> per_segment2_;
  std::vector<int> use_count_;
  std::vector<int> use1_;
  std::vector<int> use2_;
  std::vector<std::size_t> route_index_;
  std::vector<std::size_t> route_index2_;
  double routing_cost_ = 0.0;
  double d1_ = 0.0;

  bool stop_ = false;
  bool have_best_ = false;
  double best_cost_ = kInfinity;
  std::vector<int> best_code_;
  EmbeddingSolution best_solution_;
};

std::optional<Failure> admissibility_failure(const SubstrateNetwork& net, const ServiceRequest& r) {
  for (const auto& f : r.chain) {
    bool any = false;
    for (NodeId n : net.nfv_nodes()) any |= n != r.source && net.node(n).admits(f.nf_type);
    if (!any) {
      std::ostringstream msg;
      msg << "no admissible NFV node for NF type " << f.nf_type;
      return fail(FailureKind::Infeasible, msg.str());
    }
  }
  return std::nullopt;
}

}  // namespace

Outcome<EmbeddingSolution> exact_single_path(const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w,
                                             const ExactLimits& limits, SearchMode mode, SearchStats* stats) {
  r.check(&net);
  check_weights(w.alpha, w.beta, "alpha, beta");
  if (auto f = check_limits(net, r, limits)) return *f;
  if (auto f = admissibility_failure(net, r)) return *f;
  Search search(net, r, w, limits, 1);
  search.mode = mode;
  search.run();
  if (stats) *stats = search.stats;
  if (search.overflow()) return fail(FailureKind::TooLarge, "simple-path enumeration exceeded its limit");
  if (!search.found()) return fail(FailureKind::Infeasible, "no placement and routing satisfies the capacities");
  auto sol = search.best();
  sol.total_cost = raw_cost(sol, net, r, w);
  return sol;
}

Outcome<EmbeddingSolution> exact_feasible(const SubstrateNetwork& net, const ServiceRequest& r, int max_trees,
                                          const ExactLimits& limits) {
  r.check(&net);
  if (max_trees < 1 || max_trees > 2) throw std::invalid_argument("exact feasibility supports 1 or 2 trees");
  if (auto f = check_limits(net, r, limits)) return *f;
  if (auto f = admissibility_failure(net, r)) return *f;
  for (int trees = 1; trees <= max_trees; ++trees) {
    Search search(net, r, CostWeights{}, limits, trees);
    search.goal = Search::Goal::FirstFeasible;
    search.run();
    if (search.overflow()) return fail(FailureKind::TooLarge, "simple-path enumeration exceeded its limit");
    if (search.found()) {
      auto sol = search.best();
      sol.total_cost = raw_cost(sol, net, r, CostWeights{});
      return sol;
    }
  }
  return fail(FailureKind::Infeasible, "no placement and routing satisfies the capacities");
}

namespace {

struct Option {
  double cost = 0.0;
  ResourceDelta usage;
  EmbeddingSolution solution;
};

}  // namespace

Outcome<MultiServiceResult> exact_multi_service(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests,
                                                CostWeights w, double a1, double a2, const ExactLimits& limits) {
  check_weights(w.alpha, w.beta, "alpha, beta");
  check_weights(a1, a2, "a1, a2");
  if (static_cast<int>(requests.size()) > limits.max_requests) {
    return fail(FailureKind::TooLarge, "too many requests for the exact multi-service search");
  }
  const std::size_t n = requests.size();

  // Every feasible single-tree embedding of each request on the untouched
  // residuals, cheapest first.
  std::vector<std::vector<Option>> options(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = requests[k];
    r.check(&net);
    if (auto f = check_limits(net, r, limits)) return *f;
    if (admissibility_failure(net, r)) continue;
    Search search(net, r, w, limits, 1);
    search.goal = Search::Goal::EnumerateAll;
    bool too_many = false;
    search.visit = [&](double cost, EmbeddingSolution&& sol) {
      if (options[k].size() >= limits.max_embeddings) {
        too_many = true;
        return false;
      }
      Option o;
      o.cost = cost;
      o.usage = resource_usage(sol, r, net.link_count());
      sol.total_cost = cost;
      o.solution = std::move(sol);
      options[k].push_back(std::move(o));
      return true;
    };
    search.run();
    if (search.overflow() || too_many) return fail(FailureKind::TooLarge, "embedding enumeration exceeded its limit");
    std::stable_sort(options[k].begin(), options[k].end(),
                     [](const Option& a, const Option& b) { return a.cost < b.cost; });
  }

  std::vector<double> value(n);
  for (std::size_t k = 0; k < n; ++k) value[k] = throughput(requests[k], a1, a2);

  struct Subset {
    unsigned mask;
    double value;
  };
  std::vector<Subset> subsets;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double v = 0.0;
    bool possible = true;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1u << k)) {
        v += value[k];
        possible &= !options[k].empty();
      }
    }
    if (possible) subsets.push_back({mask, v});
  }
  std::stable_sort(subsets.begin(), subsets.end(), [](const Subset& a, const Subset& b) { return a.value > b.value; });

  std::vector<double> link_res(net.residual_links().begin(), net.residual_links().end());
  std::vector<double> node_res(net.residual_nodes().begin(), net.residual_nodes().end());
  auto fits = [&](const ResourceDelta& d) {
    for (const auto& [l, a] : d.links) {
      if (a > link_res[static_cast<std::size_t>(l)] + capacity_tolerance(net.link(l).capacity)) return false;
    }
    for (const auto& [v, a] : d.nodes) {
      if (a > node_res[static_cast<std::size_t>(v)] + capacity_tolerance(net.node(v).processing_capacity)) return false;
    }
    return true;
  };
  auto apply = [&](const ResourceDelta& d, double sign) {
    for (const auto& [l, a] : d.links) link_res[static_cast<std::size_t>(l)] -= sign * a;
    for (const auto& [v, a] : d.nodes) node_res[static_cast<std::size_t>(v)] -= sign * a;
  };

  MultiServiceResult best;
  bool have = false;
  std::vector<std::size_t> best_pick;
  unsigned best_mask = 0;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    if (have && cost_less(subsets[s].value, best.throughput)) break;
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < n; ++k) {
      if (subsets[s].mask & (1u << k)) members.push_back(k);
    }
    // Cheapest option of each later member bounds the remaining cost.
    std::vector<double> tail(members.size() + 1, 0.0);
    for (std::size_t m = members.size(); m-- > 0;) tail[m] = tail[m + 1] + options[members[m]].front().cost;
    std::vector<std::size_t> pick(members.size(), 0);
    bool subset_found = false;
    double subset_best = kInfinity;
    std::vector<std::size_t> subset_pick;
    std::function<void(std::size_t, double)> dfs = [&](std::size_t m, double cost) {
      if (m == members.size()) {
        if (!subset_found || cost_less(cost, subset_best) || (!cost_less(subset_best, cost) && pick < subset_pick)) {
          subset_found = true;
          subset_best = cost;
          subset_pick = pick;
        }
        return;
      }
      const auto& opts = options[members[m]];
      for (std::size_t o = 0; o < opts.size(); ++o) {
        if (subset_found && cost_less(subset_best, cost + opts[o].cost + tail[m + 1])) break;
        if (!fits(opts[o].usage)) continue;
        apply(opts[o].usage, 1.0);
        pick[m] = o;
        dfs(m + 1, cost + opts[o].cost);
        apply(opts[o].usage, -1.0);
      }
    };
    dfs(0, 0.0);
    if (!subset_found) continue;
    if (!have || cost_less(best.throughput, subsets[s].value) || cost_less(subset_best, best.cost)) {
      have = true;
      best.throughput = subsets[s].value;
      best.cost = subset_best;
      best_pick = subset_pick;
      best_mask = subsets[s].mask;
    }
  }
  if (!have) return best;
  std::vector<std::pair<int, EmbeddingSolution>> chosen;
  for (std::size_t k = 0, m = 0; k < n; ++k) {
    if (best_mask & (1u << k)) chosen.emplace_back(requests[k].id, options[k][best_pick[m++]].solution);
  }
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [id, sol] : chosen) {
    best.accepted.push_back(id);
    best.solutions.push_back(std::move(sol));
  }
  return best;
}

RateSearch max_supported_rate(const SubstrateNetwork& net, const ServiceRequest& tmpl, int max_trees, Embedder embedder,
                              double tolerance, const ExactLimits& limits, const JprOptions& jpr) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
  if (max_trees < 1) throw std::invalid_argument("max_trees must be >= 1");
  RateSearch out;
  double hi = 0.0;
  for (LinkId l : net.out_links(tmpl.source)) hi += net.residual_link(l);
  if (!(hi > 0.0)) return out;

  auto feasible = [&](double rate) {
    ++out.probes;
    ServiceRequest r = tmpl;
    r.rate = rate;
    r.max_trees = max_trees;
    for (auto& f : r.chain) f.processing_demand = rate;
    if (embedder == Embedder::Jpr) return jpr_embed(net, r, jpr).ok();
    auto sol = exact_feasible(net, r, std::min(max_trees, 2), limits);
    if (!sol.ok() && sol.failure().kind == FailureKind::TooLarge) {
      throw std::invalid_argument("instance too large for the exact embedder: " + sol.failure().reason);
    }
    return sol.ok();
  };

  if (feasible(hi)) {
    out.rate = hi;
    return out;
  }
  double lo = 0.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.rate = lo;
  return out;
}

}  // namespace mcembed
