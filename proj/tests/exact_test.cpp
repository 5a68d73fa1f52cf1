#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mcembed/exact.hpp"
#include "mcembed/rng.hpp"
#include "oracles.hpp"

using namespace mcembed;

namespace {

SubstrateNetwork diamond(double top, double bottom, bool reverse = false) {
  SubstrateNetwork net;
  for (int i = 0; i < 4; ++i) net.add_node(NodeKind::Switch, 0.0, {}, {double(i), 0.0});
  net.add_link(0, 1, top);
  net.add_link(1, 3, top);
  net.add_link(0, 2, bottom);
  net.add_link(2, 3, bottom);
  if (reverse) {
    net.add_link(1, 0, top);
    net.add_link(3, 1, top);
    net.add_link(2, 0, bottom);
    net.add_link(3, 2, bottom);
  }
  return net;
}

// Per-link resource use of a single-tree solution, recomputed from segments.
std::map<int, double> oracle_link_use(const EmbeddingSolution& sol) {
  std::set<std::tuple<int, int, int>> used;
  std::map<int, double> out;
  for (const auto& s : sol.segments)
    for (int l : s.links)
      if (used.emplace(l, s.tree, s.nf_index).second) out[l] += s.rate;
  return out;
}

}  // namespace

TEST(ExactSinglePath, NoFunctionsIsShortestPath) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    fixture::TinySpec spec;
    spec.max_nfs = 0;
    spec.max_destinations = 1;
    auto inst = fixture::tiny_instance(seed, spec);
    const auto& r = inst.request;
    std::vector<double> w;
    for (const auto& l : inst.net.links()) {
      const double b = inst.net.residual_link(l.id);
      w.push_back(b >= r.rate ? 0.6 * (r.rate / b + 1.0) : kInfinity);
    }
    const double expected = oracle::floyd_warshall(inst.net, w)[std::size_t(r.source)][std::size_t(r.destinations[0])];
    auto sol = exact_single_path(inst.net, r, {});
    if (std::isinf(expected)) {
      EXPECT_FALSE(sol.ok());
      continue;
    }
    ASSERT_TRUE(sol.ok()) << sol.failure().describe();
    EXPECT_NEAR(sol->total_cost, expected, 1e-9);
  }
}

TEST(ExactSinglePath, LeafSourceForcesPlacementThenSteinerTree) {
  // Source 0 hangs off node 1, the only NFV node; destinations 3, 4, 5 sit
  // around a switch ring 2 - 3 - 4 - 5 - 2 with a hub link 1 - 2.
  SubstrateNetwork net;
  net.add_node(NodeKind::Switch, 0.0, {}, {});
  net.add_node(NodeKind::Nfv, 4.0, {0}, {});
  for (int i = 2; i < 6; ++i) net.add_node(NodeKind::Switch, 0.0, {}, {});
  auto both = [&](int a, int b) {
    net.add_link(a, b, 2.0);
    net.add_link(b, a, 2.0);
  };
  both(0, 1);
  both(1, 2);
  both(2, 3);
  both(3, 4);
  both(4, 5);
  both(5, 2);
  auto r = fixture::request(0, {3, 4, 5}, {0}, 0.5);
  auto sol = exact_single_path(net, r, {});
  ASSERT_TRUE(sol.ok()) << sol.failure().describe();
  for (const auto& p : sol->placements) EXPECT_EQ(p.node, 1);
  // Segment 0 is the single leaf link; segment 1 needs a Steiner tree on
  // {1, 3, 4, 5}: 1-2 plus three ring links.
  const double per_link = 0.6 * (0.5 / 2.0 + 1.0);
  EXPECT_NEAR(sol->total_cost, 5 * per_link + 0.4 * 0.5 / 4.0, 1e-12);
  EXPECT_NEAR(sol->total_cost, oracle::brute_force_optimum(net, r, 0.6, 0.4), 1e-12);
}

TEST(ExactSinglePath, MatchesBruteForce) {
  int feasible = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    fixture::TinySpec spec;
    const bool wide = seed % 2 == 1;
    spec.grids = wide ? std::vector<std::pair<int, int>>{{2, 3}} : std::vector<std::pair<int, int>>{{2, 2}};
    spec.max_nfs = wide ? 1 : 2;
    spec.max_destinations = wide ? 1 : 2;
    auto inst = fixture::tiny_instance(seed, spec);
    if (!wide && inst.request.chain.size() * inst.request.destinations.size() > 2) continue;
    const double expected = oracle::brute_force_optimum(inst.net, inst.request, 0.6, 0.4);
    auto sol = exact_single_path(inst.net, inst.request, {});
    if (std::isinf(expected)) {
      ASSERT_FALSE(sol.ok()) << "seed " << seed;
      EXPECT_EQ(sol.failure().kind, FailureKind::Infeasible);
      continue;
    }
    ASSERT_TRUE(sol.ok()) << "seed " << seed << ": " << sol.failure().describe();
    EXPECT_NEAR(sol->total_cost, expected, 1e-9 * expected) << "seed " << seed;
    ++feasible;
  }
  EXPECT_GT(feasible, 15);
}

TEST(ExactSinglePath, NoSampledSolutionBeatsIt) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = fixture::tiny_instance(seed);
    auto sol = exact_single_path(inst.net, inst.request, {});
    Rng rng(seed + 77);
    for (int k = 0; k < 10; ++k) {
      auto sample = fixture::random_solution(inst.net, inst.request, rng, 20);
      if (!sample) break;
      ASSERT_TRUE(sol.ok()) << "seed " << seed << " sampler found what the oracle missed";
      EXPECT_LE(sol->total_cost, oracle::embedding_cost(*sample, inst.net, inst.request, 0.6, 0.4) + 1e-9);
    }
    if (sol.ok()) {
      auto v = validate_solution(*sol, inst.net, inst.request);
      EXPECT_FALSE(v) << v->describe();
      EXPECT_NEAR(sol->total_cost, oracle::embedding_cost(*sol, inst.net, inst.request, 0.6, 0.4), 1e-9);
    }
  }
}

TEST(ExactSinglePath, BranchAndBoundMatchesExhaustive) {
  std::size_t pruned = 0;
  std::size_t full = 0;
  // Exhaustive routing enumeration is exponential in the demand count, so
  // the grids stay at six nodes.
  fixture::TinySpec spec;
  spec.grids = {{2, 2}, {2, 3}, {3, 2}};
  spec.max_nfs = 1;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = fixture::tiny_instance(seed, spec);
    SearchStats bb_stats, ex_stats;
    auto bb = exact_single_path(inst.net, inst.request, {}, {}, SearchMode::BranchAndBound, &bb_stats);
    auto ex = exact_single_path(inst.net, inst.request, {}, {}, SearchMode::Exhaustive, &ex_stats);
    ASSERT_EQ(bb.ok(), ex.ok()) << "seed " << seed;
    pruned += bb_stats.leaves;
    full += ex_stats.leaves;
    if (!bb.ok()) continue;
    EXPECT_EQ(bb->total_cost, ex->total_cost) << "seed " << seed;
    ASSERT_EQ(bb->placements.size(), ex->placements.size());
    for (std::size_t k = 0; k < bb->placements.size(); ++k) EXPECT_EQ(bb->placements[k].node, ex->placements[k].node);
    ASSERT_EQ(bb->segments.size(), ex->segments.size());
    for (std::size_t k = 0; k < bb->segments.size(); ++k) EXPECT_EQ(bb->segments[k].links, ex->segments[k].links);
  }
  EXPECT_LT(pruned, full);
}

TEST(ExactSinglePath, LimitsAndInfeasibility) {
  auto big = build_mesh(4, 4, 6, {1, 2}, 2, 1.0, 1);
  auto r = fixture::request(0, {15}, {0}, 0.1);
  auto sol = exact_single_path(big, r, {});
  ASSERT_FALSE(sol.ok());
  EXPECT_EQ(sol.failure().kind, FailureKind::TooLarge);

  auto net = fixture::line({0, 2, 0}, 1.0);
  auto thick = fixture::request(0, {2}, {0}, 1.5);
  sol = exact_single_path(net, thick, {});
  ASSERT_FALSE(sol.ok());
  EXPECT_EQ(sol.failure().kind, FailureKind::Infeasible);
  auto alien = fixture::request(0, {2}, {8}, 0.5);
  sol = exact_single_path(net, alien, {});
  ASSERT_FALSE(sol.ok());
  EXPECT_NE(sol.failure().reason.find("no admissible NFV node"), std::string::npos);
}

TEST(ExactFeasible, TwoTreesSplitAcrossDisjointPaths) {
  auto net = diamond(1.0, 1.0);
  auto r = fixture::request(0, {3}, {}, 1.5, 2);
  EXPECT_FALSE(exact_feasible(net, r, 1).ok());
  auto sol = exact_feasible(net, r, 2);
  ASSERT_TRUE(sol.ok()) << sol.failure().describe();
  EXPECT_EQ(sol->active_trees(), 2);
  EXPECT_FALSE(validate_solution(*sol, net, r));
}

TEST(ExactFeasible, TwoTreeSolutionsValidate) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    fixture::TinySpec spec;
    spec.rate_min = 0.6;
    spec.rate_max = 2.5;
    spec.max_trees = 2;
    auto inst = fixture::tiny_instance(seed, spec);
    auto one = exact_feasible(inst.net, inst.request, 1);
    auto two = exact_feasible(inst.net, inst.request, 2);
    if (one.ok()) EXPECT_TRUE(two.ok());
    if (two.ok()) {
      auto v = validate_solution(*two, inst.net, inst.request);
      EXPECT_FALSE(v) << "seed " << seed << ": " << v->describe();
    }
  }
}

TEST(MaxSupportedRate, Examples) {
  auto path = fixture::line({0, 0, 0}, 1.0);
  auto r = fixture::request(0, {2}, {}, 1.0);
  // Source out-capacity is 1, so the upper end of the bracket is feasible.
  EXPECT_NEAR(max_supported_rate(path, r, 1, Embedder::Exact, 1e-3).rate, 1.0, 1e-3);
  auto net = diamond(1.0, 1.0);
  auto d = fixture::request(0, {3}, {}, 1.0);
  EXPECT_NEAR(max_supported_rate(net, d, 1, Embedder::Exact, 1e-3).rate, 1.0, 1e-3);
  EXPECT_NEAR(max_supported_rate(net, d, 2, Embedder::Exact, 1e-3).rate, 2.0, 1e-3);
  auto both = diamond(1.0, 1.0, true);
  EXPECT_NEAR(max_supported_rate(both, d, 2, Embedder::Jpr, 1e-3).rate, 2.0, 1e-3);
  auto dead = fixture::request(0, {3}, {5}, 1.0);
  EXPECT_EQ(max_supported_rate(net, dead, 1, Embedder::Exact, 1e-3).rate, 0.0);
  EXPECT_THROW(max_supported_rate(net, d, 1, Embedder::Exact, 0.0), std::invalid_argument);
}

TEST(MaxSupportedRate, DominanceAndBracket) {
  const double tol = 1e-3;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    fixture::TinySpec spec;
    spec.grids = {{2, 2}, {2, 3}, {3, 2}};
    spec.max_nfs = 1;
    auto inst = fixture::tiny_instance(seed, spec);
    const double one = max_supported_rate(inst.net, inst.request, 1, Embedder::Exact, tol).rate;
    const double two = max_supported_rate(inst.net, inst.request, 2, Embedder::Exact, tol).rate;
    EXPECT_GE(two, one) << "seed " << seed;
    if (one <= 0.0) continue;
    auto probe = inst.request;
    probe.rate = one;
    for (auto& f : probe.chain) f.processing_demand = one;
    EXPECT_TRUE(exact_feasible(inst.net, probe, 1).ok());
    probe.rate = one + tol;
    for (auto& f : probe.chain) f.processing_demand = one + tol;
    EXPECT_FALSE(exact_feasible(inst.net, probe, 1).ok()) << "seed " << seed;
  }
}

TEST(MultiService, AmpleCapacityAcceptsAll) {
  auto net = build_mesh(2, 3, 3, {5, 5}, 2, 1.0, 4);
  std::vector<ServiceRequest> reqs{fixture::request(0, {5}, {0}, 0.2), fixture::request(1, {4}, {1}, 0.3),
                                   fixture::request(2, {3}, {}, 0.1)};
  for (int k = 0; k < 3; ++k) reqs[std::size_t(k)].id = k;
  auto res = exact_multi_service(net, reqs, {}, 0.5, 0.5);
  ASSERT_TRUE(res.ok());
  EXPECT_EQ(res->accepted, (std::vector<int>{0, 1, 2}));
  double total = 0.0;
  for (const auto& r : reqs) total += throughput(r, 0.5, 0.5);
  EXPECT_NEAR(res->throughput, total, 1e-12);
}

TEST(MultiService, OneOfTwoEqualRequestsTakesTheCheaper) {
  // Both requests need link 0 -> 1 at full capacity; the second also
  // crosses 1 -> 2.
  auto net = fixture::line({0, 0, 0}, 1.0);
  auto near = fixture::request(0, {1}, {}, 1.0);
  auto far = fixture::request(0, {2}, {}, 1.0);
  near.id = 3;
  far.id = 1;
  auto res = exact_multi_service(net, {far, near}, {}, 0.5, 0.5);
  ASSERT_TRUE(res.ok());
  EXPECT_EQ(res->accepted, (std::vector<int>{3}));
  EXPECT_NEAR(res->throughput, throughput(near, 0.5, 0.5), 1e-12);
  EXPECT_NEAR(res->cost, 0.6 * 2.0, 1e-12);
}

TEST(MultiService, MatchesSubsetEnumerationOracle) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto net = build_mesh(2, 2, 2, {0.5, 1.5}, 2, 1.0, seed);
    Rng rng(seed);
    std::vector<ServiceRequest> reqs;
    for (int k = 0; k < 3; ++k) {
      const int s = int(rng.index(4));
      const int t = (s + 1 + int(rng.index(3))) % 4;
      std::vector<int> types;
      if (rng.bernoulli(0.5)) types.push_back(int(rng.index(2)));
      auto r = fixture::request(s, {t}, types, rng.uniform(0.3, 1.2));
      r.id = k;
      reqs.push_back(r);
    }
    std::vector<std::vector<std::pair<EmbeddingSolution, double>>> all(3);
    for (int k = 0; k < 3; ++k)
      oracle::for_each_solution(net, reqs[std::size_t(k)], 0.6, 0.4,
                                [&](const EmbeddingSolution& s, double c) { all[std::size_t(k)].emplace_back(s, c); });
    double best_r = 0.0;
    double best_c = 0.0;
    for (unsigned mask = 1; mask < 8; ++mask) {
      std::vector<int> members;
      for (int k = 0; k < 3; ++k)
        if (mask & (1u << k)) members.push_back(k);
      std::function<void(std::size_t, std::map<int, double>, std::map<int, double>, double)> go =
          [&](std::size_t m, std::map<int, double> links, std::map<int, double> nodes, double cost) {
            if (m == members.size()) {
              double value = 0.0;
              for (int k : members) value += throughput(reqs[std::size_t(k)], 0.5, 0.5);
              if (value > best_r + 1e-12 || (std::abs(value - best_r) <= 1e-12 && cost < best_c)) {
                best_r = value;
                best_c = cost;
              }
              return;
            }
            const auto& r = reqs[std::size_t(members[m])];
            for (const auto& [sol, c] : all[std::size_t(members[m])]) {
              auto l2 = links;
              auto n2 = nodes;
              bool ok = true;
              for (auto [l, a] : oracle_link_use(sol)) ok &= (l2[l] += a) <= net.link(l).capacity + 1e-9;
              for (const auto& p : sol.placements)
                ok &= (n2[p.node] += r.chain[std::size_t(p.nf_index - 1)].processing_demand) <=
                      net.node(p.node).processing_capacity + 1e-9;
              if (ok) go(m + 1, l2, n2, cost + c);
            }
          };
      go(0, {}, {}, 0.0);
    }
    auto res = exact_multi_service(net, reqs, {}, 0.5, 0.5);
    ASSERT_TRUE(res.ok()) << res.failure().describe();
    EXPECT_NEAR(res->throughput, best_r, 1e-9) << "seed " << seed;
    EXPECT_NEAR(res->cost, best_c, 1e-9) << "seed " << seed;
  }
}

TEST(MultiService, TooManyRequests) {
  auto net = fixture::line({0, 0}, 1.0);
  std::vector<ServiceRequest> reqs(5, fixture::request(0, {1}, {}, 0.1));
  auto res = exact_multi_service(net, reqs, {}, 0.5, 0.5);
  ASSERT_FALSE(res.ok());
  EXPECT_EQ(res.failure().kind, FailureKind::TooLarge);
}
