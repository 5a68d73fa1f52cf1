#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcembed/rng.hpp"
#include "mcembed/solution.hpp"
#include "oracles.hpp"

using namespace mcembed;

namespace {

// 0 - 1 - 2 - 3 with NFV nodes 1 and 2. Forward links are 0 (0->1),
// 2 (1->2) and 4 (2->3).
SubstrateNetwork line4(double link_cap = 2.0) { return fixture::line({0, 2, 2, 0}, link_cap); }

// f1 on node 1, f2 on node 2, destination 3.
EmbeddingSolution two_nf_solution(double rate) {
  EmbeddingSolution sol;
  sol.placements = {{1, 1, {3}}, {2, 2, {3}}};
  sol.segments = {{1, 0, 3, {0}, rate}, {1, 1, 3, {2}, rate}, {1, 2, 3, {4}, rate}};
  sol.tree_rates = {rate};
  return sol;
}

std::string first_violation(const EmbeddingSolution& sol, const SubstrateNetwork& net, const ServiceRequest& r) {
  auto v = validate_solution(sol, net, r);
  return v ? v->constraint : "ok";
}

}  // namespace

TEST(Cost, SingleLinkExample) {
  // Costed without validation: one link, one instance, d = 0.2, B = C = 2.
  auto net = fixture::line({0, 2}, 2.0);
  auto r = fixture::request(0, {1}, {0}, 0.2);
  EmbeddingSolution sol;
  sol.placements = {{1, 1, {1}}};
  sol.segments = {{1, 0, 1, {0}, 0.2}};
  sol.tree_rates = {0.2};
  EXPECT_NEAR(raw_cost(sol, net, r, {0.6, 0.4}), 0.70, 1e-12);
}

TEST(Cost, EmptySolutionIsZero) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0}, 0.2);
  EXPECT_EQ(evaluate_cost(EmbeddingSolution{}, net, r, {}), 0.0);
}

TEST(Cost, ValidChain) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  auto sol = two_nf_solution(0.2);
  EXPECT_EQ(first_violation(sol, net, r), "ok");
  EXPECT_NEAR(evaluate_cost(sol, net, r, {0.6, 0.4}), 0.6 * 3 * 1.1 + 0.4 * 2 * 0.1, 1e-12);
}

TEST(Cost, InvalidSolutionThrows) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  auto sol = two_nf_solution(0.2);
  sol.segments.pop_back();
  EXPECT_THROW(evaluate_cost(sol, net, r, {}), std::invalid_argument);
}

TEST(Cost, RandomSolutionsMatchIndependentSum) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto inst = fixture::tiny_instance(seed);
    // Partially consumed residuals exercise the residual denominators.
    ResourceDelta d;
    for (const auto& l : inst.net.links()) d.links.emplace_back(l.id, 0.1 * l.capacity);
    ASSERT_TRUE(inst.net.reserve(d).ok());
    Rng rng(seed);
    auto sol = fixture::random_solution(inst.net, inst.request, rng);
    if (!sol) continue;
    ++checked;
    EXPECT_NEAR(evaluate_cost(*sol, inst.net, inst.request, {0.6, 0.4}),
                oracle::embedding_cost(*sol, inst.net, inst.request, 0.6, 0.4), 1e-9);
  }
  EXPECT_GT(checked, 50);
}

TEST(LinkLoads, MulticastCopiesShareALink) {
  // 0 -> 1 then branching to 2 and to 3 via a star around node 1.
  SubstrateNetwork net;
  for (int i = 0; i < 4; ++i) net.add_node(NodeKind::Switch, 0.0, {}, {double(i), 0.0});
  net.add_link(0, 1, 1.0);
  net.add_link(1, 2, 1.0);
  net.add_link(1, 3, 1.0);
  auto r = fixture::request(0, {2, 3}, {}, 0.7);
  EmbeddingSolution sol;
  sol.segments = {{1, 0, 2, {0, 1}, 0.7}, {1, 0, 3, {0, 2}, 0.7}};
  sol.tree_rates = {0.7};
  EXPECT_EQ(first_violation(sol, net, r), "ok");
  auto load = link_loads(sol, net.link_count());
  EXPECT_DOUBLE_EQ(load[0], 0.7);
  EXPECT_DOUBLE_EQ(load[1], 0.7);
  EXPECT_DOUBLE_EQ(load[2], 0.7);
  EXPECT_NEAR(evaluate_cost(sol, net, r, {0.6, 0.4}), 0.6 * 3 * 1.7, 1e-12);
}

TEST(Validate, SwappedChainOrder) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  EmbeddingSolution sol;
  // f1 sits after f2 along the walk: segment 0 runs through f2's node.
  sol.placements = {{2, 1, {3}}, {1, 2, {3}}};
  sol.segments = {{1, 0, 3, {0}, 0.2}, {1, 1, 3, {3}, 0.2}, {1, 2, 3, {2, 4}, 0.2}};
  sol.tree_rates = {0.2};
  EXPECT_EQ(first_violation(sol, net, r), "chain order");
}

TEST(Validate, LinkOverAllocatedByEpsilon) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  ASSERT_TRUE(net.reserve({{{2, 2.0 - 0.2 + 1e-6}}, {}}).ok());
  EXPECT_EQ(first_violation(two_nf_solution(0.2), net, r), "link capacity");
}

TEST(Validate, NodeCapacity) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  ASSERT_TRUE(net.reserve({{}, {{1, 1.9}}}).ok());
  EXPECT_EQ(first_violation(two_nf_solution(0.2), net, r), "node capacity");
}

TEST(Validate, Admittability) {
  auto net = fixture::line({0, 2, 2, 0}, 2.0);
  auto r = fixture::request(0, {3}, {0, 7}, 0.2);
  EXPECT_EQ(first_violation(two_nf_solution(0.2), net, r), "admittability");
  auto sol = two_nf_solution(0.2);
  sol.placements[0].node = 0;  // a switch
  r = fixture::request(0, {3}, {0, 1}, 0.2);
  EXPECT_EQ(first_violation(sol, net, r), "admittability");
}

TEST(Validate, BoundaryPlacement) {
  auto net = fixture::line({2, 2, 2, 2}, 2.0);
  auto r = fixture::request(0, {3}, {0}, 0.2);
  EmbeddingSolution sol;
  sol.placements = {{0, 1, {3}}};
  sol.segments = {{1, 1, 3, {0, 2, 4}, 0.2}};
  sol.tree_rates = {0.2};
  EXPECT_EQ(first_violation(sol, net, r), "boundary placement");
  sol.placements = {{3, 1, {3}}};
  sol.segments = {{1, 0, 3, {0, 2, 4}, 0.2}};
  EXPECT_EQ(first_violation(sol, net, r), "boundary placement");
}

TEST(Validate, RatesAndTrees) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  auto sol = two_nf_solution(0.2);
  sol.tree_rates = {0.1};
  EXPECT_EQ(first_violation(sol, net, r), "rate requirement");
  sol = two_nf_solution(0.2);
  sol.tree_rates = {0.2, 0.0};
  EXPECT_EQ(first_violation(sol, net, r), "tree count");
  sol.tree_rates.clear();
  EXPECT_EQ(first_violation(sol, net, r), "tree count");
  sol = two_nf_solution(0.2);
  sol.segments[1].rate = 0.1;
  EXPECT_EQ(first_violation(sol, net, r), "rate requirement");
}

TEST(Validate, SplitOverTwoTrees) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2, 2);
  auto sol = two_nf_solution(0.2);
  sol.tree_rates = {0.2, 0.05};
  sol.segments[1].rate = 0.15;
  sol.segments.push_back({2, 1, 3, {2}, 0.05});
  EXPECT_EQ(first_violation(sol, net, r), "ok");
  EXPECT_NEAR(link_loads(sol, net.link_count())[2], 0.2, 1e-12);
}

TEST(Validate, BrokenWalkAndCoverage) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  auto sol = two_nf_solution(0.2);
  sol.segments[2].links = {5};
  EXPECT_EQ(first_violation(sol, net, r), "flow conservation");
  sol = two_nf_solution(0.2);
  sol.segments[2].links = {};
  EXPECT_EQ(first_violation(sol, net, r), "flow conservation");
  sol = two_nf_solution(0.2);
  sol.placements.pop_back();
  EXPECT_EQ(first_violation(sol, net, r), "one instance per pair");
  sol = two_nf_solution(0.2);
  sol.placements.push_back({1, 2, {3}});
  EXPECT_EQ(first_violation(sol, net, r), "one instance per pair");
  sol = two_nf_solution(0.2);
  sol.request = 5;
  EXPECT_EQ(first_violation(sol, net, r), "request");
}

TEST(Commit, ReservesLoadsAndInstances) {
  auto net = line4();
  auto r = fixture::request(0, {3}, {0, 1}, 0.2);
  auto id = commit(net, two_nf_solution(0.2), r);
  ASSERT_TRUE(id.ok());
  EXPECT_NEAR(net.residual_link(2), 1.8, 1e-12);
  EXPECT_NEAR(net.residual_node(1), 1.8, 1e-12);
  EXPECT_NEAR(net.residual_link(1), 2.0, 1e-12);
  net.release(*id);
  EXPECT_EQ(net.residual_link(2), 2.0);
}

TEST(Normalize, MergesInstancesAndOrdersSegments) {
  EmbeddingSolution sol;
  sol.placements = {{4, 1, {9}}, {2, 1, {5}}, {4, 1, {7}}};
  sol.segments = {{2, 0, 5, {}, 0.1}, {1, 1, 9, {}, 0.1}, {1, 0, 9, {}, 0.1}};
  normalize(sol);
  ASSERT_EQ(sol.placements.size(), 2u);
  EXPECT_EQ(sol.placements[1].node, 4);
  EXPECT_EQ(sol.placements[1].served, (std::vector<NodeId>{7, 9}));
  EXPECT_EQ(sol.segments[0].nf_index, 0);
  EXPECT_EQ(sol.segments[0].tree, 1);
  EXPECT_EQ(sol.segments[2].tree, 2);
}
