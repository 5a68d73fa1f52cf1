#include <gtest/gtest.h>

#include <set>

#include "external_solver.hpp"
#include "fixtures.hpp"
#include "mcembed/exact.hpp"
#include "mcembed/milp.hpp"
#include "oracles.hpp"

using namespace mcembed;

namespace {

std::vector<ServiceRequest> batch(const fixture::Instance& inst, std::uint64_t seed) {
  // The instance request plus a second one with a different shape.
  std::vector<ServiceRequest> out{inst.request};
  auto other = fixture::tiny_instance(seed + 1000).request;
  const int n = static_cast<int>(inst.net.node_count());
  other.id = 1;
  other.source = other.source % n;
  std::set<int> d;
  for (int t : other.destinations)
    if (t % n != other.source) d.insert(t % n);
  if (d.empty()) d.insert((other.source + 1) % n);
  other.destinations.assign(d.begin(), d.end());
  out.push_back(other);
  return out;
}

}  // namespace

TEST(Milp, SmallExampleCountsAndNames) {
  auto net = fixture::line({0, 2}, 1.0);
  auto r = fixture::request(0, {1}, {0}, 0.2);
  auto m = build_p1(net, r, {});
  EXPECT_EQ(m.family_counts()["yx"], 4u);
  EXPECT_TRUE(m.find("x_1_0_1_0"));
  EXPECT_TRUE(m.find("y_0_1_1_1_0"));

  auto net3 = fixture::line({0, 2, 0}, 1.0);
  auto lp = export_lp(build_p1(net3, fixture::request(0, {2}, {0}, 0.2), {}));
  EXPECT_NE(lp.find("x_3_0_1_0"), std::string::npos);
  EXPECT_NE(lp.find("Subject To"), std::string::npos);
  EXPECT_NE(lp.find("Binaries"), std::string::npos);
}

TEST(Milp, FamilyCountsMatchClosedForms) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    fixture::TinySpec spec;
    spec.max_trees = 1 + int(seed % 2);
    auto inst = fixture::tiny_instance(seed, spec);
    const auto reqs = batch(inst, seed);
    for (auto mode : {AdmittabilityMode::Reduced, AdmittabilityMode::Linearized, AdmittabilityMode::Literal}) {
      const bool lin = mode != AdmittabilityMode::Reduced;
      EXPECT_EQ(build_p1(inst.net, inst.request, {}, {mode}).family_counts(),
                oracle::milp_family_counts(inst.net, {inst.request}, "p1", lin))
          << "seed " << seed;
      EXPECT_EQ(build_p2(inst.net, reqs, 0.5, 0.5, {mode}).family_counts(),
                oracle::milp_family_counts(inst.net, reqs, "p2", lin))
          << "seed " << seed;
      EXPECT_EQ(build_p3(inst.net, reqs, {}, 0.5, 0.5, 0.1, {mode}).family_counts(),
                oracle::milp_family_counts(inst.net, reqs, "p3", lin))
          << "seed " << seed;
    }
  }
}

TEST(Milp, EveryVariableIsConstrained) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = fixture::tiny_instance(seed);
    for (const auto& m : {build_p1(inst.net, inst.request, {}, {AdmittabilityMode::Linearized}),
                          build_p3(inst.net, batch(inst, seed), {}, 0.5, 0.5, 0.0)}) {
      std::vector<bool> seen(m.variables().size(), false);
      for (const auto& c : m.constraints)
        for (const auto& t : c.terms) seen[t.var] = true;
      for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_TRUE(seen[k]) << m.variables()[k].name;
    }
  }
}

TEST(Milp, ExportIsDeterministic) {
  auto inst = fixture::tiny_instance(7);
  const auto reqs = batch(inst, 7);
  EXPECT_EQ(export_lp(build_p3(inst.net, reqs, {}, 0.5, 0.5, 1.0)),
            export_lp(build_p3(inst.net, reqs, {}, 0.5, 0.5, 1.0)));
  EXPECT_EQ(export_lp(build_p1(inst.net, inst.request, {})), export_lp(build_p1(inst.net, inst.request, {})));
}

TEST(Milp, EncodedOptimumSatisfiesRowsAndRoundTrips) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = fixture::tiny_instance(seed);
    auto best = exact_single_path(inst.net, inst.request, {});
    if (!best.ok()) continue;
    ++checked;
    auto m = build_p1(inst.net, inst.request, {});
    auto a = encode_assignment(m, {*best}, inst.net, {inst.request});
    EXPECT_EQ(check_assignment(m, a), std::nullopt) << "seed " << seed;
    EXPECT_NEAR(objective_value(m, a), best->total_cost, 1e-9);
    auto back = decode_solution(m, a, inst.net, {inst.request});
    ASSERT_TRUE(back.ok()) << back.failure().describe();
    ASSERT_EQ(back->size(), 1u);
    EXPECT_EQ(validate_solution(back->front(), inst.net, inst.request), std::nullopt);
    EXPECT_NEAR(back->front().total_cost, best->total_cost, 1e-9);
    EXPECT_EQ(back->front().placements.size(), best->placements.size());
  }
  EXPECT_GT(checked, 20);
}

TEST(Milp, DecodeRejectsYWithoutX) {
  auto net = fixture::line({0, 2, 0}, 1.0);
  auto r = fixture::request(0, {2}, {0}, 0.2);
  auto m = build_p1(net, r, {});
  auto best = exact_single_path(net, r, {});
  ASSERT_TRUE(best.ok());
  auto a = encode_assignment(m, {*best}, net, {r});
  a["x_0_0_1_0"] = 0.0;
  auto out = decode_solution(m, a, net, {r});
  ASSERT_FALSE(out.ok());
  EXPECT_EQ(out.failure().kind, FailureKind::DecodeError);
  EXPECT_NE(out.failure().reason.find("y exceeds x"), std::string::npos);
}

TEST(Milp, DecodeFlagsMissingAndFractionalValues) {
  auto net = fixture::line({0, 2, 0}, 1.0);
  auto r = fixture::request(0, {2}, {0}, 0.2);
  auto m = build_p1(net, r, {});
  auto best = exact_single_path(net, r, {});
  auto a = encode_assignment(m, {*best}, net, {r});
  auto b = a;
  b.erase("pi_1_0");
  EXPECT_FALSE(decode_solution(m, b, net, {r}).ok());
  b = a;
  b["z_1_1_0"] = 0.5;
  EXPECT_FALSE(decode_solution(m, b, net, {r}).ok());
}

TEST(Milp, AllZeroWithoutAcceptanceDecodesEmpty) {
  auto inst = fixture::tiny_instance(3);
  const auto reqs = batch(inst, 3);
  auto m = build_p2(inst.net, reqs, 0.5, 0.5);
  Assignment zero;
  for (const auto& v : m.variables()) zero[v.name] = 0.0;
  EXPECT_EQ(check_assignment(m, zero), std::nullopt);
  auto out = decode_solution(m, zero, inst.net, reqs);
  ASSERT_TRUE(out.ok());
  EXPECT_TRUE(out->empty());
}

TEST(Milp, MultiServiceEncodingOfExactOptimum) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto inst = fixture::tiny_instance(seed);
    const auto reqs = batch(inst, seed);
    auto best = exact_multi_service(inst.net, reqs, {}, 0.5, 0.5);
    if (!best.ok() || best->accepted.empty()) continue;
    ++checked;
    auto p2 = build_p2(inst.net, reqs, 0.5, 0.5);
    auto a = encode_assignment(p2, best->solutions, inst.net, reqs);
    EXPECT_EQ(check_assignment(p2, a), std::nullopt);
    EXPECT_NEAR(objective_value(p2, a), best->throughput, 1e-9);
    auto p3 = build_p3(inst.net, reqs, {}, 0.5, 0.5, best->throughput);
    auto a3 = encode_assignment(p3, best->solutions, inst.net, reqs);
    EXPECT_EQ(check_assignment(p3, a3), std::nullopt);
    EXPECT_NEAR(objective_value(p3, a3), best->cost, 1e-9);
    auto back = decode_solution(p3, a3, inst.net, reqs);
    ASSERT_TRUE(back.ok()) << back.failure().describe();
    EXPECT_EQ(back->size(), best->accepted.size());
  }
  EXPECT_GT(checked, 5);
}

TEST(Milp, LiteralAdmittabilityReadingIsInfeasibleWhenAnyNodeRejects) {
  // gz = 1 together with gz <= k forces every NFV node to admit every NF.
  auto inst = fixture::tiny_instance(5);
  auto m = build_p1(inst.net, inst.request, {}, {AdmittabilityMode::Literal});
  bool rejects = false;
  for (NodeId n : inst.net.nfv_nodes())
    for (const auto& f : inst.request.chain) rejects |= !inst.net.node(n).admits(f.nf_type);
  if (!rejects) GTEST_SKIP() << "instance admits everything";
  auto best = exact_single_path(inst.net, inst.request, {});
  ASSERT_TRUE(best.ok());
  auto a = encode_assignment(m, {*best}, inst.net, {inst.request});
  EXPECT_NE(check_assignment(m, a), std::nullopt);
}

TEST(MilpExternal, HighsOptimumMatchesExactSearch) {
  if (!external::available()) GTEST_SKIP() << "highspy not importable";
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    fixture::TinySpec spec;
    spec.grids = {{2, 2}, {2, 3}, {3, 2}};
    auto inst = fixture::tiny_instance(seed, spec);
    auto m = build_p1(inst.net, inst.request, {});
    auto res = external::solve(export_lp(m), "p1_" + std::to_string(seed));
    ASSERT_TRUE(res.has_value());
    auto best = exact_single_path(inst.net, inst.request, {});
    if (!best.ok()) {
      EXPECT_EQ(res->status, "infeasible") << "seed " << seed;
      continue;
    }
    ASSERT_EQ(res->status, "optimal") << "seed " << seed;
    ++solved;
    EXPECT_NEAR(res->objective, best->total_cost, 1e-6) << "seed " << seed;
    auto dec = decode_solution(m, res->values, inst.net, {inst.request});
    ASSERT_TRUE(dec.ok()) << dec.failure().describe();
    EXPECT_NEAR(dec->front().total_cost, res->objective, 1e-6);
  }
  EXPECT_GT(solved, 5);
}
