#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mcembed/bench.hpp"

using namespace mcembed;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Scenario, CapacityRangesAndNfvCounts) {
  const struct {
    int which, nfv;
    double lo, hi;
  } rows[] = {{1, 47, 3e6, 8e6}, {2, 50, 4e6, 9e6}, {3, 53, 5e6, 10e6}};
  for (const auto& row : rows) {
    auto net = scenario_network(row.which, 11);
    EXPECT_EQ(net.node_count(), 100u);
    EXPECT_EQ(net.link_count(), 684u);
    EXPECT_EQ(net.nfv_nodes().size(), std::size_t(row.nfv));
    for (const auto& l : net.links()) {
      EXPECT_GE(l.capacity, row.lo);
      EXPECT_LE(l.capacity, row.hi);
    }
    for (NodeId n : net.nfv_nodes()) {
      EXPECT_GE(net.node(n).processing_capacity, row.lo);
      EXPECT_LE(net.node(n).processing_capacity, row.hi);
    }
  }
  EXPECT_EQ(scenario_network(1, 3, true).node_count(), 36u);
  EXPECT_THROW(scenario_network(4, 1), std::invalid_argument);
}

TEST(Scenario, SameSeedSameNetwork) {
  auto a = scenario_network(2, 5), b = scenario_network(2, 5);
  ASSERT_EQ(a.link_count(), b.link_count());
  for (std::size_t l = 0; l < a.link_count(); ++l) EXPECT_EQ(a.link(LinkId(l)).capacity, b.link(LinkId(l)).capacity);
  EXPECT_EQ(a.nfv_nodes(), b.nfv_nodes());
}

TEST(CostSweep, SinglePointGivesOneRecordPerSeed) {
  CostSweepOptions o;
  o.values = {3};
  o.seeds = {0, 1, 2};
  o.fast = true;
  auto rep = run_cost_sweep(o);
  ASSERT_EQ(rep.records.size(), 3u);  // exact is out of limits on the mesh
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(rep.records[k].seed, o.seeds[k]);
    EXPECT_EQ(rep.records[k].series, "jpr");
    EXPECT_EQ(rep.records[k].values[1], 1.0);
  }
  o.values.clear();
  EXPECT_THROW(run_cost_sweep(o), std::invalid_argument);
}

TEST(CostSweep, CsvShapeAndReproducibility) {
  CostSweepOptions o;
  o.axis = SweepAxis::Nfs;
  o.values = {1, 2, 3};
  o.seeds = {4, 5};
  o.fast = true;
  const auto a = run_cost_sweep(o), b = run_cost_sweep(o);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.to_json(), b.to_json());
  auto rows = lines(a.to_csv());
  ASSERT_EQ(rows.size(), 1u + 6u);
  EXPECT_EQ(rows[0], "seed,nfs,series,cost,feasible");
}

TEST(Report, SummaryRecomputesFromRecords) {
  ExperimentReport rep;
  rep.x_label = "x";
  rep.metrics = {"a", "b"};
  const double nan = std::nan("");
  rep.records = {{1, 1.0, "s", {1.0, nan}}, {2, 1.0, "s", {3.0, 5.0}}, {1, 2.0, "s", {2.0, 2.0}},
                 {1, 1.0, "t", {7.0, 7.0}}};
  auto sum = rep.summary();
  ASSERT_EQ(sum.size(), 3u);
  EXPECT_EQ(sum[0].series, "s");
  EXPECT_DOUBLE_EQ(sum[0].mean[0], 2.0);
  EXPECT_DOUBLE_EQ(sum[0].stddev[0], std::sqrt(2.0));
  EXPECT_EQ(sum[0].count[1], 1u);
  EXPECT_DOUBLE_EQ(sum[0].mean[1], 5.0);
  EXPECT_DOUBLE_EQ(sum[1].stddev[0], 0.0);
  EXPECT_EQ(sum[2].series, "t");
  auto csv = lines(rep.to_csv());
  EXPECT_EQ(csv[1], "1,1,s,1,");
  auto doc = nlohmann::json::parse(rep.to_json());
  EXPECT_EQ(doc["records"].size(), 4u);
  EXPECT_TRUE(doc["records"][0]["b"].is_null());
  EXPECT_EQ(lines(rep.summary_csv())[0], "x,series,n_a,mean_a,std_a,n_b,mean_b,std_b");
}

TEST(RateComparison, ExactEmbedderNeverViolatesDominance) {
  RateComparisonOptions o;
  for (std::uint64_t s = 0; s < 10; ++s) o.seeds.push_back(s);
  auto rep = run_rate_comparison(o);
  ASSERT_EQ(rep.records.size(), 10u);
  for (const auto& r : rep.records) {
    EXPECT_EQ(r.values[3], 0.0) << "seed " << r.seed;
    EXPECT_GE(r.values[1] + o.tolerance, r.values[0]);
  }
}

TEST(AdmissionStudy, RecordsPerSeedScenarioAndPolicy) {
  AdmissionStudyOptions o;
  o.seeds = {0, 1};
  o.scenarios = {1, 3};
  o.request_count = 6;
  o.fast = true;
  auto rep = run_admission_study(o);
  ASSERT_EQ(rep.records.size(), 8u);
  EXPECT_EQ(rep.records[0].series, "size");
  EXPECT_EQ(rep.records[1].series, "random");
  EXPECT_EQ(rep.to_csv(), run_admission_study(o).to_csv());
  for (const auto& r : rep.records) {
    EXPECT_GE(r.values[1], 0.0);
    EXPECT_LE(r.values[1], 1.0);
  }
}

TEST(AdmissionStudy, ZeroRequestsGiveZeroMetrics) {
  AdmissionStudyOptions o;
  o.seeds = {0};
  o.scenarios = {1};
  o.request_count = 0;
  o.fast = true;
  for (const auto& r : run_admission_study(o).records)
    for (double v : r.values) EXPECT_EQ(v, 0.0);
}
