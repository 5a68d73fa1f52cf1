#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcembed/admission.hpp"
#include "mcembed/exact.hpp"
#include "mcembed/heuristic.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

// One run: a seed, an x-axis value and a series (embedder or policy), with
// one value per report metric. NaN marks "no value" (e.g. infeasible).
struct RunRecord {
  std::uint64_t seed = 0;
  double x = 0.0;
  std::string series;
  std::vector<double> values;
};

struct SummaryRow {
  double x = 0.0;
  std::string series;
  std::vector<std::size_t> count;  // non-NaN values per metric
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation, 0 for one value
};

struct ExperimentReport {
  std::string id;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::string x_label;
  std::vector<std::string> metrics;
  std::vector<RunRecord> records;

  // Grouped by (x, series) in order of first appearance in `records`.
  std::vector<SummaryRow> summary() const;
  // Header "seed,<x_label>,series,<metrics>", one row per record.
  std::string to_csv() const;
  std::string summary_csv() const;
  std::string to_json() const;
};

// 10x10 mesh (6x6 when fast) with the NFV share and capacity range of
// scenario 1, 2 or 3: U(3,8)/47, U(4,9)/50, U(5,10)/53 in Mpacket/s.
SubstrateNetwork scenario_network(int which, std::uint64_t seed, bool fast = false);

// Sub-seed for (seed, salt); keeps independent streams per experiment part.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

enum class SweepAxis { Destinations, Nfs };

struct CostSweepOptions {
  SweepAxis axis = SweepAxis::Destinations;
  std::vector<int> values;           // axis values; the other axis is held at its minimum
  int fixed_destinations = 3;        // used when sweeping Nfs
  int fixed_nfs = 2;                 // used when sweeping Destinations
  double rate = 0.2e6;               // d-bar, packet/s
  std::vector<std::uint64_t> seeds;
  bool fast = false;
  bool with_exact = true;            // add "exact" records when within limits
  std::string lp_dir;                // non-empty: write a p1 LP per (seed, x)
  JprOptions jpr;
  ExactLimits limits;
};

// Per seed one scenario-1 network and one request family: the request for
// axis value x uses the first x destinations (or NFs) of a fixed draw, so
// the sweep is nested.
ExperimentReport run_cost_sweep(const CostSweepOptions& options);

struct RateComparisonOptions {
  Embedder embedder = Embedder::Exact;
  std::vector<std::uint64_t> seeds;  // one instance per seed
  double tolerance = 1e3;            // packet/s
  int max_nodes = 6;                 // instance size cap
  ExactLimits limits;
  JprOptions jpr;
};

// Tiny instance used by the rate comparison: a mesh of at most max_nodes
// (4..8) nodes with scenario-1 capacities and a request with |V| <= 2,
// |D| <= 2.
struct SmallInstance {
  SubstrateNetwork net;
  ServiceRequest request;
};
SmallInstance small_instance(std::uint64_t seed, int max_nodes = 8);

// Max supported rate with J = 1 and J = 2 per instance. Metrics: rate_j1,
// rate_j2, gain, dominance_violation (1 when J = 2 falls below J = 1 by more
// than the tolerance). x is |V|.
ExperimentReport run_rate_comparison(const RateComparisonOptions& options);

struct AdmissionStudyOptions {
  std::vector<int> scenarios{1, 2, 3};
  std::vector<std::uint64_t> seeds;
  int request_count = 35;
  int max_trees = 2;
  bool fast = false;  // 6x6 mesh
  AdmissionOptions admission;  // weights; policy and seed are set per run
};

// SizeRanked and RandomOrder on the same network and batch per
// (seed, scenario). Metrics: throughput, acceptance_ratio,
// node_utilization, link_utilization, accepted.
ExperimentReport run_admission_study(const AdmissionStudyOptions& options);

}  // namespace mcembed
