#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcembed/heuristic.hpp"
#include "mcembed/service.hpp"
#include "mcembed/solution.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

enum class AdmissionPolicy { SizeRanked, RandomOrder };

struct AdmissionDecision {
  int request = 0;
  bool accepted = false;
  EmbeddingSolution solution;  // empty when rejected
  std::string reason;          // failure description when rejected
};

struct AdmissionPlan {
  std::vector<int> order;                    // request ids in processing order
  std::vector<AdmissionDecision> decisions;  // same order
  double aggregate_throughput = 0.0;         // sum of R over accepted
  double node_utilization = 0.0;
  double link_utilization = 0.0;

  std::size_t accepted_count() const;
  double acceptance_ratio() const;  // 0 for an empty batch
};

struct AdmissionOptions {
  AdmissionPolicy policy = AdmissionPolicy::SizeRanked;
  std::uint64_t seed = 0;  // RandomOrder only
  double a1 = 0.5;
  double a2 = 0.5;
  JprOptions jpr;
};

// Request ids by descending size U, then descending R, then ascending id.
std::vector<int> rank_by_size(const std::vector<ServiceRequest>& requests, const SubstrateNetwork& net, double a1,
                              double a2);

// Embeds the batch one request at a time with JPR on the current residuals
// of `net`, reserving each accepted solution. Rejections leave the ledger
// untouched.
AdmissionPlan run_admission(SubstrateNetwork& net, const std::vector<ServiceRequest>& requests,
                            const AdmissionOptions& options = {});

// (processing, transmission) consumed by the plan's accepted solutions over
// the total NFV node and link capacity of `net`.
std::pair<double, double> utilization(const SubstrateNetwork& net, const AdmissionPlan& plan,
                                      const std::vector<ServiceRequest>& requests);

}  // namespace mcembed
