#include "mcembed/admission.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mcembed/rng.hpp"

namespace mcembed {

std::size_t AdmissionPlan::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(decisions.begin(), decisions.end(), [](const auto& d) { return d.accepted; }));
}

double AdmissionPlan::acceptance_ratio() const {
  if (decisions.empty()) return 0.0;
  return static_cast<double>(accepted_count()) / static_cast<double>(decisions.size());
}

std::vector<int> rank_by_size(const std::vector<ServiceRequest>& requests, const SubstrateNetwork& net, double a1,
                              double a2) {
  check_weights(a1, a2, "a1/a2");
  struct Key {
    double u, r;
    int id;
  };
  std::vector<Key> keys;
  keys.reserve(requests.size());
  for (const auto& r : requests) keys.push_back({size_score(net, r, a1, a2), throughput(r, a1, a2), r.id});
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.u != b.u) return a.u > b.u;
    if (a.r != b.r) return a.r > b.r;
    return a.id < b.id;
  });
  std::vector<int> out;
  for (const auto& k : keys) out.push_back(k.id);
  return out;
}

AdmissionPlan run_admission(SubstrateNetwork& net, const std::vector<ServiceRequest>& requests,
                            const AdmissionOptions& options) {
  check_weights(options.a1, options.a2, "a1/a2");
  std::map<int, const ServiceRequest*> by_id;
  for (const auto& r : requests) {
    if (!by_id.emplace(r.id, &r).second) throw std::invalid_argument("duplicate request id " + std::to_string(r.id));
  }

  AdmissionPlan plan;
  if (options.policy == AdmissionPolicy::SizeRanked) {
    plan.order = rank_by_size(requests, net, options.a1, options.a2);
  } else {
    for (const auto& r : requests) plan.order.push_back(r.id);
    Rng rng(options.seed);
    rng.shuffle(plan.order);
  }

  for (int id : plan.order) {
    const auto& r = *by_id.at(id);
    AdmissionDecision d;
    d.request = id;
    auto sol = jpr_embed(net, r, options.jpr);
    if (sol.ok()) {
      auto reservation = commit(net, *sol, r);
      if (reservation.ok()) {
        d.accepted = true;
        d.solution = std::move(sol).value();
        plan.aggregate_throughput += throughput(r, options.a1, options.a2);
      } else {
        d.reason = reservation.failure().describe();
      }
    } else {
      d.reason = sol.failure().describe();
    }
    plan.decisions.push_back(std::move(d));
  }
  std::tie(plan.node_utilization, plan.link_utilization) = utilization(net, plan, requests);
  return plan;
}

std::pair<double, double> utilization(const SubstrateNetwork& net, const AdmissionPlan& plan,
                                      const std::vector<ServiceRequest>& requests) {
  double node_total = 0.0, link_total = 0.0;
  for (const auto& n : net.nodes())
    if (n.is_nfv()) node_total += n.processing_capacity;
  for (const auto& l : net.links()) link_total += l.capacity;

  double node_used = 0.0, link_used = 0.0;
  for (const auto& d : plan.decisions) {
    if (!d.accepted) continue;
    auto it = std::find_if(requests.begin(), requests.end(), [&](const auto& r) { return r.id == d.request; });
    if (it == requests.end()) throw std::invalid_argument("plan references an unknown request");
    const auto usage = resource_usage(d.solution, *it, net.link_count());
    for (const auto& [n, v] : usage.nodes) node_used += v;
    for (const auto& [l, v] : usage.links) link_used += v;
  }
  return {node_total > 0.0 ? node_used / node_total : 0.0, link_total > 0.0 ? link_used / link_total : 0.0};
}

}  // namespace mcembed
