#include "mcembed/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mcembed/milp.hpp"
#include "mcembed/rng.hpp"
#include "mcembed/service.hpp"

namespace mcembed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (auto s : seeds) out += (out.empty() ? "" : " ") + std::to_string(s);
  return out;
}

}  // namespace

std::vector<SummaryRow> ExperimentReport::summary() const {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<std::vector<double>>> samples;
  for (const auto& rec : records) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SummaryRow& r) { return r.x == rec.x && r.series == rec.series; });
    std::size_t k = static_cast<std::size_t>(it - rows.begin());
    if (it == rows.end()) {
      rows.push_back({rec.x, rec.series, {}, {}, {}});
      samples.emplace_back(metrics.size());
    }
    for (std::size_t m = 0; m < metrics.size(); ++m)
      if (m < rec.values.size() && !std::isnan(rec.values[m])) samples[k][m].push_back(rec.values[m]);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (const auto& v : samples[k]) {
      const double n = static_cast<double>(v.size());
      double mean = kNaN, sd = kNaN;
      if (!v.empty()) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= n;
        sd = 0.0;
        if (v.size() > 1) {
          for (double x : v) sd += (x - mean) * (x - mean);
          sd = std::sqrt(sd / (n - 1.0));
        }
      }
      rows[k].count.push_back(v.size());
      rows[k].mean.push_back(mean);
      rows[k].stddev.push_back(sd);
    }
  }
  return rows;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "seed," << csv_field(x_label) << ",series";
  for (const auto& m : metrics) os << ',' << csv_field(m);
  os << '\n';
  for (const auto& r : records) {
    os << r.seed << ',' << num(r.x) << ',' << csv_field(r.series);
    for (std::size_t m = 0; m < metrics.size(); ++m) os << ',' << (m < r.values.size() ? num(r.values[m]) : "");
    os << '\n';
  }
  return os.str();
}

std::string ExperimentReport::summary_csv() const {
  std::ostringstream os;
  os << csv_field(x_label) << ",series";
  for (const auto& m : metrics) os << ",n_" << m << ",mean_" << m << ",std_" << m;
  os << '\n';
  for (const auto& row : summary()) {
    os << num(row.x) << ',' << csv_field(row.series);
    for (std::size_t m = 0; m < metrics.size(); ++m)
      os << ',' << row.count[m] << ',' << num(row.mean[m]) << ',' << num(row.stddev[m]);
    os << '\n';
  }
  return os.str();
}

std::string ExperimentReport::to_json() const {
  using nlohmann::ordered_json;
  auto value = [](double x) { return std::isnan(x) ? ordered_json(nullptr) : ordered_json(x); };
  ordered_json doc;
  doc["id"] = id;
  doc["parameters"] = ordered_json::object();
  for (const auto& [k, v] : parameters) doc["parameters"][k] = v;
  doc["x_label"] = x_label;
  doc["metrics"] = metrics;
  doc["records"] = ordered_json::array();
  for (const auto& r : records) {
    ordered_json rec;
    rec["seed"] = r.seed;
    rec["x"] = r.x;
    rec["series"] = r.series;
    for (std::size_t m = 0; m < metrics.size(); ++m) rec[metrics[m]] = value(m < r.values.size() ? r.values[m] : kNaN);
    doc["records"].push_back(rec);
  }
  doc["summary"] = ordered_json::array();
  for (const auto& row : summary()) {
    ordered_json s;
    s["x"] = row.x;
    s["series"] = row.series;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      s[metrics[m]] = {{"n", row.count[m]}, {"mean", value(row.mean[m])}, {"std", value(row.stddev[m])}};
    }
    doc["summary"].push_back(s);
  }
  return doc.dump(2) + "\n";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng rng(seed);
  return rng.fork(salt + 1).index(1ULL << 62);
}

SubstrateNetwork scenario_network(int which, std::uint64_t seed, bool fast) {
  static const struct {
    double lo, hi;
    int nfv;
  } rows[] = {{3, 8, 47}, {4, 9, 50}, {5, 10, 53}};
  if (which < 1 || which > 3) throw std::invalid_argument("scenario must be 1, 2 or 3");
  const auto& row = rows[which - 1];
  const int side = fast ? 6 : 10;
  const int nfv = static_cast<int>(std::lround(row.nfv * (side * side) / 100.0));
  return build_mesh(side, side, nfv, {row.lo * 1e6, row.hi * 1e6}, 6, 0.8, seed);
}

ExperimentReport run_cost_sweep(const CostSweepOptions& o) {
  if (o.values.empty()) throw std::invalid_argument("cost sweep needs at least one axis value");
  if (!(o.rate > 0.0)) throw std::invalid_argument("cost sweep rate must be positive");
  const bool by_dest = o.axis == SweepAxis::Destinations;
  const int max_x = *std::max_element(o.values.begin(), o.values.end());
  if (*std::min_element(o.values.begin(), o.values.end()) < (by_dest ? 1 : 0)) {
    throw std::invalid_argument("cost sweep axis values out of range");
  }
  const int max_dest = by_dest ? max_x : o.fixed_destinations;
  const int max_nfs = by_dest ? o.fixed_nfs : max_x;

  ExperimentReport rep;
  rep.id = by_dest ? "cost-sweep-destinations" : "cost-sweep-nfs";
  rep.parameters = {{"axis", by_dest ? "destinations" : "nfs"},
                    {"fixed_destinations", std::to_string(o.fixed_destinations)},
                    {"fixed_nfs", std::to_string(o.fixed_nfs)},
                    {"held_axis", by_dest ? "nfs at fixed_nfs" : "destinations at fixed_destinations"},
                    {"rate_packets_per_s", num(o.rate)},
                    {"alpha", num(o.jpr.weights.alpha)},
                    {"beta", num(o.jpr.weights.beta)},
                    {"network", o.fast ? "scenario 1, 6x6" : "scenario 1, 10x10"},
                    {"seeds", join_seeds(o.seeds)}};
  rep.x_label = by_dest ? "destinations" : "nfs";
  rep.metrics = {"cost", "feasible"};

  for (auto seed : o.seeds) {
    const auto net = scenario_network(1, derive_seed(seed, 1), o.fast);
    const int n = static_cast<int>(net.node_count());
    if (max_dest + 1 > n) throw std::invalid_argument("too many destinations for the network");
    Rng rng(derive_seed(seed, 2));
    std::vector<NodeId> nodes(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) nodes[std::size_t(k)] = k;
    rng.shuffle(nodes);
    std::vector<NfType> types;
    for (int k = 0; k < max_nfs; ++k) types.push_back(static_cast<NfType>(rng.index(std::size_t(net.nf_type_count))));

    for (int x : o.values) {
      ServiceRequest r;
      r.id = 0;
      r.source = nodes[0];
      const int nd = by_dest ? x : o.fixed_destinations;
      const int nv = by_dest ? o.fixed_nfs : x;
      r.destinations.assign(nodes.begin() + 1, nodes.begin() + 1 + nd);
      std::sort(r.destinations.begin(), r.destinations.end());
      for (int k = 0; k < nv; ++k) r.chain.push_back({types[std::size_t(k)], o.rate});
      r.rate = o.rate;
      r.max_trees = 1;

      auto jpr = jpr_embed(net, r, o.jpr);
      rep.records.push_back({seed, double(x), "jpr", {jpr.ok() ? jpr->total_cost : kNaN, jpr.ok() ? 1.0 : 0.0}});
      if (o.with_exact) {
        auto ex = exact_single_path(net, r, o.jpr.weights, o.limits);
        if (ex.ok() || ex.failure().kind != FailureKind::TooLarge) {
          rep.records.push_back({seed, double(x), "exact", {ex.ok() ? ex->total_cost : kNaN, ex.ok() ? 1.0 : 0.0}});
        }
      }
      if (!o.lp_dir.empty()) {
        std::filesystem::create_directories(o.lp_dir);
        const auto path = std::filesystem::path(o.lp_dir) /
                          (rep.x_label + "_" + std::to_string(x) + "_seed" + std::to_string(seed) + ".lp");
        std::ofstream(path) << export_lp(build_p1(net, r, o.jpr.weights));
      }
    }
  }
  return rep;
}

SmallInstance small_instance(std::uint64_t seed, int max_nodes) {
  if (max_nodes < 4 || max_nodes > 8) throw std::invalid_argument("small instances have 4 to 8 nodes");
  std::vector<std::pair<int, int>> grids;
  for (auto g : {std::pair{2, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}})
    if (g.first * g.second <= max_nodes) grids.push_back(g);
  Rng rng(seed);
  const auto [w, h] = grids[rng.index(grids.size())];
  const int n = w * h;
  const int nfv = 1 + static_cast<int>(rng.index(std::size_t(n - 1)));
  SmallInstance out{build_mesh(w, h, nfv, {3e6, 8e6}, 2, 0.8, rng.index(1ULL << 62)), {}};
  auto& r = out.request;
  std::vector<NodeId> nodes(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) nodes[std::size_t(k)] = k;
  rng.shuffle(nodes);
  r.source = nodes[0];
  const int nd = 1 + static_cast<int>(rng.index(2));
  r.destinations.assign(nodes.begin() + 1, nodes.begin() + 1 + nd);
  std::sort(r.destinations.begin(), r.destinations.end());
  r.rate = 1e6;
  const int nv = static_cast<int>(rng.index(3));
  for (int k = 0; k < nv; ++k) r.chain.push_back({static_cast<NfType>(rng.index(2)), r.rate});
  return out;
}

ExperimentReport run_rate_comparison(const RateComparisonOptions& o) {
  if (!(o.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  ExperimentReport rep;
  rep.id = "rate-comparison";
  rep.parameters = {{"embedder", o.embedder == Embedder::Exact ? "exact" : "jpr"},
                    {"tolerance_packets_per_s", num(o.tolerance)},
                    {"max_nodes", std::to_string(o.max_nodes)},
                    {"seeds", join_seeds(o.seeds)}};
  rep.x_label = "nfs";
  rep.metrics = {"rate_j1", "rate_j2", "gain", "dominance_violation"};
  const std::string series = o.embedder == Embedder::Exact ? "exact" : "jpr";
  for (auto seed : o.seeds) {
    const auto inst = small_instance(seed, o.max_nodes);
    const auto a = max_supported_rate(inst.net, inst.request, 1, o.embedder, o.tolerance, o.limits, o.jpr);
    const auto b = max_supported_rate(inst.net, inst.request, 2, o.embedder, o.tolerance, o.limits, o.jpr);
    const double gain = a.rate > 0.0 ? b.rate / a.rate : kNaN;
    rep.records.push_back({seed, double(inst.request.chain.size()), series,
                           {a.rate, b.rate, gain, b.rate + o.tolerance < a.rate ? 1.0 : 0.0}});
  }
  return rep;
}

ExperimentReport run_admission_study(const AdmissionStudyOptions& o) {
  if (o.request_count < 0) throw std::invalid_argument("request count must be non-negative");
  ExperimentReport rep;
  rep.id = "admission";
  rep.parameters = {{"request_count", std::to_string(o.request_count)},
                    {"max_trees", std::to_string(o.max_trees)},
                    {"network", o.fast ? "6x6" : "10x10"},
                    {"a1", num(o.admission.a1)},
                    {"a2", num(o.admission.a2)},
                    {"alpha", num(o.admission.jpr.weights.alpha)},
                    {"beta", num(o.admission.jpr.weights.beta)},
                    {"seeds", join_seeds(o.seeds)}};
  rep.x_label = "scenario";
  rep.metrics = {"throughput", "acceptance_ratio", "node_utilization", "link_utilization", "accepted"};
  for (auto seed : o.seeds) {
    for (int which : o.scenarios) {
      const auto net = scenario_network(which, derive_seed(seed, 10 + std::uint64_t(which)), o.fast);
      RequestSpec spec;
      spec.count = o.request_count;
      spec.max_trees = o.max_trees;
      spec.seed = derive_seed(seed, 20 + std::uint64_t(which));
      const auto batch = generate_requests(net, spec);
      for (auto policy : {AdmissionPolicy::SizeRanked, AdmissionPolicy::RandomOrder}) {
        auto copy = net;
        auto opts = o.admission;
        opts.policy = policy;
        opts.seed = derive_seed(seed, 30 + std::uint64_t(which));
        const auto plan = run_admission(copy, batch, opts);
        rep.records.push_back({seed, double(which), policy == AdmissionPolicy::SizeRanked ? "size" : "random",
                               {plan.aggregate_throughput, plan.acceptance_ratio(), plan.node_utilization,
                                plan.link_utilization, double(plan.accepted_count())}});
      }
    }
  }
  return rep;
}

}  // namespace mcembed
