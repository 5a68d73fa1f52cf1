#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcembed/admission.hpp"
#include "mcembed/bench.hpp"
#include "mcembed/exact.hpp"
#include "mcembed/heuristic.hpp"
#include "mcembed/io.hpp"
#include "mcembed/milp.hpp"
#include "mcembed/service.hpp"
#include "mcembed/solution.hpp"
#include "mcembed/substrate.hpp"

using namespace mcembed;

namespace {

constexpr double kMega = 1e6;

enum Exit { kOk = 0, kFailed = 1, kUsage = 2 };

// Bad flag values found after CLI11 is done parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An embedding or validation outcome that ends the command with exit 1.
struct CommandFailure {
  std::string kind;
  std::string message;
};

void report_error(const std::string& kind, const std::string& message) {
  Json line{{"error", kind}, {"message", message}};
  std::cerr << line.dump() << '\n';
}

void emit(const Json& doc, const std::string& path) {
  const auto text = doc.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

CommandFailure failed(const Failure& f) { return {to_string(f.kind), f.describe()}; }

const ServiceRequest& pick_request(const std::vector<ServiceRequest>& reqs, int id) {
  if (reqs.empty()) throw UsageError("the request file holds no requests");
  if (id < 0) return reqs.front();
  for (const auto& r : reqs)
    if (r.id == id) return r;
  throw UsageError("no request with id " + std::to_string(id));
}

AdmittabilityMode parse_adm(const std::string& s) {
  if (s == "reduced") return AdmittabilityMode::Reduced;
  if (s == "linearized") return AdmittabilityMode::Linearized;
  if (s == "literal") return AdmittabilityMode::Literal;
  throw UsageError("unknown admittability mode " + s);
}

const char* adm_name(AdmittabilityMode m) {
  switch (m) {
    case AdmittabilityMode::Reduced: return "reduced";
    case AdmittabilityMode::Linearized: return "linearized";
    case AdmittabilityMode::Literal: return "literal";
  }
  return "reduced";
}

MilpModel build_model(const std::string& problem, const SubstrateNetwork& net, const std::vector<ServiceRequest>& reqs,
                      CostWeights w, double a1, double a2, double r_star, const MilpOptions& opts) {
  if (problem == "p1") {
    if (reqs.size() != 1) throw UsageError("p1 takes exactly one request");
    return build_p1(net, reqs.front(), w, opts);
  }
  if (problem == "p2") return build_p2(net, reqs, a1, a2, opts);
  if (problem == "p3") return build_p3(net, reqs, w, a1, a2, r_star, opts);
  throw UsageError("unknown problem " + problem);
}

void write_report(const ExperimentReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir);
  const fs::path base(dir);
  write_file_atomic((base / (rep.id + ".csv")).string(), rep.to_csv());
  write_file_atomic((base / (rep.id + "_summary.csv")).string(), rep.summary_csv());
  write_file_atomic((base / (rep.id + ".json")).string(), rep.to_json());
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int n) {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < n; ++k) out.push_back(first + static_cast<std::uint64_t>(k));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicast NF chain embedding"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  double alpha = 0.6, beta = 0.4, a1 = 0.5, a2 = 0.5;
  auto add_weights = [&](CLI::App* sub) {
    sub->add_option("--alpha", alpha, "link cost weight")->capture_default_str();
    sub->add_option("--beta", beta, "processing cost weight")->capture_default_str();
  };
  auto add_size_weights = [&](CLI::App* sub) {
    sub->add_option("--a1", a1, "rate weight in R")->capture_default_str();
    sub->add_option("--a2", a2, "chain length weight in R")->capture_default_str();
  };

  std::string net_path, req_path, out_path, sol_path;
  int request_id = -1;
  std::uint64_t seed = 0;

  // gen-net
  auto* gen_net = app.add_subcommand("gen-net", "generate a mesh substrate");
  int width = 10, height = 10, nfv = 47, nf_types = 6;
  double cap_min = 3.0, cap_max = 8.0, admit_prob = 0.8;
  gen_net->add_option("--width", width)->capture_default_str();
  gen_net->add_option("--height", height)->capture_default_str();
  gen_net->add_option("--nfv", nfv, "number of NFV nodes")->capture_default_str();
  gen_net->add_option("--cap-min", cap_min, "Mpacket/s")->capture_default_str();
  gen_net->add_option("--cap-max", cap_max, "Mpacket/s")->capture_default_str();
  gen_net->add_option("--nf-types", nf_types)->capture_default_str();
  gen_net->add_option("--admit-prob", admit_prob)->capture_default_str();
  gen_net->add_option("--seed", seed)->capture_default_str();
  gen_net->add_option("--out", out_path)->required();

  // gen-req
  auto* gen_req = app.add_subcommand("gen-req", "generate a request batch");
  int count = 35, max_trees = 1;
  std::vector<int> nf_choices{3, 4}, dest_choices{3, 4, 5};
  double rate_min = 1.5, rate_max = 3.5;
  std::string regions = "cross";
  gen_req->add_option("--count", count)->capture_default_str();
  gen_req->add_option("--nf-choices", nf_choices)->delimiter(',')->capture_default_str();
  gen_req->add_option("--dest-choices", dest_choices)->delimiter(',')->capture_default_str();
  gen_req->add_option("--rate-min", rate_min, "Mpacket/s")->capture_default_str();
  gen_req->add_option("--rate-max", rate_max, "Mpacket/s")->capture_default_str();
  gen_req->add_option("--regions", regions)->check(CLI::IsMember({"cross", "uniform"}))->capture_default_str();
  gen_req->add_option("--max-trees", max_trees)->capture_default_str();
  gen_req->add_option("--seed", seed)->capture_default_str();
  gen_req->add_option("--net", net_path)->required();
  gen_req->add_option("--out", out_path)->required();

  // embed
  auto* embed = app.add_subcommand("embed", "embed every request with JPR");
  std::size_t k_max = 16;
  embed->add_option("--net", net_path)->required();
  embed->add_option("--req", req_path)->required();
  add_weights(embed);
  embed->add_option("--k-max", k_max, "candidate paths for multipath")->capture_default_str();
  embed->add_option("--json-out", out_path, "solution document, stdout when omitted");

  // solve-exact
  auto* solve_exact = app.add_subcommand("solve-exact", "exact single-tree optimum per request");
  ExactLimits limits;
  std::string mode = "bnb";
  bool multi = false;
  solve_exact->add_option("--net", net_path)->required();
  solve_exact->add_option("--req", req_path)->required();
  add_weights(solve_exact);
  add_size_weights(solve_exact);
  solve_exact->add_option("--mode", mode)->check(CLI::IsMember({"bnb", "exhaustive"}))->capture_default_str();
  solve_exact->add_flag("--multi", multi, "joint throughput-then-cost optimum over the whole batch");
  solve_exact->add_option("--max-nodes", limits.max_nodes)->capture_default_str();
  solve_exact->add_option("--max-nfs", limits.max_nfs)->capture_default_str();
  solve_exact->add_option("--max-destinations", limits.max_destinations)->capture_default_str();
  solve_exact->add_option("--max-requests", limits.max_requests)->capture_default_str();
  solve_exact->add_option("--max-links", limits.max_links)->capture_default_str();
  solve_exact->add_option("--json-out", out_path);

  // max-rate
  auto* max_rate = app.add_subcommand("max-rate", "largest supported rate by bisection");
  std::string embedder = "exact";
  int trees = 1;
  double tol = 1e-3;
  max_rate->add_option("--net", net_path)->required();
  max_rate->add_option("--req", req_path)->required();
  max_rate->add_option("--id", request_id, "request id, first request when omitted");
  max_rate->add_option("--embedder", embedder)->check(CLI::IsMember({"exact", "jpr"}))->capture_default_str();
  max_rate->add_option("--j", trees)->check(CLI::IsMember({1, 2}))->capture_default_str();
  max_rate->add_option("--tol", tol, "Mpacket/s")->capture_default_str();
  add_weights(max_rate);
  max_rate->add_option("--json-out", out_path);

  // export-milp
  auto* export_milp = app.add_subcommand("export-milp", "write a MILP model as CPLEX LP");
  std::string problem = "p1", adm = "reduced", meta_path;
  double r_star = 0.0;
  export_milp->add_option("--problem", problem)->check(CLI::IsMember({"p1", "p2", "p3"}))->capture_default_str();
  export_milp->add_option("--net", net_path)->required();
  export_milp->add_option("--req", req_path)->required();
  export_milp->add_option("--id", request_id, "p1: request id, first request when omitted");
  export_milp->add_option("--rstar", r_star, "p3 throughput floor, in units of R")->capture_default_str();
  export_milp->add_option("--adm", adm)->check(CLI::IsMember({"reduced", "linearized", "literal"}))->capture_default_str();
  add_weights(export_milp);
  add_size_weights(export_milp);
  export_milp->add_option("--out", out_path)->required();
  export_milp->add_option("--meta", meta_path, "model metadata, <out>.meta.json when omitted");

  // decode
  auto* decode = app.add_subcommand("decode", "turn a solver assignment back into solutions");
  decode->add_option("--model-meta", meta_path)->required();
  decode->add_option("--sol", sol_path)->required();
  decode->add_option("--json-out", out_path);

  // admit
  auto* admit = app.add_subcommand("admit", "admit a request batch one by one");
  std::string policy = "size";
  admit->add_option("--net", net_path)->required();
  admit->add_option("--req-batch", req_path)->required();
  admit->add_option("--policy", policy)->check(CLI::IsMember({"size", "random"}))->capture_default_str();
  admit->add_option("--seed", seed)->capture_default_str();
  add_weights(admit);
  add_size_weights(admit);
  admit->add_option("--report", out_path)->required();

  // bench
  auto* bench = app.add_subcommand("bench", "experiment harness");
  bench->require_subcommand(1);
  std::string out_dir;
  bool fast = false, emit_lp = false;
  int seeds = -1;
  std::uint64_t first_seed = 0;
  auto add_bench_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", out_dir)->required();
    sub->add_flag("--fast", fast, "6x6 mesh and smaller batches");
    sub->add_option("--seeds", seeds, "number of seeds");
    sub->add_option("--first-seed", first_seed)->capture_default_str();
  };
  auto* cost_sweep = bench->add_subcommand("cost-sweep", "JPR (and exact) cost against |D| and |V|");
  std::string axis = "both";
  double sweep_rate = 0.2;
  add_bench_common(cost_sweep);
  cost_sweep->add_option("--axis", axis)->check(CLI::IsMember({"destinations", "nfs", "both"}))->capture_default_str();
  cost_sweep->add_option("--rate", sweep_rate, "Mpacket/s")->capture_default_str();
  cost_sweep->add_flag("--emit-lp", emit_lp, "write a p1 LP file per point");
  auto* rate_cmp = bench->add_subcommand("rate-cmp", "max supported rate, one tree against two");
  int max_nodes = 6;
  add_bench_common(rate_cmp);
  rate_cmp->add_option("--embedder", embedder)->check(CLI::IsMember({"exact", "jpr"}))->capture_default_str();
  rate_cmp->add_option("--tol", tol, "Mpacket/s")->capture_default_str();
  rate_cmp->add_option("--max-nodes", max_nodes)->check(CLI::Range(4, 8))->capture_default_str();
  auto* admission = bench->add_subcommand("admission", "SizeRanked against RandomOrder");
  int bench_requests = -1, bench_trees = 2;
  std::vector<int> scenarios{1, 2, 3};
  add_bench_common(admission);
  admission->add_option("--requests", bench_requests, "batch size (35, or 12 with --fast)");
  admission->add_option("--max-trees", bench_trees)->capture_default_str();
  admission->add_option("--scenarios", scenarios)->delimiter(',')->capture_default_str();
  add_size_weights(admission);
  add_weights(admission);

  // validate
  auto* validate = app.add_subcommand("validate", "check solutions against a network and requests");
  validate->add_option("--net", net_path)->required();
  validate->add_option("--req", req_path)->required();
  validate->add_option("--sol", sol_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what());
    return kUsage;
  }

  try {
    if (alpha < 0 || beta < 0 || std::abs(alpha + beta - 1.0) > 1e-9)
      throw UsageError("alpha and beta must be non-negative and sum to 1");
    if (a1 < 0 || a2 < 0 || std::abs(a1 + a2 - 1.0) > 1e-9)
      throw UsageError("a1 and a2 must be non-negative and sum to 1");
    const CostWeights weights{alpha, beta};
    std::optional<CommandFailure> failure;

    if (*gen_net) {
      if (cap_min <= 0 || cap_max < cap_min) throw UsageError("need 0 < cap-min <= cap-max");
      auto net = build_mesh(width, height, nfv, {cap_min * kMega, cap_max * kMega}, nf_types, admit_prob, seed);
      emit(network_to_json(net), out_path);
    } else if (*gen_req) {
      const auto net = network_from_json(read_json(net_path));
      RequestSpec spec;
      spec.count = count;
      spec.nf_count_choices = nf_choices;
      spec.dest_count_choices = dest_choices;
      spec.rate = {rate_min * kMega, rate_max * kMega};
      spec.regions = regions == "cross" ? RegionPolicy::CrossRegion : RegionPolicy::Uniform;
      spec.max_trees = max_trees;
      spec.seed = seed;
      emit(requests_to_json(generate_requests(net, spec)), out_path);
    } else if (*embed) {
      // Requests are embedded in file order, each on the residuals left by
      // the ones before it.
      auto net = network_from_json(read_json(net_path));
      const auto reqs = requests_from_json(read_json(req_path));
      JprOptions opts;
      opts.weights = weights;
      opts.k_max = k_max;
      std::vector<EmbeddingSolution> sols;
      for (const auto& r : reqs) {
        auto res = jpr_embed(net, r, opts);
        if (res) {
          if (auto c = commit(net, *res, r); !c) res = c.failure();
        }
        if (!res) {
          failure = failed(res.failure());
          break;
        }
        sols.push_back(std::move(res).value());
      }
      if (!failure) emit(solutions_to_json(sols), out_path);
    } else if (*solve_exact) {
      const auto net = network_from_json(read_json(net_path));
      const auto reqs = requests_from_json(read_json(req_path));
      if (multi) {
        auto res = exact_multi_service(net, reqs, weights, a1, a2, limits);
        if (!res) {
          failure = failed(res.failure());
        } else {
          auto doc = solutions_to_json(res->solutions);
          doc["accepted"] = res->accepted;
          doc["throughput"] = res->throughput;
          doc["cost"] = res->cost;
          emit(doc, out_path);
        }
      } else {
        const auto search = mode == "bnb" ? SearchMode::BranchAndBound : SearchMode::Exhaustive;
        std::vector<EmbeddingSolution> sols;
        for (const auto& r : reqs) {
          auto res = exact_single_path(net, r, weights, limits, search);
          if (!res) {
            failure = failed(res.failure());
            break;
          }
          sols.push_back(std::move(res).value());
        }
        if (!failure) emit(solutions_to_json(sols), out_path);
      }
    } else if (*max_rate) {
      const auto net = network_from_json(read_json(net_path));
      const auto reqs = requests_from_json(read_json(req_path));
      const auto& r = pick_request(reqs, request_id);
      if (tol <= 0) throw UsageError("tolerance must be positive");
      JprOptions jpr;
      jpr.weights = weights;
      const auto res = max_supported_rate(net, r, trees, embedder == "exact" ? Embedder::Exact : Embedder::Jpr,
                                          tol * kMega, ExactLimits{}, jpr);
      Json doc{{"request", r.id}, {"embedder", embedder}, {"max_trees", trees}, {"rate", res.rate},
               {"rate_mpps", res.rate / kMega}, {"probes", res.probes}};
      emit(doc, out_path);
    } else if (*export_milp) {
      const auto net = network_from_json(read_json(net_path));
      auto reqs = requests_from_json(read_json(req_path));
      if (problem == "p1") reqs = {pick_request(reqs, request_id)};
      MilpOptions opts;
      opts.admittability = parse_adm(adm);
      const auto model = build_model(problem, net, reqs, weights, a1, a2, r_star, opts);
      if (meta_path.empty()) meta_path = out_path + ".meta.json";
      Json meta;
      meta["version"] = kFormatVersion;
      meta["problem"] = problem;
      meta["admittability"] = adm_name(opts.admittability);
      meta["alpha"] = alpha;
      meta["beta"] = beta;
      meta["a1"] = a1;
      meta["a2"] = a2;
      meta["r_star"] = r_star;
      meta["variables"] = model.variables().size();
      meta["constraints"] = model.constraints.size();
      meta["network"] = network_to_json(net);
      meta["requests"] = requests_to_json(reqs);
      const auto lp = export_lp(model);
      write_file_atomic(out_path, lp);
      write_file_atomic(meta_path, meta.dump(2) + "\n");
    } else if (*decode) {
      const auto meta = read_json(meta_path);
      const auto net = network_from_json(meta.at("network"));
      const auto reqs = requests_from_json(meta.at("requests"));
      MilpOptions opts;
      opts.admittability = parse_adm(meta.value("admittability", std::string("reduced")));
      const auto model = build_model(meta.at("problem").get<std::string>(), net, reqs,
                                     {meta.value("alpha", 0.6), meta.value("beta", 0.4)}, meta.value("a1", 0.5),
                                     meta.value("a2", 0.5), meta.value("r_star", 0.0), opts);
      const auto text = read_file(sol_path);
      const auto values = assignment_from_text(text);
      auto res = decode_solution(model, values, net, reqs);
      if (!res) {
        failure = failed(res.failure());
      } else {
        const double obj = objective_value(model, values);
        std::optional<double> reported;
        if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
          const auto first = text[text.find_first_not_of(" \t\r\n")];
          if (first == '{') {
            const auto doc = Json::parse(text);
            if (doc.contains("objective") && doc["objective"].is_number()) reported = doc["objective"].get<double>();
          }
        }
        if (reported && std::abs(*reported - obj) > 1e-6 * std::max(1.0, std::abs(obj))) {
          failure = CommandFailure{"DecodeError", "DecodeError: objective " + std::to_string(obj) +
                                                      " differs from the reported " + std::to_string(*reported)};
        } else {
          auto doc = solutions_to_json(*res);
          doc["objective"] = obj;
          emit(doc, out_path);
        }
      }
    } else if (*admit) {
      auto net = network_from_json(read_json(net_path));
      const auto reqs = requests_from_json(read_json(req_path));
      AdmissionOptions opts;
      opts.policy = policy == "size" ? AdmissionPolicy::SizeRanked : AdmissionPolicy::RandomOrder;
      opts.seed = seed;
      opts.a1 = a1;
      opts.a2 = a2;
      opts.jpr.weights = weights;
      const auto plan = run_admission(net, reqs, opts);
      auto doc = plan_to_json(plan);
      doc["policy"] = policy;
      doc["seed"] = seed;
      emit(doc, out_path);
    } else if (*bench) {
      if (*cost_sweep) {
        const auto seed_list = seed_range(first_seed, seeds < 0 ? 10 : seeds);
        std::vector<SweepAxis> axes;
        if (axis != "nfs") axes.push_back(SweepAxis::Destinations);
        if (axis != "destinations") axes.push_back(SweepAxis::Nfs);
        for (auto ax : axes) {
          CostSweepOptions o;
          o.axis = ax;
          o.seeds = seed_list;
          o.fast = fast;
          o.rate = sweep_rate * kMega;
          o.jpr.weights = weights;
          const int lo = ax == SweepAxis::Destinations ? 3 : 2;
          const int hi = fast ? lo + 5 : lo + 11;
          for (int v = lo; v <= hi; ++v) o.values.push_back(v);
          if (emit_lp) {
            o.lp_dir = (std::filesystem::path(out_dir) / "lp").string();
            std::filesystem::create_directories(o.lp_dir);
          }
          write_report(run_cost_sweep(o), out_dir);
        }
      } else if (*rate_cmp) {
        RateComparisonOptions o;
        o.seeds = seed_range(first_seed, seeds < 0 ? 50 : seeds);
        o.embedder = embedder == "exact" ? Embedder::Exact : Embedder::Jpr;
        o.tolerance = tol * kMega;
        o.max_nodes = max_nodes;
        o.jpr.weights = weights;
        write_report(run_rate_comparison(o), out_dir);
      } else if (*admission) {
        AdmissionStudyOptions o;
        o.seeds = seed_range(first_seed, seeds < 0 ? (fast ? 5 : 20) : seeds);
        o.scenarios = scenarios;
        o.request_count = bench_requests >= 0 ? bench_requests : (fast ? 12 : 35);
        o.max_trees = bench_trees;
        o.fast = fast;
        o.admission.a1 = a1;
        o.admission.a2 = a2;
        o.admission.jpr.weights = weights;
        write_report(run_admission_study(o), out_dir);
      }
    } else if (*validate) {
      const auto net = network_from_json(read_json(net_path));
      const auto reqs = requests_from_json(read_json(req_path));
      const auto sols = solutions_from_json(read_json(sol_path));
      // Solutions are checked in file order, each against the residuals left
      // by the ones before it.
      SubstrateNetwork scratch = net;
      Json costs = Json::array();
      for (const auto& s : sols) {
        const ServiceRequest* r = nullptr;
        for (const auto& q : reqs)
          if (q.id == s.request) r = &q;
        if (!r) throw UsageError("solution for unknown request " + std::to_string(s.request));
        if (auto v = validate_solution(s, scratch, *r)) {
          failure = CommandFailure{"Invalid", "request " + std::to_string(r->id) + ": " + v->describe()};
          break;
        }
        costs.push_back(evaluate_cost(s, scratch, *r, weights));
        if (auto c = commit(scratch, s, *r); !c) {
          failure = CommandFailure{"Invalid", "request " + std::to_string(r->id) + ": " + c.failure().describe()};
          break;
        }
      }
      if (!failure) {
        Json doc{{"valid", true}, {"solutions", sols.size()}, {"costs", costs}};
        std::cout << doc.dump() << '\n';
      }
    }

    if (failure) {
      report_error(failure->kind, failure->message);
      return kFailed;
    }
    return kOk;
  } catch (const UsageError& e) {
    report_error("Usage", e.what());
  } catch (const IoError& e) {
    report_error("Io", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    report_error("Io", e.what());
  } catch (const nlohmann::json::exception& e) {
    report_error("Io", e.what());
  } catch (const std::invalid_argument& e) {
    report_error("Usage", e.what());
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
  }
  return kUsage;
}
