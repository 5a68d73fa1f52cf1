#include "mcembed/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace mcembed {

namespace {

template <class T>
T field(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IoError(std::string("field '") + key + "' has the wrong type");
  }
}

void check_version(const Json& doc) {
  if (doc.contains("version") && doc["version"] != kFormatVersion) {
    throw IoError("unsupported format version " + doc["version"].dump());
  }
}

}  // namespace

Json network_to_json(const SubstrateNetwork& net) {
  Json doc;
  doc["version"] = kFormatVersion;
  doc["meta"] = {{"seed", net.seed}, {"width", net.width}, {"height", net.height},
                 {"nf_type_count", net.nf_type_count}};
  doc["nodes"] = Json::array();
  for (const auto& n : net.nodes()) {
    Json j;
    j["id"] = n.id;
    j["kind"] = n.is_nfv() ? "nfv" : "switch";
    j["processing_capacity"] = n.processing_capacity;
    j["admittable"] = n.admittable;
    j["coord"] = {n.coord.x, n.coord.y};
    if (net.residual_node(n.id) != n.processing_capacity) j["residual"] = net.residual_node(n.id);
    doc["nodes"].push_back(std::move(j));
  }
  doc["links"] = Json::array();
  for (const auto& l : net.links()) {
    Json j;
    j["id"] = l.id;
    j["tail"] = l.tail;
    j["head"] = l.head;
    j["capacity"] = l.capacity;
    if (net.residual_link(l.id) != l.capacity) j["residual"] = net.residual_link(l.id);
    doc["links"].push_back(std::move(j));
  }
  return doc;
}

SubstrateNetwork network_from_json(const Json& doc) {
  check_version(doc);
  SubstrateNetwork net;
  try {
    const auto& meta = doc.contains("meta") ? doc["meta"] : Json::object();
    net.seed = meta.value("seed", std::uint64_t{0});
    net.width = meta.value("width", 0);
    net.height = meta.value("height", 0);
    net.nf_type_count = meta.value("nf_type_count", 0);
    const auto nodes = field<Json>(doc, "nodes");
    const auto links = field<Json>(doc, "links");
    if (!nodes.is_array() || !links.is_array()) throw IoError("nodes and links must be arrays");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto& j = nodes[k];
      if (field<int>(j, "id") != static_cast<int>(k)) throw IoError("node ids must be dense and in order");
      const auto kind = field<std::string>(j, "kind");
      if (kind != "nfv" && kind != "switch") throw IoError("unknown node kind " + kind);
      const auto coord = j.value("coord", std::vector<double>{0.0, 0.0});
      if (coord.size() != 2) throw IoError("coord must have two entries");
      net.add_node(kind == "nfv" ? NodeKind::Nfv : NodeKind::Switch, field<double>(j, "processing_capacity"),
                   j.value("admittable", std::vector<NfType>{}), {coord[0], coord[1]});
    }
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto& j = links[k];
      if (field<int>(j, "id") != static_cast<int>(k)) throw IoError("link ids must be dense and in order");
      net.add_link(field<int>(j, "tail"), field<int>(j, "head"), field<double>(j, "capacity"));
    }
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (nodes[k].contains("residual"))
        net.set_base_residual_node(static_cast<NodeId>(k), field<double>(nodes[k], "residual"));
    for (std::size_t k = 0; k < links.size(); ++k)
      if (links[k].contains("residual"))
        net.set_base_residual_link(static_cast<LinkId>(k), field<double>(links[k], "residual"));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid network: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid network: ") + e.what());
  }
  return net;
}

namespace {

Json request_to_json(const ServiceRequest& r) {
  Json j;
  j["id"] = r.id;
  j["source"] = r.source;
  j["destinations"] = r.destinations;
  j["chain"] = Json::array();
  for (const auto& f : r.chain) j["chain"].push_back({{"nf_type", f.nf_type}, {"processing_demand", f.processing_demand}});
  j["rate"] = r.rate;
  j["max_trees"] = r.max_trees;
  return j;
}

ServiceRequest request_from_json(const Json& j) {
  ServiceRequest r;
  r.id = field<int>(j, "id");
  r.source = field<int>(j, "source");
  r.destinations = field<std::vector<NodeId>>(j, "destinations");
  for (const auto& f : field<Json>(j, "chain")) r.chain.push_back({field<int>(f, "nf_type"), field<double>(f, "processing_demand")});
  r.rate = field<double>(j, "rate");
  r.max_trees = j.value("max_trees", 1);
  try {
    r.check();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid request: ") + e.what());
  }
  return r;
}

}  // namespace

Json requests_to_json(const std::vector<ServiceRequest>& requests) {
  Json doc;
  doc["version"] = kFormatVersion;
  doc["requests"] = Json::array();
  for (const auto& r : requests) doc["requests"].push_back(request_to_json(r));
  return doc;
}

std::vector<ServiceRequest> requests_from_json(const Json& doc) {
  check_version(doc);
  std::vector<ServiceRequest> out;
  if (doc.is_object() && doc.contains("requests")) {
    for (const auto& j : doc["requests"]) out.push_back(request_from_json(j));
  } else {
    out.push_back(request_from_json(doc));
  }
  return out;
}

Json solution_to_json(const EmbeddingSolution& sol) {
  Json j;
  j["request"] = sol.request;
  j["placements"] = Json::array();
  for (const auto& p : sol.placements)
    j["placements"].push_back({{"node", p.node}, {"nf_index", p.nf_index}, {"served", p.served}});
  j["segments"] = Json::array();
  for (const auto& s : sol.segments) {
    j["segments"].push_back({{"tree", s.tree},
                             {"nf_index", s.nf_index},
                             {"destination", s.destination},
                             {"links", s.links},
                             {"rate", s.rate}});
  }
  j["tree_rates"] = sol.tree_rates;
  j["total_cost"] = sol.total_cost;
  return j;
}

EmbeddingSolution solution_from_json(const Json& j) {
  EmbeddingSolution sol;
  sol.request = field<int>(j, "request");
  for (const auto& p : field<Json>(j, "placements"))
    sol.placements.push_back({field<int>(p, "node"), field<int>(p, "nf_index"), field<std::vector<NodeId>>(p, "served")});
  for (const auto& s : field<Json>(j, "segments")) {
    sol.segments.push_back({field<int>(s, "tree"), field<int>(s, "nf_index"), field<int>(s, "destination"),
                            field<std::vector<LinkId>>(s, "links"), field<double>(s, "rate")});
  }
  sol.tree_rates = field<std::vector<double>>(j, "tree_rates");
  sol.total_cost = j.value("total_cost", 0.0);
  return sol;
}

Json solutions_to_json(const std::vector<EmbeddingSolution>& solutions) {
  Json doc;
  doc["version"] = kFormatVersion;
  doc["solutions"] = Json::array();
  for (const auto& s : solutions) doc["solutions"].push_back(solution_to_json(s));
  return doc;
}

std::vector<EmbeddingSolution> solutions_from_json(const Json& doc) {
  check_version(doc);
  std::vector<EmbeddingSolution> out;
  if (doc.is_object() && doc.contains("solutions")) {
    for (const auto& j : doc["solutions"]) out.push_back(solution_from_json(j));
  } else {
    out.push_back(solution_from_json(doc));
  }
  return out;
}

Json plan_to_json(const AdmissionPlan& plan) {
  Json doc;
  doc["version"] = kFormatVersion;
  doc["order"] = plan.order;
  doc["decisions"] = Json::array();
  for (const auto& d : plan.decisions) {
    Json j;
    j["request"] = d.request;
    j["accepted"] = d.accepted;
    if (d.accepted) {
      j["solution"] = solution_to_json(d.solution);
    } else {
      j["reason"] = d.reason;
    }
    doc["decisions"].push_back(std::move(j));
  }
  doc["accepted"] = plan.accepted_count();
  doc["acceptance_ratio"] = plan.acceptance_ratio();
  doc["aggregate_throughput"] = plan.aggregate_throughput;
  doc["node_utilization"] = plan.node_utilization;
  doc["link_utilization"] = plan.link_utilization;
  return doc;
}

Assignment assignment_from_text(const std::string& text) {
  Assignment out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("invalid solution document: ") + e.what());
    }
    const Json& values = doc.contains("values") ? doc["values"] : doc;
    if (!values.is_object()) throw IoError("solution values must be an object");
    for (const auto& [k, v] : values.items()) {
      if (!v.is_number()) throw IoError("non-numeric value for " + k);
      out[k] = v.get<double>();
    }
    return out;
  }
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    std::string name;
    double value = 0.0;
    if (!(ls >> name)) continue;
    if (!(ls >> value)) throw IoError("cannot read a value for " + name);
    out[name] = value;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("no such directory: " + dir.string());
  const fs::path tmp = dir / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path);
  }
}

}  // namespace mcembed
