#include "mcembed/substrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mcembed/rng.hpp"

namespace mcembed {

bool NodeRecord::admits(NfType type) const {
  return std::binary_search(admittable.begin(), admittable.end(), type);
}

NodeId SubstrateNetwork::add_node(NodeKind kind, double processing_capacity,
                                  std::vector<NfType> admittable, Point coord) {
  if (kind == NodeKind::Switch && (processing_capacity != 0.0 || !admittable.empty())) {
    throw std::invalid_argument("switch nodes carry no processing capacity or NF types");
  }
  if (kind == NodeKind::Nfv && !(processing_capacity > 0.0 && std::isfinite(processing_capacity))) {
    throw std::invalid_argument("NFV node needs a positive processing capacity");
  }
  std::sort(admittable.begin(), admittable.end());
  admittable.erase(std::unique(admittable.begin(), admittable.end()), admittable.end());

  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(NodeRecord{id, kind, processing_capacity, std::move(admittable), coord});
  out_.emplace_back();
  in_.emplace_back();
  base_node_.push_back(processing_capacity);
  residual_node_.push_back(processing_capacity);
  node_claims_.emplace_back();
  return id;
}

LinkId SubstrateNetwork::add_link(NodeId tail, NodeId head, double capacity) {
  if (!has_node(tail) || !has_node(head)) throw std::invalid_argument("link endpoint out of range");
  if (tail == head) throw std::invalid_argument("self loops are not allowed");
  if (!(capacity > 0.0 && std::isfinite(capacity))) {
    throw std::invalid_argument("link capacity must be positive");
  }
  if (find_link(tail, head)) throw std::invalid_argument("duplicate directed link");

  const LinkId id = static_cast<LinkId>(links_.size());
  links_.push_back(LinkRecord{id, tail, head, capacity});
  auto insert_sorted = [this](std::vector<LinkId>& list, LinkId l, bool by_head) {
    auto key = [&](LinkId x) { return by_head ? links_[x].head : links_[x].tail; };
    auto pos = std::lower_bound(list.begin(), list.end(), l,
                                [&](LinkId a, LinkId b) { return key(a) < key(b); });
    list.insert(pos, l);
  };
  insert_sorted(out_[static_cast<std::size_t>(tail)], id, true);
  insert_sorted(in_[static_cast<std::size_t>(head)], id, false);
  base_link_.push_back(capacity);
  residual_link_.push_back(capacity);
  link_claims_.emplace_back();
  return id;
}

std::optional<LinkId> SubstrateNetwork::find_link(NodeId tail, NodeId head) const {
  if (!has_node(tail)) return std::nullopt;
  for (LinkId l : out_[static_cast<std::size_t>(tail)]) {
    if (links_[static_cast<std::size_t>(l)].head == head) return l;
  }
  return std::nullopt;
}

std::vector<NodeId> SubstrateNetwork::nfv_nodes() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.is_nfv()) out.push_back(n.id);
  }
  return out;
}

void SubstrateNetwork::set_base_residual_node(NodeId n, double value) {
  const auto& rec = node(n);
  if (value < 0.0 || value > rec.processing_capacity) {
    throw std::invalid_argument("node residual outside [0, capacity]");
  }
  base_node_[static_cast<std::size_t>(n)] = value;
  recompute_node(n);
}

void SubstrateNetwork::set_base_residual_link(LinkId l, double value) {
  const auto& rec = link(l);
  if (value < 0.0 || value > rec.capacity) {
    throw std::invalid_argument("link residual outside [0, capacity]");
  }
  base_link_[static_cast<std::size_t>(l)] = value;
  recompute_link(l);
}

void SubstrateNetwork::recompute_node(NodeId n) {
  const auto idx = static_cast<std::size_t>(n);
  double v = base_node_[idx];
  for (const auto& [id, amount] : node_claims_[idx]) v -= amount;
  residual_node_[idx] = std::max(0.0, v);
}

void SubstrateNetwork::recompute_link(LinkId l) {
  const auto idx = static_cast<std::size_t>(l);
  double v = base_link_[idx];
  for (const auto& [id, amount] : link_claims_[idx]) v -= amount;
  residual_link_[idx] = std::max(0.0, v);
}

namespace {

template <class Id>
std::vector<std::pair<Id, double>> aggregate(const std::vector<std::pair<Id, double>>& items) {
  std::map<Id, double> acc;
  for (const auto& [id, amount] : items) {
    if (!(amount >= 0.0) || !std::isfinite(amount)) {
      throw std::invalid_argument("reservation amounts must be finite and non-negative");
    }
    acc[id] += amount;
  }
  std::vector<std::pair<Id, double>> out;
  for (const auto& [id, amount] : acc) {
    if (amount > 0.0) out.emplace_back(id, amount);
  }
  return out;
}

}  // namespace

Outcome<ReservationId> SubstrateNetwork::reserve(const ResourceDelta& delta) {
  Record rec{aggregate(delta.links), aggregate(delta.nodes)};
  for (const auto& [l, amount] : rec.links) {
    if (l < 0 || static_cast<std::size_t>(l) >= links_.size()) {
      throw std::invalid_argument("reservation on unknown link");
    }
    const double avail = residual_link(l);
    if (amount > avail + capacity_tolerance(links_[static_cast<std::size_t>(l)].capacity)) {
      std::ostringstream msg;
      msg << "link " << l << " needs " << amount << " but has " << avail;
      return fail(FailureKind::Insufficient, msg.str());
    }
  }
  for (const auto& [n, amount] : rec.nodes) {
    if (!has_node(n)) throw std::invalid_argument("reservation on unknown node");
    const double avail = residual_node(n);
    if (amount > avail + capacity_tolerance(nodes_[static_cast<std::size_t>(n)].processing_capacity)) {
      std::ostringstream msg;
      msg << "node " << n << " needs " << amount << " but has " << avail;
      return fail(FailureKind::Insufficient, msg.str());
    }
  }

  const ReservationId id = next_reservation_++;
  for (const auto& [l, amount] : rec.links) {
    link_claims_[static_cast<std::size_t>(l)].emplace_back(id, amount);
    recompute_link(l);
  }
  for (const auto& [n, amount] : rec.nodes) {
    node_claims_[static_cast<std::size_t>(n)].emplace_back(id, amount);
    recompute_node(n);
  }
  records_.emplace(id, std::move(rec));
  return id;
}

void SubstrateNetwork::release(ReservationId id) {
  auto it = records_.find(id);
  if (it == records_.end()) return;
  auto drop = [id](std::vector<std::pair<ReservationId, double>>& claims) {
    std::erase_if(claims, [id](const auto& c) { return c.first == id; });
  };
  for (const auto& [l, amount] : it->second.links) {
    drop(link_claims_[static_cast<std::size_t>(l)]);
    recompute_link(l);
  }
  for (const auto& [n, amount] : it->second.nodes) {
    drop(node_claims_[static_cast<std::size_t>(n)]);
    recompute_node(n);
  }
  records_.erase(it);
}

void SubstrateNetwork::reset_ledger() {
  records_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    node_claims_[i].clear();
    base_node_[i] = nodes_[i].processing_capacity;
    residual_node_[i] = base_node_[i];
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    link_claims_[i].clear();
    base_link_[i] = links_[i].capacity;
    residual_link_[i] = base_link_[i];
  }
}

std::size_t mesh_link_count(int width, int height) {
  if (width <= 0 || height <= 0) return 0;
  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  const std::size_t horizontal = (w - 1) * h;
  const std::size_t vertical = w * (h - 1);
  const std::size_t diagonal = 2 * (w - 1) * (h - 1);
  return 2 * (horizontal + vertical + diagonal);
}

SubstrateNetwork build_mesh(int width, int height, int nfv_count, CapacityRange capacity,
                            int nf_type_count, double admit_probability, std::uint64_t seed) {
  if (width < 1 || height < 1) throw std::invalid_argument("mesh dimensions must be >= 1");
  if (nfv_count < 0 || nfv_count > width * height) {
    throw std::invalid_argument("nfv_count must lie in [0, width*height]");
  }
  if (!(capacity.min > 0.0) || !(capacity.max >= capacity.min) || !std::isfinite(capacity.max)) {
    throw std::invalid_argument("capacity range must lie within (0, inf)");
  }
  if (nf_type_count < 0) throw std::invalid_argument("nf_type_count must be >= 0");
  if (!(admit_probability >= 0.0 && admit_probability <= 1.0)) {
    throw std::invalid_argument("admit_probability must lie in [0, 1]");
  }

  Rng root(seed);
  Rng pick_rng = root.fork(1);
  Rng node_cap_rng = root.fork(2);
  Rng link_cap_rng = root.fork(3);
  Rng admit_rng = root.fork(4);

  const int total = width * height;
  std::vector<int> ids(static_cast<std::size_t>(total));
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first nfv_count entries become NFV nodes.
  for (int i = 0; i < nfv_count; ++i) {
    const auto j = i + static_cast<int>(pick_rng.index(static_cast<std::uint64_t>(total - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }
  std::vector<bool> is_nfv(static_cast<std::size_t>(total), false);
  for (int i = 0; i < nfv_count; ++i) is_nfv[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] = true;

  SubstrateNetwork net;
  net.seed = seed;
  net.width = width;
  net.height = height;
  net.nf_type_count = nf_type_count;

  for (int id = 0; id < total; ++id) {
    const Point p{static_cast<double>(id % width), static_cast<double>(id / width)};
    if (is_nfv[static_cast<std::size_t>(id)]) {
      const double cap = node_cap_rng.uniform(capacity.min, capacity.max);
      std::vector<NfType> admits;
      for (int t = 0; t < nf_type_count; ++t) {
        if (admit_rng.bernoulli(admit_probability)) admits.push_back(t);
      }
      net.add_node(NodeKind::Nfv, cap, std::move(admits), p);
    } else {
      net.add_node(NodeKind::Switch, 0.0, {}, p);
    }
  }

  static constexpr int kNeighbours[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (const auto& d : kNeighbours) {
        const int nx = x + d[0];
        const int ny = y + d[1];
        if (nx < 0 || nx >= width || ny >= height) continue;
        const NodeId a = y * width + x;
        const NodeId b = ny * width + nx;
        const double cap = link_cap_rng.uniform(capacity.min, capacity.max);
        net.add_link(a, b, cap);
        net.add_link(b, a, cap);
      }
    }
  }
  return net;
}

}  // namespace mcembed
