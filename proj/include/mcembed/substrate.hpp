#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mcembed/outcome.hpp"

namespace mcembed {

using NodeId = int;
using LinkId = int;
using NfType = int;

enum class NodeKind { Switch, Nfv };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct NodeRecord {
  NodeId id = 0;
  NodeKind kind = NodeKind::Switch;
  double processing_capacity = 0.0;  // C(n), packet/s; 0 for switches
  std::vector<NfType> admittable;    // sorted, unique
  Point coord;

  bool is_nfv() const { return kind == NodeKind::Nfv; }
  bool admits(NfType type) const;
};

struct LinkRecord {
  LinkId id = 0;
  NodeId tail = 0;
  NodeId head = 0;
  double capacity = 0.0;  // B(l), packet/s
};

// A bundle of resource amounts to take from (or give back to) the ledger.
struct ResourceDelta {
  std::vector<std::pair<LinkId, double>> links;
  std::vector<std::pair<NodeId, double>> nodes;

  bool empty() const { return links.empty() && nodes.empty(); }
};

using ReservationId = std::uint64_t;

// Absolute slack used when comparing a demand against a capacity.
inline double capacity_tolerance(double capacity) {
  return 1e-9 * (capacity > 1.0 ? capacity : 1.0);
}

struct CapacityRange {
  double min = 0.0;
  double max = 0.0;
};

// Directed capacitated substrate G = (N, L) with a residual-resource ledger.
//
// Residuals are derived from the set of live reservations: a resource's
// residual is its base amount minus the sum of live reservations touching it,
// accumulated in reservation order. Releasing a reservation therefore
// restores the residual bit-for-bit.
//
// Single writer: reserve/release need exclusive access; const queries are
// safe to share between threads.
class SubstrateNetwork {
 public:
  NodeId add_node(NodeKind kind, double processing_capacity,
                  std::vector<NfType> admittable, Point coord);
  LinkId add_link(NodeId tail, NodeId head, double capacity);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<LinkRecord>& links() const { return links_; }
  const NodeRecord& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const LinkRecord& link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
  bool has_node(NodeId id) const { return id >= 0 && static_cast<std::size_t>(id) < nodes_.size(); }

  // Outgoing / incoming link ids, sorted by the opposite endpoint id.
  std::span<const LinkId> out_links(NodeId n) const { return out_[static_cast<std::size_t>(n)]; }
  std::span<const LinkId> in_links(NodeId n) const { return in_[static_cast<std::size_t>(n)]; }
  std::optional<LinkId> find_link(NodeId tail, NodeId head) const;

  // NFV node ids in ascending order (the set M).
  std::vector<NodeId> nfv_nodes() const;

  double residual_node(NodeId n) const { return residual_node_[static_cast<std::size_t>(n)]; }
  double residual_link(LinkId l) const { return residual_link_[static_cast<std::size_t>(l)]; }
  std::span<const double> residual_links() const { return residual_link_; }
  std::span<const double> residual_nodes() const { return residual_node_; }

  // Overrides the base residual (used when loading a partially consumed
  // network from disk). Must lie in [0, capacity].
  void set_base_residual_node(NodeId n, double value);
  void set_base_residual_link(LinkId l, double value);

  // Atomic: either every amount is taken or nothing changes. Amounts on the
  // same resource are aggregated first.
  Outcome<ReservationId> reserve(const ResourceDelta& delta);
  // Gives back exactly what the reservation took. Unknown ids are ignored.
  void release(ReservationId id);
  std::size_t live_reservations() const { return records_.size(); }

  // Drop every reservation and base override: residual = capacity.
  void reset_ledger();

  // Generation metadata, serialized with the network.
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  int nf_type_count = 0;

 private:
  void recompute_node(NodeId n);
  void recompute_link(LinkId l);

  std::vector<NodeRecord> nodes_;
  std::vector<LinkRecord> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
  std::vector<double> base_node_;
  std::vector<double> base_link_;
  std::vector<double> residual_node_;
  std::vector<double> residual_link_;

  struct Record {
    std::vector<std::pair<LinkId, double>> links;
    std::vector<std::pair<NodeId, double>> nodes;
  };
  std::map<ReservationId, Record> records_;
  std::vector<std::vector<std::pair<ReservationId, double>>> node_claims_;
  std::vector<std::vector<std::pair<ReservationId, double>>> link_claims_;
  ReservationId next_reservation_ = 1;
};

// Diagonal-inclusive grid ("king" mesh): every horizontal, vertical and
// diagonal neighbour pair becomes two opposite directed links. Node ids are
// row-major (id = y * width + x) and coordinates are the grid positions.
// Throws std::invalid_argument on out-of-range parameters.
SubstrateNetwork build_mesh(int width, int height, int nfv_count, CapacityRange capacity,
                            int nf_type_count, double admit_probability, std::uint64_t seed);

// Number of directed links build_mesh produces for a width x height grid.
std::size_t mesh_link_count(int width, int height);

}  // namespace mcembed
