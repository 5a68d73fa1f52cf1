#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "mcembed/substrate.hpp"

namespace mcembed {

struct NfSpec {
  NfType nf_type = 0;
  double processing_demand = 0.0;  // C(f), packet/s
};

// Multicast chain S = (source, destinations, chain, rate).
struct ServiceRequest {
  int id = 0;
  NodeId source = 0;
  std::vector<NodeId> destinations;  // ascending, unique
  std::vector<NfSpec> chain;         // traversal order
  double rate = 0.0;                 // d-bar, packet/s
  int max_trees = 1;                 // J

  std::size_t nf_count() const { return chain.size(); }
  // Throws std::invalid_argument on a broken invariant, or when an endpoint
  // is not a node of `net` (if given).
  void check(const SubstrateNetwork* net = nullptr) const;
};

enum class RegionPolicy { Uniform, CrossRegion };

struct RateRange {
  double min = 0.0;
  double max = 0.0;
};

struct RequestSpec {
  int count = 0;
  std::vector<int> nf_count_choices{3, 4};
  std::vector<int> dest_count_choices{3, 4, 5};
  RateRange rate{1.5e6, 3.5e6};
  RegionPolicy regions = RegionPolicy::CrossRegion;
  int max_trees = 1;
  std::uint64_t seed = 0;
};

std::vector<ServiceRequest> generate_requests(const SubstrateNetwork& net, const RequestSpec& spec);

// Access regions: the four corner blocks of the grid, each
// ceil(0.35 * width) by ceil(0.35 * height). Everything else is core.
// Returns -1 for core nodes, 0..3 for access regions.
int region_of(const SubstrateNetwork& net, NodeId n);
std::vector<NodeId> region_nodes(const SubstrateNetwork& net, int region);

// R = a1 * sum C(f) + a2 * (|V| + |D|) * d-bar.
double throughput(const ServiceRequest& r, double a1, double a2);

// Distribution level g = (A_r / A) * (q_r / q).
double distribution_level(const SubstrateNetwork& net, const ServiceRequest& r);

// U = R * (1 - g).
double size_score(const SubstrateNetwork& net, const ServiceRequest& r, double a1, double a2);

// Throws unless a1 + a2 = 1 and both are positive.
void check_weights(double a, double b, const char* what);

// Planar helpers.
std::vector<Point> convex_hull(std::vector<Point> points);  // counter-clockwise, no collinear points
double polygon_area(std::span<const Point> polygon);         // shoelace, absolute value
double hull_area(std::span<const Point> points);

}  // namespace mcembed
