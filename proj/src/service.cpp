#include "mcembed/service.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mcembed/rng.hpp"

namespace mcembed {

void ServiceRequest::check(const SubstrateNetwork* net) const {
  if (destinations.empty()) throw std::invalid_argument("request needs at least one destination");
  if (!std::is_sorted(destinations.begin(), destinations.end()) ||
      std::adjacent_find(destinations.begin(), destinations.end()) != destinations.end()) {
    throw std::invalid_argument("destinations must be ascending and unique");
  }
  if (std::binary_search(destinations.begin(), destinations.end(), source)) {
    throw std::invalid_argument("source cannot be a destination");
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("request rate must be positive");
  if (max_trees < 1) throw std::invalid_argument("max_trees must be >= 1");
  for (const auto& f : chain) {
    if (!(f.processing_demand > 0.0) || !std::isfinite(f.processing_demand)) {
      throw std::invalid_argument("NF processing demand must be positive");
    }
    if (f.nf_type < 0) throw std::invalid_argument("NF type must be non-negative");
  }
  if (net != nullptr) {
    if (!net->has_node(source)) throw std::invalid_argument("request source is not a network node");
    for (NodeId t : destinations) {
      if (!net->has_node(t)) throw std::invalid_argument("request destination is not a network node");
    }
  }
}

void check_weights(double a, double b, const char* what) {
  if (!(a > 0.0) || !(b > 0.0) || std::abs(a + b - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << what << " must be positive and sum to 1 (got " << a << " + " << b << ")";
    throw std::invalid_argument(msg.str());
  }
}

namespace {

struct RegionBox {
  int x0, x1, y0, y1;  // inclusive
};

std::vector<RegionBox> access_boxes(const SubstrateNetwork& net) {
  const int w = net.width;
  const int h = net.height;
  const int bw = static_cast<int>(std::ceil(0.35 * w));
  const int bh = static_cast<int>(std::ceil(0.35 * h));
  return {{0, bw - 1, 0, bh - 1},
          {w - bw, w - 1, 0, bh - 1},
          {0, bw - 1, h - bh, h - 1},
          {w - bw, w - 1, h - bh, h - 1}};
}

}  // namespace

int region_of(const SubstrateNetwork& net, NodeId n) {
  if (net.width <= 0 || net.height <= 0) throw std::invalid_argument("network has no grid layout");
  const int x = n % net.width;
  const int y = n / net.width;
  const auto boxes = access_boxes(net);
  for (int k = 0; k < 4; ++k) {
    const auto& b = boxes[static_cast<std::size_t>(k)];
    if (x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1) return k;
  }
  return -1;
}

std::vector<NodeId> region_nodes(const SubstrateNetwork& net, int region) {
  std::vector<NodeId> out;
  for (const auto& n : net.nodes()) {
    if (region_of(net, n.id) == region) out.push_back(n.id);
  }
  return out;
}

std::vector<ServiceRequest> generate_requests(const SubstrateNetwork& net, const RequestSpec& spec) {
  if (spec.count < 0) throw std::invalid_argument("request count must be >= 0");
  if (spec.count == 0) return {};
  if (spec.nf_count_choices.empty() || spec.dest_count_choices.empty()) {
    throw std::invalid_argument("NF and destination count choices must be non-empty");
  }
  if (!(spec.rate.min > 0.0) || spec.rate.max < spec.rate.min || !std::isfinite(spec.rate.max)) {
    throw std::invalid_argument("rate range must lie within (0, inf)");
  }
  if (spec.max_trees < 1) throw std::invalid_argument("max_trees must be >= 1");
  for (int v : spec.nf_count_choices) {
    if (v < 0) throw std::invalid_argument("NF counts must be >= 0");
    if (v > 0 && net.nf_type_count <= 0) throw std::invalid_argument("network declares no NF types");
  }
  const int n = static_cast<int>(net.node_count());
  for (int d : spec.dest_count_choices) {
    if (d < 1 || d >= n) throw std::invalid_argument("destination counts must lie in [1, |N|)");
  }

  std::vector<std::vector<NodeId>> regions;
  if (spec.regions == RegionPolicy::CrossRegion) {
    if (net.width < 2 || net.height < 2) throw std::invalid_argument("grid too small for access regions");
    for (int k = 0; k < 4; ++k) regions.push_back(region_nodes(net, k));
    const int largest_choice = *std::max_element(spec.dest_count_choices.begin(), spec.dest_count_choices.end());
    for (const auto& r : regions) {
      if (static_cast<int>(r.size()) < largest_choice) {
        throw std::invalid_argument("access region too small for the requested destination count");
      }
    }
    // Corner blocks must not overlap, otherwise "distinct regions" is void.
    std::vector<NodeId> all;
    for (const auto& r : regions) all.insert(all.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw std::invalid_argument("access regions overlap on this grid");
    }
  }

  Rng rng(spec.seed);
  std::vector<ServiceRequest> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int k = 0; k < spec.count; ++k) {
    ServiceRequest r;
    r.id = k;
    r.max_trees = spec.max_trees;
    const int nv = spec.nf_count_choices[rng.index(spec.nf_count_choices.size())];
    const int nd = spec.dest_count_choices[rng.index(spec.dest_count_choices.size())];
    r.rate = rng.uniform(spec.rate.min, spec.rate.max);

    std::vector<NodeId> pool;
    if (spec.regions == RegionPolicy::CrossRegion) {
      const auto src_region = rng.index(4);
      auto dst_region = rng.index(3);
      if (dst_region >= src_region) ++dst_region;
      const auto& src_nodes = regions[src_region];
      r.source = src_nodes[rng.index(src_nodes.size())];
      pool = regions[dst_region];
    } else {
      r.source = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
      for (NodeId v = 0; v < n; ++v) {
        if (v != r.source) pool.push_back(v);
      }
    }
    for (int d = 0; d < nd; ++d) {
      const auto j = d + rng.index(pool.size() - static_cast<std::size_t>(d));
      std::swap(pool[static_cast<std::size_t>(d)], pool[j]);
    }
    r.destinations.assign(pool.begin(), pool.begin() + nd);
    std::sort(r.destinations.begin(), r.destinations.end());

    for (int i = 0; i < nv; ++i) {
      const auto type = static_cast<NfType>(rng.index(static_cast<std::uint64_t>(net.nf_type_count)));
      r.chain.push_back(NfSpec{type, r.rate});
    }
    out.push_back(std::move(r));
  }
  return out;
}

double throughput(const ServiceRequest& r, double a1, double a2) {
  check_weights(a1, a2, "a1, a2");
  double processing = 0.0;
  for (const auto& f : r.chain) processing += f.processing_demand;
  const double transmission = static_cast<double>(r.chain.size() + r.destinations.size()) * r.rate;
  return a1 * processing + a2 * transmission;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

std::vector<Point> convex_hull(std::vector<Point> points) {
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;
  std::vector<Point> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Point> polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

double hull_area(std::span<const Point> points) {
  const auto hull = convex_hull(std::vector<Point>(points.begin(), points.end()));
  return polygon_area(hull);
}

double distribution_level(const SubstrateNetwork& net, const ServiceRequest& r) {
  if (net.node_count() < 2) throw std::invalid_argument("distribution level needs >= 2 nodes");
  std::vector<Point> all;
  for (const auto& n : net.nodes()) all.push_back(n.coord);
  const double area = hull_area(all);
  double diameter = 0.0;
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) diameter = std::max(diameter, distance(all[a], all[b]));
  }
  if (area <= 0.0 || diameter <= 0.0) return 0.0;

  std::vector<Point> dests;
  Point centroid;
  for (NodeId t : r.destinations) {
    dests.push_back(net.node(t).coord);
    centroid.x += dests.back().x;
    centroid.y += dests.back().y;
  }
  centroid.x /= static_cast<double>(dests.size());
  centroid.y /= static_cast<double>(dests.size());
  const double area_r = hull_area(dests);
  const double q_r = distance(net.node(r.source).coord, centroid);
  return (area_r / area) * (q_r / diameter);
}

double size_score(const SubstrateNetwork& net, const ServiceRequest& r, double a1, double a2) {
  return throughput(r, a1, a2) * (1.0 - distribution_level(net, r));
}

}  // namespace mcembed
