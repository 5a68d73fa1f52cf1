#include "mcembed/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mcembed {

std::size_t MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (index_.count(name)) throw std::invalid_argument("duplicate variable " + name);
  if (!(lower <= upper)) throw std::invalid_argument("empty bounds for " + name);
  const std::size_t id = variables_.size();
  index_.emplace(name, id);
  variables_.push_back({std::move(name), kind, lower, upper});
  return id;
}

std::optional<std::size_t> MilpModel::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t MilpModel::at(const std::string& name) const {
  auto id = find(name);
  if (!id) throw std::invalid_argument("unknown variable " + name);
  return *id;
}

void MilpModel::add_constraint(std::string family, std::string name, std::vector<Term> terms, Sense sense,
                               double rhs) {
  constraints.push_back({std::move(name), std::move(family), std::move(terms), sense, rhs});
}

std::map<std::string, std::size_t> MilpModel::family_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& c : constraints) ++out[c.family];
  return out;
}

void MilpModel::check() const {
  for (const auto& v : variables_) {
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw std::invalid_argument("binary " + v.name + " has bounds outside [0, 1]");
    }
  }
  auto check_terms = [&](const std::vector<Term>& terms, const std::string& where) {
    for (const auto& t : terms) {
      if (t.var >= variables_.size()) throw std::invalid_argument(where + " references an undeclared variable");
      if (!std::isfinite(t.coef)) throw std::invalid_argument(where + " has a non-finite coefficient");
    }
  };
  check_terms(objective, "objective");
  for (const auto& c : constraints) check_terms(c.terms, c.name);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ix>
std::string vname(const char* prefix, Ix... ix) {
  std::string out = prefix;
  ((out += '_', out += std::to_string(ix)), ...);
  return out;
}

class Builder {
 public:
  Builder(const SubstrateNetwork& net, MilpModel& m, const MilpOptions& options, bool multi)
      : net_(net), m_(m), options_(options), multi_(multi), nfv_(net.nfv_nodes()) {
    node_terms_.resize(net.node_count());
    link_terms_.resize(net.link_count());
  }

  void add_request(const ServiceRequest& r, CostWeights w, bool costed) {
    const int rid = r.id;
    const int nv = static_cast<int>(r.chain.size());
    const int nj = r.max_trees;
    const double dbar = r.rate;
    const std::size_t nl = net_.link_count();

    auto hosts = [&](NodeId t) {
      std::vector<NodeId> out;
      for (NodeId n : nfv_)
        if (n != r.source && n != t) out.push_back(n);
      return out;
    };

    // Variables.
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (int j = 1; j <= nj; ++j) m_.add_variable(vname("x", l, i, j, rid), VarKind::Binary, 0, 1);
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (NodeId t : r.destinations)
          for (int j = 1; j <= nj; ++j) m_.add_variable(vname("y", l, i, t, j, rid), VarKind::Binary, 0, 1);
    for (NodeId n : nfv_)
      for (int i = 1; i <= nv; ++i) m_.add_variable(vname("z", n, i, rid), VarKind::Binary, 0, 1);
    for (NodeId t : r.destinations)
      for (NodeId n : hosts(t))
        for (int i = 1; i <= nv; ++i) m_.add_variable(vname("u", n, i, t, rid), VarKind::Binary, 0, 1);
    for (NodeId t : r.destinations)
      for (NodeId n : hosts(t))
        for (int i = 1; i <= nv; ++i)
          for (int j = 1; j <= nj; ++j) m_.add_variable(vname("w", n, i, t, j, rid), VarKind::Binary, 0, 1);
    for (int j = 1; j <= nj; ++j) m_.add_variable(vname("pi", j, rid), VarKind::Binary, 0, 1);
    for (int j = 1; j <= nj; ++j) m_.add_variable(vname("d", j, rid), VarKind::Continuous, 0, dbar);
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (int j = 1; j <= nj; ++j) m_.add_variable(vname("g", l, i, j, rid), VarKind::Continuous, 0, dbar);
    if (options_.admittability != AdmittabilityMode::Reduced) {
      for (NodeId n : nfv_)
        for (int i = 1; i <= nv; ++i) m_.add_variable(vname("gz", n, i, rid), VarKind::Binary, 0, 1);
    }
    std::optional<std::size_t> rho;
    if (multi_) rho = m_.add_variable(vname("rho", rid), VarKind::Binary, 0, 1);

    auto v = [&](const std::string& name) { return m_.at(name); };
    auto pi = [&](int j) { return v(vname("pi", j, rid)); };
    auto dv = [&](int j) { return v(vname("d", j, rid)); };

    // y <= x
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (NodeId t : r.destinations)
          for (int j = 1; j <= nj; ++j)
            m_.add_constraint("yx", vname("yx", l, i, t, j, rid),
                              {{v(vname("y", l, i, t, j, rid)), 1}, {v(vname("x", l, i, j, rid)), -1}},
                              Sense::LessEqual, 0);
    // u <= z
    for (NodeId t : r.destinations)
      for (NodeId n : hosts(t))
        for (int i = 1; i <= nv; ++i)
          m_.add_constraint("uz", vname("uz", n, i, t, rid),
                            {{v(vname("u", n, i, t, rid)), 1}, {v(vname("z", n, i, rid)), -1}}, Sense::LessEqual,
                            0);
    // sum_j d^j >= d-bar (rho d-bar)
    {
      std::vector<Term> terms;
      for (int j = 1; j <= nj; ++j) terms.push_back({dv(j), 1});
      if (rho) {
        terms.push_back({*rho, -dbar});
        m_.add_constraint("rate", vname("rate", rid), std::move(terms), Sense::GreaterEqual, 0);
      } else {
        m_.add_constraint("rate", vname("rate", rid), std::move(terms), Sense::GreaterEqual, dbar);
      }
    }
    // x <= pi, d <= d-bar pi
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (int j = 1; j <= nj; ++j)
          m_.add_constraint("xpi", vname("xpi", l, i, j, rid), {{v(vname("x", l, i, j, rid)), 1}, {pi(j), -1}},
                            Sense::LessEqual, 0);
    for (int j = 1; j <= nj; ++j)
      m_.add_constraint("dpi", vname("dpi", j, rid), {{dv(j), 1}, {pi(j), -dbar}}, Sense::LessEqual, 0);

    // Flow: out - in = W(n, i) - W(n, i + 1), W being pi * u with the
    // boundary values u(s, 0) = u(t, |V|+1) = 1 substituted.
    for (NodeId n = 0; n < static_cast<NodeId>(net_.node_count()); ++n) {
      for (int i = 0; i <= nv; ++i) {
        for (NodeId t : r.destinations) {
          for (int j = 1; j <= nj; ++j) {
            std::vector<Term> terms;
            for (LinkId l : net_.out_links(n)) terms.push_back({v(vname("y", l, i, t, j, rid)), 1});
            for (LinkId l : net_.in_links(n)) terms.push_back({v(vname("y", l, i, t, j, rid)), -1});
            auto w_term = [&](int k) -> std::optional<std::size_t> {
              if (k == 0) return n == r.source ? std::optional(pi(j)) : std::nullopt;
              if (k == nv + 1) return n == t ? std::optional(pi(j)) : std::nullopt;
              return m_.find(vname("w", n, k, t, j, rid));
            };
            if (auto a = w_term(i)) terms.push_back({*a, -1});
            if (auto b = w_term(i + 1)) terms.push_back({*b, 1});
            m_.add_constraint("flow", vname("flow", n, i, t, j, rid), std::move(terms), Sense::Equal, 0);
          }
        }
      }
    }
    // w = pi * u
    for (NodeId t : r.destinations)
      for (NodeId n : hosts(t))
        for (int i = 1; i <= nv; ++i)
          for (int j = 1; j <= nj; ++j) {
            const auto wv = v(vname("w", n, i, t, j, rid));
            const auto uv = v(vname("u", n, i, t, rid));
            m_.add_constraint("wpi", vname("wpi", n, i, t, j, rid), {{wv, 1}, {pi(j), -1}}, Sense::LessEqual, 0);
            m_.add_constraint("wu", vname("wu", n, i, t, j, rid), {{wv, 1}, {uv, -1}}, Sense::LessEqual, 0);
            m_.add_constraint("wlo", vname("wlo", n, i, t, j, rid), {{wv, 1}, {pi(j), -1}, {uv, -1}},
                              Sense::GreaterEqual, -1);
          }
    // one host per (i, t)
    for (int i = 1; i <= nv; ++i)
      for (NodeId t : r.destinations) {
        std::vector<Term> terms;
        for (NodeId n : hosts(t)) terms.push_back({v(vname("u", n, i, t, rid)), 1});
        if (rho) {
          terms.push_back({*rho, -1});
          m_.add_constraint("one", vname("one", i, t, rid), std::move(terms), Sense::Equal, 0);
        } else {
          m_.add_constraint("one", vname("one", i, t, rid), std::move(terms), Sense::Equal, 1);
        }
      }
    // admittability
    for (NodeId n : nfv_)
      for (int i = 1; i <= nv; ++i) {
        const bool k = net_.node(n).admits(r.chain[std::size_t(i - 1)].nf_type);
        const auto zv = v(vname("z", n, i, rid));
        if (options_.admittability == AdmittabilityMode::Reduced) {
          if (!k) m_.add_constraint("adm", vname("adm", n, i, rid), {{zv, 1}}, Sense::LessEqual, 0);
          continue;
        }
        const auto gv = v(vname("gz", n, i, rid));
        const double kv = k ? 1.0 : 0.0;
        m_.add_constraint("gz1", vname("gz1", n, i, rid), {{gv, 1}, {zv, -1}}, Sense::LessEqual, 0);
        m_.add_constraint("gz2", vname("gz2", n, i, rid), {{gv, 1}}, Sense::LessEqual, kv);
        m_.add_constraint("gz3", vname("gz3", n, i, rid), {{gv, 1}, {zv, -1}}, Sense::GreaterEqual, kv - 1);
        if (options_.admittability == AdmittabilityMode::Linearized) {
          m_.add_constraint("adm", vname("adm", n, i, rid), {{gv, 1}, {zv, -1}}, Sense::Equal, 0);
        } else {
          m_.add_constraint("adm", vname("adm", n, i, rid), {{gv, 1}}, Sense::Equal, 1);
        }
      }
    // gamma = x * d through big-M with M = d-bar
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (int j = 1; j <= nj; ++j) {
          const auto xv = v(vname("x", l, i, j, rid));
          const auto gv = v(vname("g", l, i, j, rid));
          m_.add_constraint("bm_lo", vname("bm_lo", l, i, j, rid), {{dv(j), 1}, {xv, dbar}, {gv, -1}},
                            Sense::LessEqual, dbar);
          m_.add_constraint("bm_up", vname("bm_up", l, i, j, rid), {{gv, 1}, {dv(j), -1}}, Sense::LessEqual, 0);
          m_.add_constraint("bm_x", vname("bm_x", l, i, j, rid), {{gv, 1}, {xv, -dbar}}, Sense::LessEqual, 0);
          link_terms_[l].push_back({gv, 1});
        }
    if (rho) {
      for (int j = 1; j <= nj; ++j)
        m_.add_constraint("pirho", vname("pirho", j, rid), {{pi(j), 1}, {*rho, -1}}, Sense::LessEqual, 0);
      for (NodeId n : nfv_)
        for (int i = 1; i <= nv; ++i)
          m_.add_constraint("zrho", vname("zrho", n, i, rid), {{v(vname("z", n, i, rid)), 1}, {*rho, -1}},
                            Sense::LessEqual, 0);
    }
    for (NodeId n : nfv_)
      for (int i = 1; i <= nv; ++i)
        node_terms_[std::size_t(n)].push_back({v(vname("z", n, i, rid)), r.chain[std::size_t(i - 1)].processing_demand});

    if (costed) {
      for (std::size_t l = 0; l < nl; ++l) {
        const double b = net_.residual_link(static_cast<LinkId>(l));
        for (int i = 0; i <= nv; ++i)
          for (int j = 1; j <= nj; ++j) {
            if (b > 0.0) m_.objective.push_back({v(vname("g", l, i, j, rid)), w.alpha / b});
            m_.objective.push_back({v(vname("x", l, i, j, rid)), w.alpha});
          }
      }
      for (NodeId n : nfv_) {
        const double c = net_.residual_node(n);
        if (!(c > 0.0)) continue;
        for (int i = 1; i <= nv; ++i)
          m_.objective.push_back(
              {v(vname("z", n, i, rid)), w.beta * r.chain[std::size_t(i - 1)].processing_demand / c});
      }
    }
  }

  void finish() {
    for (NodeId n : nfv_) {
      auto& terms = node_terms_[std::size_t(n)];
      if (terms.empty()) continue;
      m_.add_constraint("ncap", vname("ncap", n), std::move(terms), Sense::LessEqual, net_.residual_node(n));
    }
    for (std::size_t l = 0; l < link_terms_.size(); ++l) {
      auto& terms = link_terms_[l];
      if (terms.empty()) continue;
      m_.add_constraint("lcap", vname("lcap", l), std::move(terms), Sense::LessEqual,
                        net_.residual_link(static_cast<LinkId>(l)));
    }
  }

 private:
  const SubstrateNetwork& net_;
  MilpModel& m_;
  const MilpOptions& options_;
  bool multi_;
  std::vector<NodeId> nfv_;
  std::vector<std::vector<Term>> node_terms_;
  std::vector<std::vector<Term>> link_terms_;
};

void check_requests(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests) {
  std::set<int> ids;
  for (const auto& r : requests) {
    r.check(&net);
    if (!ids.insert(r.id).second) throw std::invalid_argument("duplicate request id " + std::to_string(r.id));
    if (r.id < 0) throw std::invalid_argument("request ids must be non-negative");
  }
}

}  // namespace

MilpModel build_p1(const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w, const MilpOptions& options) {
  check_requests(net, {r});
  MilpModel m;
  m.problem = "p1";
  m.sense = ObjectiveSense::Minimize;
  m.weights = w;
  Builder b(net, m, options, false);
  b.add_request(r, w, true);
  b.finish();
  return m;
}

MilpModel build_p2(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests, double a1, double a2,
                   const MilpOptions& options) {
  check_weights(a1, a2, "a1/a2");
  check_requests(net, requests);
  MilpModel m;
  m.problem = "p2";
  m.sense = ObjectiveSense::Maximize;
  Builder b(net, m, options, true);
  for (const auto& r : requests) {
    b.add_request(r, {}, false);
    m.objective.push_back({m.at(vname("rho", r.id)), throughput(r, a1, a2)});
  }
  b.finish();
  return m;
}

MilpModel build_p3(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests, CostWeights w, double a1,
                   double a2, double r_star, const MilpOptions& options) {
  check_weights(a1, a2, "a1/a2");
  check_requests(net, requests);
  if (!(r_star >= 0.0)) throw std::invalid_argument("throughput target must be non-negative");
  MilpModel m;
  m.problem = "p3";
  m.sense = ObjectiveSense::Minimize;
  m.weights = w;
  Builder b(net, m, options, true);
  std::vector<Term> thr;
  for (const auto& r : requests) {
    b.add_request(r, w, true);
    thr.push_back({m.at(vname("rho", r.id)), throughput(r, a1, a2)});
  }
  b.finish();
  m.add_constraint("thr", "thr", std::move(thr), Sense::GreaterEqual, r_star);
  return m;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_terms(std::ostringstream& os, const MilpModel& m, const std::vector<Term>& terms) {
  if (terms.empty()) {
    // A row or objective needs at least one term.
    if (!m.variables().empty()) os << " 0 " << m.variables().front().name;
    return;
  }
  int on_line = 0;
  for (const auto& t : terms) {
    if (on_line == 6) {
      os << "\n   ";
      on_line = 0;
    }
    os << (t.coef < 0 ? " - " : " + ") << num(std::fabs(t.coef)) << ' ' << m.variables()[t.var].name;
    ++on_line;
  }
}

}  // namespace

std::string export_lp(const MilpModel& m) {
  m.check();
  std::ostringstream os;
  os << "\\ mcembed " << (m.problem.empty() ? "model" : m.problem) << '\n';
  os << (m.sense == ObjectiveSense::Minimize ? "Minimize" : "Maximize") << "\n obj:";
  write_terms(os, m, m.objective);
  os << "\nSubject To\n";
  for (const auto& c : m.constraints) {
    os << ' ' << c.name << ':';
    write_terms(os, m, c.terms);
    os << (c.sense == Sense::LessEqual ? " <= " : c.sense == Sense::Equal ? " = " : " >= ") << num(c.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : m.variables()) {
    if (v.kind == VarKind::Binary) continue;
    os << ' ' << num(v.lower) << " <= " << v.name << " <= " << (std::isinf(v.upper) ? "+inf" : num(v.upper))
       << '\n';
  }
  os << "Binaries\n";
  for (const auto& v : m.variables())
    if (v.kind == VarKind::Binary) os << ' ' << v.name << '\n';
  os << "End\n";
  return os.str();
}

double objective_value(const MilpModel& m, const Assignment& values) {
  double total = 0.0;
  for (const auto& t : m.objective) {
    auto it = values.find(m.variables()[t.var].name);
    if (it != values.end()) total += t.coef * it->second;
  }
  return total;
}

std::optional<std::string> check_assignment(const MilpModel& m, const Assignment& values, double tolerance) {
  std::vector<double> x(m.variables().size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto& v = m.variables()[k];
    auto it = values.find(v.name);
    if (it == values.end()) return v.name + ": missing value";
    x[k] = it->second;
    if (x[k] < v.lower - tolerance || x[k] > v.upper + tolerance) {
      return v.name + ": value " + num(x[k]) + " outside [" + num(v.lower) + ", " + num(v.upper) + "]";
    }
  }
  for (const auto& c : m.constraints) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    const bool ok = c.sense == Sense::LessEqual ? lhs <= c.rhs + tolerance
                    : c.sense == Sense::Equal   ? std::fabs(lhs - c.rhs) <= tolerance
                                                : lhs >= c.rhs - tolerance;
    if (!ok) return c.name + ": lhs " + num(lhs) + " vs rhs " + num(c.rhs);
  }
  return std::nullopt;
}

namespace {

constexpr double kIntTol = 1e-6;

struct DecodeFailure {
  std::string reason;
};

class Reader {
 public:
  Reader(const MilpModel& m, const Assignment& values) : m_(m), values_(values) {}

  bool has(const std::string& name) const { return m_.find(name).has_value(); }

  double value(const std::string& name) const {
    if (!has(name)) throw std::invalid_argument("model has no variable " + name + " (request set mismatch)");
    auto it = values_.find(name);
    if (it == values_.end()) throw DecodeFailure{"missing value for " + name};
    return it->second;
  }
  bool on(const std::string& name) const { return value(name) > 0.5; }

 private:
  const MilpModel& m_;
  const Assignment& values_;
};

std::vector<EmbeddingSolution> decode_or_throw(const MilpModel& m, const Assignment& values,
                                               const SubstrateNetwork& net,
                                               const std::vector<ServiceRequest>& requests) {
  for (const auto& v : m.variables()) {
    auto it = values.find(v.name);
    if (it == values.end()) throw DecodeFailure{"missing value for " + v.name};
    const double x = it->second;
    if (!std::isfinite(x)) throw DecodeFailure{"non-finite value for " + v.name};
    if (v.kind == VarKind::Binary && std::fabs(x - std::round(x)) > kIntTol) {
      throw DecodeFailure{"non-integral value " + num(x) + " for " + v.name};
    }
    const double tol = kIntTol * std::max(1.0, std::fabs(v.upper == kInf ? x : v.upper));
    if (x < v.lower - tol || x > v.upper + tol) throw DecodeFailure{"value out of bounds for " + v.name};
  }
  Reader rd(m, values);
  const std::size_t nl = net.link_count();

  // y <= x everywhere before any structure is read.
  for (const auto& r : requests) {
    const int nv = static_cast<int>(r.chain.size());
    for (std::size_t l = 0; l < nl; ++l)
      for (int i = 0; i <= nv; ++i)
        for (NodeId t : r.destinations)
          for (int j = 1; j <= r.max_trees; ++j) {
            const auto y = vname("y", l, i, t, j, r.id);
            const auto x = vname("x", l, i, j, r.id);
            if (rd.on(y) && !rd.on(x)) throw DecodeFailure{"y exceeds x: " + y + " = 1 while " + x + " = 0"};
          }
  }

  std::vector<EmbeddingSolution> out;
  SubstrateNetwork scratch = net;
  const auto nfv = net.nfv_nodes();
  for (const auto& r : requests) {
    const int rid = r.id;
    const int nv = static_cast<int>(r.chain.size());
    const int nj = r.max_trees;
    const auto rho_name = vname("rho", rid);
    if (rd.has(rho_name) && !rd.on(rho_name)) continue;

    EmbeddingSolution sol;
    sol.request = rid;
    // Tree rates, snapped onto d-bar within solver tolerance.
    const double snap = kIntTol * std::max(1.0, r.rate);
    sol.tree_rates.assign(std::size_t(nj), 0.0);
    std::vector<bool> active(std::size_t(nj) + 1, false);
    double total = 0.0;
    for (int j = 1; j <= nj; ++j) {
      if (!rd.on(vname("pi", j, rid))) continue;
      double d = std::clamp(rd.value(vname("d", j, rid)), 0.0, r.rate);
      if (r.rate - d <= snap) d = r.rate;
      if (d <= snap) continue;
      sol.tree_rates[std::size_t(j - 1)] = d;
      active[std::size_t(j)] = true;
      total += d;
    }
    if (total < r.rate && r.rate - total <= snap) {
      auto big = std::max_element(sol.tree_rates.begin(), sol.tree_rates.end());
      *big = std::min(r.rate, *big + (r.rate - total));
    }

    // Hosts per (i, t).
    std::vector<std::vector<NodeId>> host(std::size_t(nv) + 2, std::vector<NodeId>(r.destinations.size(), -1));
    for (std::size_t k = 0; k < r.destinations.size(); ++k) {
      const NodeId t = r.destinations[k];
      host[0][k] = r.source;
      host[std::size_t(nv) + 1][k] = t;
      for (int i = 1; i <= nv; ++i) {
        for (NodeId n : nfv) {
          const auto u = vname("u", n, i, t, rid);
          if (!rd.has(u) || !rd.on(u)) continue;
          if (host[std::size_t(i)][k] != -1) {
            throw DecodeFailure{"two hosts for f" + std::to_string(i) + " toward " + std::to_string(t) +
                                " in request " + std::to_string(rid)};
          }
          host[std::size_t(i)][k] = n;
        }
        if (host[std::size_t(i)][k] == -1) {
          throw DecodeFailure{"no host for f" + std::to_string(i) + " toward " + std::to_string(t) + " in request " +
                              std::to_string(rid)};
        }
        const NodeId n = host[std::size_t(i)][k];
        if (!rd.on(vname("z", n, i, rid))) throw DecodeFailure{"u set without z for " + vname("z", n, i, rid)};
        sol.placements.push_back({n, i, {t}});
      }
    }

    // Segment walks over y.
    for (int j = 1; j <= nj; ++j) {
      if (!active[std::size_t(j)]) continue;
      for (int i = 0; i <= nv; ++i)
        for (std::size_t k = 0; k < r.destinations.size(); ++k) {
          const NodeId t = r.destinations[k];
          const NodeId a = host[std::size_t(i)][k];
          const NodeId b = host[std::size_t(i) + 1][k];
          RoutedSegment seg{j, i, t, {}, sol.tree_rates[std::size_t(j - 1)]};
          std::set<LinkId> used;
          NodeId at = a;
          while (at != b) {
            std::optional<LinkId> next;
            for (LinkId l : net.out_links(at)) {
              if (!used.count(l) && rd.on(vname("y", l, i, t, j, rid))) {
                if (!next || l < *next) next = l;
              }
            }
            if (!next) {
              throw DecodeFailure{"flow for segment " + std::to_string(i) + " toward " + std::to_string(t) +
                                  " of tree " + std::to_string(j) + " stops at node " + std::to_string(at)};
            }
            used.insert(*next);
            seg.links.push_back(*next);
            at = net.link(*next).head;
          }
          if (a != b) sol.segments.push_back(std::move(seg));
        }
    }

    // Drop trailing unused trees so the count check sees only what is used.
    while (sol.tree_rates.size() > 1 && sol.tree_rates.back() == 0.0) sol.tree_rates.pop_back();
    normalize(sol);
    if (auto bad = validate_solution(sol, scratch, r)) {
      throw DecodeFailure{"request " + std::to_string(rid) + " decodes to an invalid embedding: " + bad->describe()};
    }
    sol.total_cost = raw_cost(sol, net, r, m.weights);
    auto id = commit(scratch, sol, r);
    if (!id.ok()) throw DecodeFailure{"joint capacity exceeded at request " + std::to_string(rid)};
    out.push_back(std::move(sol));
  }
  return out;
}

}  // namespace

Outcome<std::vector<EmbeddingSolution>> decode_solution(const MilpModel& m, const Assignment& values,
                                                        const SubstrateNetwork& net,
                                                        const std::vector<ServiceRequest>& requests) {
  try {
    return decode_or_throw(m, values, net, requests);
  } catch (const DecodeFailure& f) {
    return fail(FailureKind::DecodeError, f.reason);
  }
}

Assignment encode_assignment(const MilpModel& m, const std::vector<EmbeddingSolution>& solutions,
                             const SubstrateNetwork&, const std::vector<ServiceRequest>& requests) {
  Assignment a;
  for (const auto& v : m.variables()) a[v.name] = 0.0;
  auto set = [&](const std::string& name, double value) {
    auto it = a.find(name);
    if (it == a.end()) throw std::invalid_argument("model has no variable " + name);
    it->second = value;
  };
  for (const auto& sol : solutions) {
    auto rit = std::find_if(requests.begin(), requests.end(), [&](const auto& r) { return r.id == sol.request; });
    if (rit == requests.end()) throw std::invalid_argument("solution for unknown request");
    const auto& r = *rit;
    const int rid = r.id;
    if (m.find(vname("rho", rid))) set(vname("rho", rid), 1.0);
    for (std::size_t j = 0; j < sol.tree_rates.size(); ++j) {
      if (!(sol.tree_rates[j] > 0.0)) continue;
      set(vname("pi", j + 1, rid), 1.0);
      set(vname("d", j + 1, rid), sol.tree_rates[j]);
    }
    for (const auto& p : sol.placements) {
      set(vname("z", p.node, p.nf_index, rid), 1.0);
      if (m.find(vname("gz", p.node, p.nf_index, rid))) set(vname("gz", p.node, p.nf_index, rid), 1.0);
      for (NodeId t : p.served) {
        set(vname("u", p.node, p.nf_index, t, rid), 1.0);
        for (std::size_t j = 0; j < sol.tree_rates.size(); ++j)
          if (sol.tree_rates[j] > 0.0) set(vname("w", p.node, p.nf_index, t, j + 1, rid), 1.0);
      }
    }
    for (const auto& s : sol.segments) {
      const double d = sol.tree_rates.at(std::size_t(s.tree - 1));
      for (LinkId l : s.links) {
        set(vname("y", l, s.nf_index, s.destination, s.tree, rid), 1.0);
        set(vname("x", l, s.nf_index, s.tree, rid), 1.0);
        set(vname("g", l, s.nf_index, s.tree, rid), d);
      }
    }
  }
  return a;
}

}  // namespace mcembed
