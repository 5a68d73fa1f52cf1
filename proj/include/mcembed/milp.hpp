#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcembed/outcome.hpp"
#include "mcembed/service.hpp"
#include "mcembed/solution.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

enum class VarKind { Binary, Continuous };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;  // +inf allowed for continuous variables
};

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Term {
  std::size_t var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::string family;  // "yx", "flow", "lcap", ...
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

enum class ObjectiveSense { Minimize, Maximize };

class MilpModel {
 public:
  std::string problem;  // "p1", "p2", "p3" or empty
  ObjectiveSense sense = ObjectiveSense::Minimize;
  CostWeights weights;  // used for the decoded solutions' total_cost
  std::vector<Term> objective;
  std::vector<Constraint> constraints;

  const std::vector<Variable>& variables() const { return variables_; }
  // Throws std::invalid_argument on a duplicate name or bad bounds.
  std::size_t add_variable(std::string name, VarKind kind, double lower, double upper);
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t at(const std::string& name) const;

  void add_constraint(std::string family, std::string name, std::vector<Term> terms, Sense sense, double rhs);

  // Row count per family tag.
  std::map<std::string, std::size_t> family_counts() const;
  // Throws std::invalid_argument when a term references an undeclared
  // variable or a binary has bounds outside [0, 1].
  void check() const;

 private:
  std::vector<Variable> variables_;
  std::unordered_map<std::string, std::size_t> index_;
};

// How "f_i may only be placed where admittable" is written.
enum class AdmittabilityMode {
  Reduced,     // rows z_n_i_r <= 0 wherever node n does not admit f_i
  Linearized,  // gz = z * k through three rows, plus gz = z
  Literal,     // gz = z * k through three rows, plus gz = 1 (as printed)
};

struct MilpOptions {
  AdmittabilityMode admittability = AdmittabilityMode::Reduced;
};

// Single-service model: minimize link and processing cost. B(l) and C(n)
// are the residuals of `net`; big-M is d-bar.
MilpModel build_p1(const SubstrateNetwork& net, const ServiceRequest& r, CostWeights w, const MilpOptions& options = {});

// Multi-service: maximize sum R^r rho^r.
MilpModel build_p2(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests, double a1, double a2,
                   const MilpOptions& options = {});

// Multi-service: minimize cost subject to sum R^r rho^r >= r_star.
MilpModel build_p3(const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests, CostWeights w, double a1,
                   double a2, double r_star, const MilpOptions& options = {});

// CPLEX LP text. Coefficients use 9 significant digits; output depends only
// on the model.
std::string export_lp(const MilpModel& model);

using Assignment = std::map<std::string, double>;

double objective_value(const MilpModel& model, const Assignment& values);

// First bound or row violated by more than `tolerance`, as "<name>: detail".
std::optional<std::string> check_assignment(const MilpModel& model, const Assignment& values,
                                            double tolerance = 1e-6);

// One solution per accepted request (rho = 1, or every request for p1), in
// request order. DecodeError names the offending variable or constraint.
Outcome<std::vector<EmbeddingSolution>> decode_solution(const MilpModel& model, const Assignment& values,
                                                        const SubstrateNetwork& net,
                                                        const std::vector<ServiceRequest>& requests);

// The assignment that represents `solutions` (one per accepted request,
// matched by request id). Every other request gets rho = 0. Solutions must
// use whole trees: each active tree routes every segment of every
// destination.
Assignment encode_assignment(const MilpModel& model, const std::vector<EmbeddingSolution>& solutions,
                             const SubstrateNetwork& net, const std::vector<ServiceRequest>& requests);

}  // namespace mcembed
