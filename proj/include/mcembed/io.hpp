#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcembed/admission.hpp"
#include "mcembed/milp.hpp"
#include "mcembed/service.hpp"
#include "mcembed/solution.hpp"
#include "mcembed/substrate.hpp"

namespace mcembed {

// Malformed documents and unreadable or unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// Network document: {version, meta: {seed, width, height, nf_type_count},
// nodes: [...], links: [...]}. Residuals are written only where they differ
// from the capacity. Rates are packet/s.
Json network_to_json(const SubstrateNetwork& net);
SubstrateNetwork network_from_json(const Json& doc);

// Request batch: {version, requests: [...]}. A bare request object is also
// accepted on input.
Json requests_to_json(const std::vector<ServiceRequest>& requests);
std::vector<ServiceRequest> requests_from_json(const Json& doc);

Json solution_to_json(const EmbeddingSolution& sol);
EmbeddingSolution solution_from_json(const Json& doc);
// {version, solutions: [...]}; input also takes a single solution object.
Json solutions_to_json(const std::vector<EmbeddingSolution>& solutions);
std::vector<EmbeddingSolution> solutions_from_json(const Json& doc);

Json plan_to_json(const AdmissionPlan& plan);

// Solver output: {"values": {name: value}, ...}, a flat {name: value}
// object, or whitespace separated "name value" lines.
Assignment assignment_from_text(const std::string& text);

std::string read_file(const std::string& path);
Json read_json(const std::string& path);
// Writes to a temporary file beside `path`, then renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mcembed
