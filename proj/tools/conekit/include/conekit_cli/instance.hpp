#pragma once

// JSON instance documents: named atoms, sets, families, points, problems and
// the requests to run on them.

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "conekit/certify.hpp"
#include "conekit/setalg.hpp"
#include "json.hpp"

namespace conekit::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "conekit-instance/1";

// Malformed document or unresolved reference; the message names the location.
struct InstanceError : MalformedInput {
  using MalformedInput::MalformedInput;
};

struct Overrides {
  std::optional<long> K_max;  // --truncate
};

struct Instance {
  std::string name;
  std::string description;
  std::size_t dim = 0;
  TruncationPolicy policy;
  std::map<std::string, std::shared_ptr<const AtomT>> atoms;
  std::map<std::string, SetPtr> sets;
  std::map<std::string, FamilyPtr> families;
  std::map<std::string, Vec> points;
  std::map<std::string, std::pair<SipProblem, Vec>> sips;
  std::map<std::string, std::pair<ParetoProblem, Vec>> paretos;
  Json requests = Json::array();
  Json expected = Json::object();

  AtomFn atom(const std::string& name) const;  // index-free atoms only
  const SetPtr& set(const std::string& name) const;
  const FamilyPtr& family(const std::string& name) const;
  Vec point(const Json& ref) const;  // a name or an inline vector
};

Instance parse_instance(const std::string& text, const std::string& source, const Overrides& o = {});
Instance load_instance(const std::string& path, const Overrides& o = {});

// Precedence: defaults, then the document, then CONEKIT_KMAX, then --truncate.
TruncationPolicy effective_policy(const Json& doc_truncation, const Overrides& o);

Q json_rational(const Json& j, const std::string& where);
Vec json_vec(const Json& j, const std::string& where);
Mat json_mat(const Json& j, const std::string& where);

}  // namespace conekit::cli
