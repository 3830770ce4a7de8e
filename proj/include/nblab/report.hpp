#pragma once

#include <json.hpp>

#include <string>

namespace nblab {

using json = nlohmann::json;

/// Outcome of checking one analytic hypothesis or criterion, with the numbers that decided it.
struct CriterionReport {
  std::string name;
  bool pass = false;
  std::string verdict;   // short machine-readable tag, e.g. "Bounded", "Diverges"
  json quantities = json::object();
  std::string detail;
};

inline void to_json(json& j, const CriterionReport& r) {
  j = json{{"name", r.name}, {"pass", r.pass}, {"verdict", r.verdict}, {"quantities", r.quantities}};
  if (!r.detail.empty()) j["detail"] = r.detail;
}

}  // namespace nblab
