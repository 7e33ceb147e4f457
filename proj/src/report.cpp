#include "lirpa/report.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace lirpa {

double round_significant(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::stod(buf);
}

nlohmann::ordered_json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return round_significant(v);
}

nlohmann::ordered_json json_vector(const Vector& v) {
  auto out = nlohmann::ordered_json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

nlohmann::ordered_json to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["lower"] = json_vector(r.output.lower);
  j["upper"] = json_vector(r.output.upper);
  if (r.verdict) j["verdict"] = *r.verdict;
  if (r.margin_lowers) j["margin_lowers"] = json_vector(*r.margin_lowers);
  if (!r.nodes.empty()) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::object();
    for (const auto& n : r.nodes) {
      nodes[std::to_string(n.id.value)] = {{"lower", json_vector(n.box.lower)}, {"upper", json_vector(n.box.upper)}};
    }
    j["nodes"] = std::move(nodes);
  }
  j["time_ms"] = json_number(r.time_ms);
  return j;
}

}  // namespace lirpa
