#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lirpa/interval.hpp"

namespace lirpa {

struct NodeInterval {
  NodeId id;
  IntervalBounds box;
};

struct BoundReport {
  std::string method;
  IntervalBounds output;
  std::optional<std::string> verdict;
  std::optional<Vector> margin_lowers;
  /// Emitted only when non-empty.
  std::vector<NodeInterval> nodes;
  double time_ms = 0.0;
};

/// Rounds to `digits` significant digits. Non-finite values pass through.
double round_significant(double v, int digits = 9);

/// Rounded number, or the strings "inf", "-inf", "nan" for non-finite values.
nlohmann::ordered_json json_number(double v);
nlohmann::ordered_json json_vector(const Vector& v);

/// Keys in fixed order: method, lower, upper, verdict?, margin_lowers?,
/// nodes?, time_ms.
nlohmann::ordered_json to_json(const BoundReport& r);

}  // namespace lirpa
