#pragma once

#include <optional>
#include <span>

#include "lirpa/graph.hpp"
#include "lirpa/perturbation.hpp"
#include "lirpa/relaxation.hpp"

namespace lirpa {

/// Elementwise box [lower, upper].
struct IntervalBounds {
  Vector lower;
  Vector upper;

  static IntervalBounds point(const Vector& v) { return {v, v}; }
  Eigen::Index size() const { return lower.size(); }
  Vector width() const { return upper - lower; }
  bool contains(const Vector& v, double slack = 0.0) const;
  /// Every entry of `other` lies inside this box (up to `slack`).
  bool encloses(const IntervalBounds& other, double slack = 0.0) const;
};

using IntervalMap = NodeMap<IntervalBounds>;

/// Box enclosing an independent node's perturbation set. lp balls with p < inf
/// use the coordinate box [X0 - eps, X0 + eps]; synonym specs take the per
/// coordinate min/max over every candidate word, ignoring the budget.
IntervalBounds input_interval(const PerturbationSpec& spec);

/// Interval transformer for one node given its inputs' boxes.
IntervalBounds interval_transform(const Node& node, std::span<const IntervalBounds* const> inputs,
                                  double exp_cap = kDefaultExpCap);

/// y = M x + b over a box, with the sign split of M.
IntervalBounds affine_interval(const Matrix& pos, const Matrix& neg, const Vector& bias, const IntervalBounds& x);

/// Interval bound propagation in topological order, over the ancestors of
/// `target` when given and over the whole graph otherwise.
IntervalMap ibp_propagate(const Graph& g, const SpecMap& specs, double exp_cap = kDefaultExpCap,
                          std::optional<NodeId> target = std::nullopt);

/// Intersection; if rounding leaves the result inverted the two are merged
/// into their hull instead.
IntervalBounds intersect(const IntervalBounds& a, const IntervalBounds& b);

}  // namespace lirpa
