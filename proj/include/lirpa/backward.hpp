#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "lirpa/concretize.hpp"
#include "lirpa/oracles.hpp"

namespace lirpa {

/// Bookkeeping of one backward pass. `lower`/`upper` hold the coefficient
/// maps A of every node touched so far, `remaining` the out-degrees still
/// unprocessed, and `visits` how often each node was popped.
struct BackwardState {
  NodeMap<Matrix> lower;
  NodeMap<Matrix> upper;
  Vector lower_bias;
  Vector upper_bias;
  std::vector<int> remaining;
  std::vector<int> visits;
};

/// Called after each popped node has been propagated and cleared.
using BackwardObserver = std::function<void(NodeId popped, const BackwardState& state)>;

struct BackwardResult {
  /// Bounds of out_coeff * h_target over the perturbed coordinates.
  LinearBounds bounds;
  /// Final state; every dependent node's maps are zero here.
  BackwardState state;
};

/// Breadth-first backward propagation from `target`. A node is enqueued once
/// all of its successors on paths to `target` have been processed; nodes that
/// become ready together are enqueued in ascending id. `boxes` must cover the
/// inputs of every nonlinear node on a path to `target`. `out_coeff` (default
/// identity) left-multiplies the target.
BackwardResult backward_lirpa(const Graph& g, NodeId target, const IntervalMap& boxes, const SpecMap& specs,
                              const std::optional<Matrix>& out_coeff = std::nullopt,
                              const BoundOptions& options = {}, const BackwardObserver& observer = {});

enum class BoundStrategy { IBP, Forward, BackwardOnly, IBPPlusBackward, ForwardPlusBackward };

std::string_view strategy_name(BoundStrategy s);
/// Accepts "ibp", "forward", "backward", "ibp+backward", "forward+backward".
std::optional<BoundStrategy> strategy_from_name(std::string_view name);

/// Boxes for every node whose box the final pass on `target` needs. IBP and
/// IBP+Backward use interval propagation, Forward and Forward+Backward use
/// concretized forward bounds, BackwardOnly runs a backward pass per needed
/// node in topological order and memoizes the results.
IntervalMap compute_intermediates(const Graph& g, const SpecMap& specs, BoundStrategy strategy, NodeId target,
                                  const BoundOptions& options = {});

struct BoundResult {
  IntervalBounds bounds;
  /// Linear bounds over the perturbed coordinates, absent for IBP.
  std::optional<LinearBounds> linear;
  /// Boxes the strategy computed along the way.
  IntervalMap intermediates;
};

/// Bounds out_coeff * h_target (identity when absent) under `strategy`.
BoundResult compute_bounds(const Graph& g, const SpecMap& specs, BoundStrategy strategy, NodeId target,
                           const BoundOptions& options = {}, const std::optional<Matrix>& out_coeff = std::nullopt);

}  // namespace lirpa
