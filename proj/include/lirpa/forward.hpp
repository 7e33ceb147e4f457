#pragma once

#include <optional>
#include <vector>

#include "lirpa/concretize.hpp"
#include "lirpa/oracles.hpp"

namespace lirpa {

/// Forward-mode result: linear bounds of every processed node over the
/// perturbed coordinates, plus the boxes that were concretized to relax
/// nonlinear nodes.
struct ForwardResult {
  PerturbationLayout layout;
  NodeMap<LinearBounds> bounds;
  IntervalMap boxes;
};

/// Bounds every node `target` depends on (every node when target is empty)
/// in topological order. Perturbed inputs start from identity bounds on their
/// own block; constant inputs fold into the bias.
ForwardResult forward_lirpa(const Graph& g, const SpecMap& specs, const BoundOptions& options = {},
                            std::optional<NodeId> target = std::nullopt);

/// Which nodes need a box because they feed a nonlinear op among `nodes`.
std::vector<bool> nodes_feeding_nonlinear(const Graph& g, const std::vector<NodeId>& nodes);

/// Tightens a concretized box of a ReLU/Exp/Log node with the op's image of
/// its input box, when that box is known.
IntervalBounds refine_with_input_box(const Node& node, IntervalBounds box, const IntervalMap& boxes,
                                     const BoundOptions& options);

}  // namespace lirpa
