#pragma once

#include <span>
#include <vector>

#include "lirpa/interval.hpp"
#include "lirpa/linear_bounds.hpp"
#include "lirpa/relaxation.hpp"

namespace lirpa {

struct BoundOptions {
  ReluLowerMode relu_mode = ReluLowerMode::Adaptive;
  /// Exp pre-activation upper bounds above this raise ExpOverflowError.
  double exp_cap = kDefaultExpCap;
};

/// Linear relaxation of one nonlinear node: unary ops fill `unary`, binary
/// ops fill `binary`.
struct NodeRelaxation {
  UnaryRelaxation unary;
  BinaryRelaxation binary;
  bool is_binary = false;
};

/// Builds the relaxation of a nonlinear node from its inputs' boxes.
NodeRelaxation relax_node(const Node& node, std::span<const IntervalBounds* const> input_boxes,
                          const BoundOptions& options);

/// Forward oracle: linear bounds of `node` from the bounds of its inputs.
/// `input_boxes` is only read for nonlinear ops.
LinearBounds forward_oracle(const Node& node, std::span<const LinearBounds* const> inputs,
                            std::span<const IntervalBounds* const> input_boxes, const BoundOptions& options);

/// Output of a backward oracle: one (lower, upper) coefficient pair per graph
/// input of the node, in the node's input order, plus bias terms.
struct BackwardStep {
  std::vector<Matrix> lower;
  std::vector<Matrix> upper;
  Vector lower_bias;
  Vector upper_bias;
};

/// Backward oracle: rewrites lower_coeff * h_i and upper_coeff * h_i as linear
/// functions of the node's inputs. `g` supplies input dimensions.
BackwardStep backward_oracle(const Graph& g, const Node& node, const Matrix& lower_coeff, const Matrix& upper_coeff,
                             std::span<const IntervalBounds* const> input_boxes, const BoundOptions& options);

}  // namespace lirpa
