#include "lirpa/oracles.hpp"

namespace lirpa {

namespace {

// diag(coef_+) * on_pos + diag(coef_-) * on_neg, row scaling.
Matrix mix_rows(const Vector& coef, const Matrix& on_pos, const Matrix& on_neg) {
  return coef.cwiseMax(0.0).asDiagonal() * on_pos + coef.cwiseMin(0.0).asDiagonal() * on_neg;
}

Vector mix_rows(const Vector& coef, const Vector& on_pos, const Vector& on_neg) {
  return coef.cwiseMax(0.0).cwiseProduct(on_pos) + coef.cwiseMin(0.0).cwiseProduct(on_neg);
}

// coeff_+ * diag(on_pos) + coeff_- * diag(on_neg), column scaling.
Matrix mix_cols(const Matrix& coeff, const Vector& on_pos, const Vector& on_neg) {
  return coeff.cwiseMax(0.0) * on_pos.asDiagonal() + coeff.cwiseMin(0.0) * on_neg.asDiagonal();
}

Vector mix_bias(const Matrix& coeff, const Vector& on_pos, const Vector& on_neg) {
  return coeff.cwiseMax(0.0) * on_pos + coeff.cwiseMin(0.0) * on_neg;
}

void require_boxes(const Node& node, std::span<const IntervalBounds* const> boxes) {
  if (boxes.size() != node.inputs.size()) {
    throw PreconditionError("node " + std::to_string(node.id.value) + " needs one box per input");
  }
  for (const IntervalBounds* b : boxes) {
    if (b == nullptr) {
      throw PreconditionError("missing intermediate bounds for an input of node " + std::to_string(node.id.value));
    }
  }
}

}  // namespace

NodeRelaxation relax_node(const Node& node, std::span<const IntervalBounds* const> input_boxes,
                          const BoundOptions& options) {
  require_boxes(node, input_boxes);
  NodeRelaxation r;
  const IntervalBounds& x = *input_boxes[0];
  switch (node.op) {
    case OpKind::ReLU:
      r.unary = relu_relaxation(x.lower, x.upper, options.relu_mode);
      break;
    case OpKind::Exp:
      r.unary = exp_relaxation(x.lower, x.upper, options.exp_cap);
      break;
    case OpKind::Log:
      r.unary = log_relaxation(x.lower, x.upper);
      break;
    case OpKind::MulElementwise: {
      const IntervalBounds& y = *input_boxes[1];
      r.binary = mul_relaxation(x.lower, x.upper, y.lower, y.upper);
      r.is_binary = true;
      break;
    }
    default:
      throw PreconditionError("node " + std::to_string(node.id.value) + " is not a nonlinear op");
  }
  return r;
}

LinearBounds forward_oracle(const Node& node, std::span<const LinearBounds* const> inputs,
                            std::span<const IntervalBounds* const> input_boxes, const BoundOptions& options) {
  if (inputs.size() != node.inputs.size()) {
    throw PreconditionError("forward_oracle: node " + std::to_string(node.id.value) + " expects " +
                            std::to_string(node.inputs.size()) + " input bounds");
  }
  const auto in = [&](std::size_t k) -> const LinearBounds& { return *inputs[k]; };
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    if (in(k).cols() != in(0).cols()) throw PreconditionError("forward_oracle: input bounds differ in width");
  }

  switch (node.op) {
    case OpKind::Input:
      throw PreconditionError("forward_oracle: input nodes have no oracle");
    case OpKind::Affine: {
      const AffineParams& p = node.params();
      const LinearBounds& j = in(0);
      if (p.weight.cols() != j.rows()) throw PreconditionError("forward_oracle: affine shape mismatch");
      return {p.weight_pos * j.lower_weight + p.weight_neg * j.upper_weight,
              p.weight_pos * j.lower_bias + p.weight_neg * j.upper_bias + p.bias,
              p.weight_pos * j.upper_weight + p.weight_neg * j.lower_weight,
              p.weight_pos * j.upper_bias + p.weight_neg * j.lower_bias + p.bias};
    }
    case OpKind::Neg: {
      const LinearBounds& j = in(0);
      return {-j.upper_weight, -j.upper_bias, -j.lower_weight, -j.lower_bias};
    }
    case OpKind::Add: {
      const LinearBounds& j = in(0);
      const LinearBounds& k = in(1);
      return {j.lower_weight + k.lower_weight, j.lower_bias + k.lower_bias, j.upper_weight + k.upper_weight,
              j.upper_bias + k.upper_bias};
    }
    case OpKind::Sub: {
      const LinearBounds& j = in(0);
      const LinearBounds& k = in(1);
      return {j.lower_weight - k.upper_weight, j.lower_bias - k.upper_bias, j.upper_weight - k.lower_weight,
              j.upper_bias - k.lower_bias};
    }
    case OpKind::SumReduce: {
      const LinearBounds& j = in(0);
      return {j.lower_weight.colwise().sum(), Vector::Constant(1, j.lower_bias.sum()), j.upper_weight.colwise().sum(),
              Vector::Constant(1, j.upper_bias.sum())};
    }
    case OpKind::ReLU:
    case OpKind::Exp:
    case OpKind::Log: {
      const UnaryRelaxation r = relax_node(node, input_boxes, options).unary;
      const LinearBounds& j = in(0);
      return {mix_rows(r.lower_slope, j.lower_weight, j.upper_weight),
              mix_rows(r.lower_slope, j.lower_bias, j.upper_bias) + r.lower_intercept,
              mix_rows(r.upper_slope, j.upper_weight, j.lower_weight),
              mix_rows(r.upper_slope, j.upper_bias, j.lower_bias) + r.upper_intercept};
    }
    case OpKind::MulElementwise: {
      const BinaryRelaxation r = relax_node(node, input_boxes, options).binary;
      const LinearBounds& j = in(0);
      const LinearBounds& k = in(1);
      return {mix_rows(r.lower_x, j.lower_weight, j.upper_weight) + mix_rows(r.lower_y, k.lower_weight, k.upper_weight),
              mix_rows(r.lower_x, j.lower_bias, j.upper_bias) + mix_rows(r.lower_y, k.lower_bias, k.upper_bias) +
                  r.lower_const,
              mix_rows(r.upper_x, j.upper_weight, j.lower_weight) + mix_rows(r.upper_y, k.upper_weight, k.lower_weight),
              mix_rows(r.upper_x, j.upper_bias, j.lower_bias) + mix_rows(r.upper_y, k.upper_bias, k.lower_bias) +
                  r.upper_const};
    }
  }
  throw PreconditionError("forward_oracle: unhandled op");
}

BackwardStep backward_oracle(const Graph& g, const Node& node, const Matrix& lower_coeff, const Matrix& upper_coeff,
                             std::span<const IntervalBounds* const> input_boxes, const BoundOptions& options) {
  if (static_cast<std::size_t>(lower_coeff.cols()) != node.dim || upper_coeff.cols() != lower_coeff.cols() ||
      upper_coeff.rows() != lower_coeff.rows()) {
    throw PreconditionError("backward_oracle: coefficient shape does not match node " + std::to_string(node.id.value));
  }
  const Eigen::Index rows = lower_coeff.rows();
  BackwardStep s;
  s.lower_bias = Vector::Zero(rows);
  s.upper_bias = Vector::Zero(rows);

  switch (node.op) {
    case OpKind::Input:
      throw PreconditionError("backward_oracle: input nodes have no oracle");
    case OpKind::Affine: {
      const AffineParams& p = node.params();
      s.lower = {lower_coeff * p.weight};
      s.upper = {upper_coeff * p.weight};
      s.lower_bias = lower_coeff * p.bias;
      s.upper_bias = upper_coeff * p.bias;
      break;
    }
    case OpKind::Neg:
      s.lower = {-lower_coeff};
      s.upper = {-upper_coeff};
      break;
    case OpKind::Add:
      s.lower = {lower_coeff, lower_coeff};
      s.upper = {upper_coeff, upper_coeff};
      break;
    case OpKind::Sub:
      s.lower = {lower_coeff, -lower_coeff};
      s.upper = {upper_coeff, -upper_coeff};
      break;
    case OpKind::SumReduce: {
      const auto width = static_cast<Eigen::Index>(g.node(node.inputs[0]).dim);
      s.lower = {lower_coeff.col(0).replicate(1, width)};
      s.upper = {upper_coeff.col(0).replicate(1, width)};
      break;
    }
    case OpKind::ReLU:
    case OpKind::Exp:
    case OpKind::Log: {
      const UnaryRelaxation r = relax_node(node, input_boxes, options).unary;
      s.lower = {mix_cols(lower_coeff, r.lower_slope, r.upper_slope)};
      s.upper = {mix_cols(upper_coeff, r.upper_slope, r.lower_slope)};
      s.lower_bias = mix_bias(lower_coeff, r.lower_intercept, r.upper_intercept);
      s.upper_bias = mix_bias(upper_coeff, r.upper_intercept, r.lower_intercept);
      break;
    }
    case OpKind::MulElementwise: {
      const BinaryRelaxation r = relax_node(node, input_boxes, options).binary;
      s.lower = {mix_cols(lower_coeff, r.lower_x, r.upper_x), mix_cols(lower_coeff, r.lower_y, r.upper_y)};
      s.upper = {mix_cols(upper_coeff, r.upper_x, r.lower_x), mix_cols(upper_coeff, r.upper_y, r.lower_y)};
      s.lower_bias = mix_bias(lower_coeff, r.lower_const, r.upper_const);
      s.upper_bias = mix_bias(upper_coeff, r.upper_const, r.lower_const);
      break;
    }
  }
  return s;
}

}  // namespace lirpa
