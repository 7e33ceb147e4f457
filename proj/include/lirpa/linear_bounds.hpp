#pragma once

#include "lirpa/graph.hpp"

namespace lirpa {

/// lower_weight * X + lower_bias <= h(X) <= upper_weight * X + upper_bias,
/// with X the concatenated perturbed coordinates.
struct LinearBounds {
  Matrix lower_weight;
  Vector lower_bias;
  Matrix upper_weight;
  Vector upper_bias;

  static LinearBounds zero(Eigen::Index rows, Eigen::Index cols) {
    return {Matrix::Zero(rows, cols), Vector::Zero(rows), Matrix::Zero(rows, cols), Vector::Zero(rows)};
  }
  Eigen::Index rows() const { return lower_bias.size(); }
  Eigen::Index cols() const { return lower_weight.cols(); }

  /// Column block [offset, offset + width) of both weight matrices; biases
  /// are kept.
  LinearBounds block(Eigen::Index offset, Eigen::Index width) const {
    return {lower_weight.middleCols(offset, width), lower_bias, upper_weight.middleCols(offset, width), upper_bias};
  }
};

}  // namespace lirpa
