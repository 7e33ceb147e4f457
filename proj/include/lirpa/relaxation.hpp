#pragma once

#include "lirpa/graph.hpp"

namespace lirpa {

/// Per-neuron lines with lower_slope*x + lower_intercept <= s(x) <=
/// upper_slope*x + upper_intercept on the pre-activation interval.
struct UnaryRelaxation {
  Vector lower_slope;
  Vector lower_intercept;
  Vector upper_slope;
  Vector upper_intercept;
};

/// Per-neuron planes bounding p(x, y):
/// lower_x*x + lower_y*y + lower_const <= p(x, y) <= upper_x*x + upper_y*y + upper_const.
struct BinaryRelaxation {
  Vector lower_x;
  Vector lower_y;
  Vector lower_const;
  Vector upper_x;
  Vector upper_y;
  Vector upper_const;
};

/// Lower line of an unstable ReLU neuron. Adaptive picks slope 1 when u > |l|
/// and 0 otherwise; Zero always uses slope 0.
enum class ReluLowerMode { Adaptive, Zero };

/// Default cap on exp pre-activation upper bounds (exp(709.8) overflows).
inline constexpr double kDefaultExpCap = 700.0;

UnaryRelaxation relu_relaxation(const Vector& lower, const Vector& upper, ReluLowerMode mode);

/// Chord upper bound and tangent lower bound. Throws ExpOverflowError when an
/// upper bound exceeds `cap` and DomainError for non-finite intervals.
UnaryRelaxation exp_relaxation(const Vector& lower, const Vector& upper, double cap = kDefaultExpCap);

/// Chord lower bound and tangent upper bound. Requires lower > 0.
UnaryRelaxation log_relaxation(const Vector& lower, const Vector& upper);

/// McCormick planes for x*y over [lx, ux] x [ly, uy].
BinaryRelaxation mul_relaxation(const Vector& lx, const Vector& ux, const Vector& ly, const Vector& uy);

}  // namespace lirpa
