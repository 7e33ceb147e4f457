#include "lirpa/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lirpa {

namespace {

void check_interval(const Vector& lower, const Vector& upper, const char* who) {
  if (lower.size() != upper.size()) {
    throw PreconditionError(std::string(who) + ": lower and upper bounds differ in length");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (std::isnan(lower[k]) || std::isnan(upper[k])) {
      throw DomainError(std::string(who) + ": NaN bound at neuron " + std::to_string(k));
    }
    if (lower[k] > upper[k]) {
      throw PreconditionError(std::string(who) + ": lower > upper at neuron " + std::to_string(k));
    }
  }
}

UnaryRelaxation sized(Eigen::Index n) {
  return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
}

// Intervals narrower than this are treated as a single point.
constexpr double kPointWidth = 1e-12;

}  // namespace

UnaryRelaxation relu_relaxation(const Vector& lower, const Vector& upper, ReluLowerMode mode) {
  check_interval(lower, upper, "relu_relaxation");
  UnaryRelaxation r = sized(lower.size());
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    const double l = lower[k];
    const double u = upper[k];
    if (u <= 0.0) continue;
    if (l >= 0.0) {
      r.lower_slope[k] = 1.0;
      r.upper_slope[k] = 1.0;
      continue;
    }
    const double slope = u / (u - l);
    r.upper_slope[k] = slope;
    r.upper_intercept[k] = -slope * l;
    r.lower_slope[k] = (mode == ReluLowerMode::Adaptive && u > -l) ? 1.0 : 0.0;
  }
  return r;
}

UnaryRelaxation exp_relaxation(const Vector& lower, const Vector& upper, double cap) {
  check_interval(lower, upper, "exp_relaxation");
  UnaryRelaxation r = sized(lower.size());
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    const double l = lower[k];
    const double u = upper[k];
    if (!std::isfinite(l) || !std::isfinite(u)) {
      throw DomainError("exp_relaxation: non-finite interval at neuron " + std::to_string(k));
    }
    if (u > cap) {
      throw ExpOverflowError("exp_relaxation: upper bound " + std::to_string(u) + " exceeds cap " +
                             std::to_string(cap));
    }
    const double width = u - l;
    const double el = std::exp(l);
    if (width <= kPointWidth) {
      // Tangent at l for both sides; exact on a point interval.
      r.lower_slope[k] = el;
      r.lower_intercept[k] = el * (1.0 - l);
      r.upper_slope[k] = el;
      r.upper_intercept[k] = el * (1.0 - l) + (std::exp(u) - el);
      continue;
    }
    // expm1 keeps narrow chords accurate; wide ones would overflow it.
    const double ratio = width < 1.0 ? std::expm1(width) / width : (std::exp(u) - el) / (width * el);
    const double chord = width < 1.0 ? el * ratio : (std::exp(u) - el) / width;
    r.upper_slope[k] = chord;
    r.upper_intercept[k] = el - chord * l;

    // Tangent where exp' equals the chord slope, capped at the midpoint.
    const double parallel = l + std::log(ratio);
    const double d = std::clamp(std::min(0.5 * (l + u), parallel), l, u);
    const double ed = std::exp(d);
    r.lower_slope[k] = ed;
    r.lower_intercept[k] = ed * (1.0 - d);
  }
  return r;
}

UnaryRelaxation log_relaxation(const Vector& lower, const Vector& upper) {
  check_interval(lower, upper, "log_relaxation");
  UnaryRelaxation r = sized(lower.size());
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    const double l = lower[k];
    const double u = upper[k];
    if (!(l > 0.0)) throw DomainError("log_relaxation: interval must be strictly positive");
    if (!std::isfinite(u)) throw DomainError("log_relaxation: non-finite interval");
    const double ll = std::log(l);
    if (u - l <= kPointWidth * std::max(1.0, l)) {
      r.upper_slope[k] = 1.0 / l;
      r.upper_intercept[k] = ll - 1.0;
      r.lower_slope[k] = 1.0 / l;
      r.lower_intercept[k] = ll - 1.0 - (u - l) / l;
      continue;
    }
    const double chord = std::log1p((u - l) / l) / (u - l);
    r.lower_slope[k] = chord;
    r.lower_intercept[k] = ll - chord * l;
    // Tangent where log' equals the chord slope.
    const double d = std::clamp(1.0 / chord, l, u);
    r.upper_slope[k] = 1.0 / d;
    r.upper_intercept[k] = std::log(d) - 1.0;
  }
  return r;
}

BinaryRelaxation mul_relaxation(const Vector& lx, const Vector& ux, const Vector& ly, const Vector& uy) {
  check_interval(lx, ux, "mul_relaxation");
  check_interval(ly, uy, "mul_relaxation");
  if (lx.size() != ly.size()) throw PreconditionError("mul_relaxation: operand lengths differ");
  const Eigen::Index n = lx.size();
  BinaryRelaxation r{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n),
                     Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    if (lx[k] == ux[k]) {
      // x is constant: z = c*y exactly.
      r.lower_y[k] = r.upper_y[k] = lx[k];
      continue;
    }
    if (ly[k] == uy[k]) {
      r.lower_x[k] = r.upper_x[k] = ly[k];
      continue;
    }
    // (x - lx)(y - ly) >= 0
    r.lower_x[k] = ly[k];
    r.lower_y[k] = lx[k];
    r.lower_const[k] = -lx[k] * ly[k];
    // (x - lx)(uy - y) >= 0
    r.upper_x[k] = uy[k];
    r.upper_y[k] = lx[k];
    r.upper_const[k] = -lx[k] * uy[k];
  }
  return r;
}

}  // namespace lirpa
