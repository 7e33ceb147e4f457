#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lirpa/relaxation.hpp"

using namespace lirpa;
using namespace lirpa::testing;

namespace {

constexpr double kSlack = 1e-9;

// Checks lower(x) <= f(x) <= upper(x) at `samples` uniform points plus both
// endpoints of every neuron.
template <typename F>
void require_sandwich(const UnaryRelaxation& r, const Vector& l, const Vector& u, F f, std::mt19937_64& rng,
                      int samples = 500) {
  for (Eigen::Index k = 0; k < l.size(); ++k) {
    std::uniform_real_distribution<double> pick(l[k], u[k]);
    for (int s = -2; s < samples; ++s) {
      const double x = s == -2 ? l[k] : s == -1 ? u[k] : pick(rng);
      const double y = f(x);
      const double scale = std::max(1.0, std::abs(y));
      REQUIRE(r.lower_slope[k] * x + r.lower_intercept[k] <= y + kSlack * scale);
      REQUIRE(r.upper_slope[k] * x + r.upper_intercept[k] >= y - kSlack * scale);
    }
  }
}

double relu(double x) { return x > 0 ? x : 0.0; }

}  // namespace

TEST_CASE("relu: worked example first layer, zero mode") {
  const auto r = relu_relaxation(vec({-5, -10}), vec({7, 18}), ReluLowerMode::Zero);
  CHECK(r.upper_slope[0] == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  CHECK(r.upper_intercept[0] == doctest::Approx(35.0 / 12.0).epsilon(1e-15));
  CHECK(r.upper_slope[1] == doctest::Approx(18.0 / 28.0).epsilon(1e-15));
  CHECK(r.upper_intercept[1] == doctest::Approx(180.0 / 28.0).epsilon(1e-15));
  CHECK(r.lower_slope == Vector::Zero(2));
  CHECK(r.lower_intercept == Vector::Zero(2));
  // Values as printed in the worked example.
  CHECK(r.upper_slope[0] == doctest::Approx(0.58).epsilon(0.01));
  CHECK(r.upper_slope[1] == doctest::Approx(0.64).epsilon(0.01));
  CHECK(r.upper_intercept[0] == doctest::Approx(2.92).epsilon(0.01));
}

TEST_CASE("relu: stable neurons") {
  for (auto mode : {ReluLowerMode::Adaptive, ReluLowerMode::Zero}) {
    const auto on = relu_relaxation(vec({1}), vec({3}), mode);
    CHECK(on.lower_slope[0] == 1.0);
    CHECK(on.upper_slope[0] == 1.0);
    CHECK(on.lower_intercept[0] == 0.0);
    CHECK(on.upper_intercept[0] == 0.0);
    const auto off = relu_relaxation(vec({-3}), vec({-1}), mode);
    CHECK(off.lower_slope[0] == 0.0);
    CHECK(off.upper_slope[0] == 0.0);
    CHECK(off.upper_intercept[0] == 0.0);
  }
}

TEST_CASE("relu: adaptive tie keeps slope zero") {
  const auto r = relu_relaxation(vec({-1.5}), vec({1.5}), ReluLowerMode::Adaptive);
  CHECK(r.upper_slope[0] == 0.5);
  CHECK(r.upper_intercept[0] == 0.75);
  CHECK(r.lower_slope[0] == 0.0);
  const auto up = relu_relaxation(vec({-1.0}), vec({1.5}), ReluLowerMode::Adaptive);
  CHECK(up.lower_slope[0] == 1.0);
}

TEST_CASE("relu: inverted interval is rejected") {
  CHECK_THROWS_AS(relu_relaxation(vec({1}), vec({0}), ReluLowerMode::Zero), PreconditionError);
}

TEST_CASE("relu: zero mode lines sandwich relu") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int t = 0; t < 200; ++t) {
    double l = d(rng), u = d(rng);
    if (l > u) std::swap(l, u);
    const auto r = relu_relaxation(vec({l}), vec({u}), ReluLowerMode::Zero);
    CHECK(r.lower_slope[0] == (l >= 0.0 ? 1.0 : 0.0));
    CHECK(r.lower_intercept[0] == 0.0);
    for (double x : {l, 0.5 * (l + u), u}) {
      CHECK(r.lower_slope[0] * x + r.lower_intercept[0] <= relu(x) + 1e-12);
      CHECK(r.upper_slope[0] * x + r.upper_intercept[0] >= relu(x) - 1e-12);
    }
  }
}

TEST_CASE("exp: point interval and the [-1.5, 1.5] chord") {
  const auto p = exp_relaxation(vec({0}), vec({0}));
  CHECK(p.upper_slope[0] == 1.0);
  CHECK(p.upper_intercept[0] == 1.0);
  CHECK(p.lower_slope[0] == 1.0);
  CHECK(p.lower_intercept[0] == 1.0);

  const auto r = exp_relaxation(vec({-1.5}), vec({1.5}));
  const double slope = (std::exp(1.5) - std::exp(-1.5)) / 3.0;
  CHECK(r.upper_slope[0] == doctest::Approx(slope).epsilon(1e-14));
  CHECK(r.upper_intercept[0] == doctest::Approx(std::exp(-1.5) + 1.5 * slope).epsilon(1e-14));
  CHECK(r.upper_slope[0] == doctest::Approx(1.4195).epsilon(1e-4));
  CHECK(r.upper_intercept[0] == doctest::Approx(2.3524).epsilon(1e-4));
  // Tangent at the midpoint 0.
  CHECK(r.lower_slope[0] == doctest::Approx(1.0));
  CHECK(r.lower_intercept[0] == doctest::Approx(1.0));
}

TEST_CASE("exp: errors") {
  CHECK_THROWS_AS(exp_relaxation(vec({0}), vec({INFINITY})), DomainError);
  CHECK_THROWS_AS(exp_relaxation(vec({0}), vec({800})), ExpOverflowError);
  CHECK_THROWS_AS(exp_relaxation(vec({0}), vec({20}), 10.0), ExpOverflowError);
  CHECK_NOTHROW(exp_relaxation(vec({-800}), vec({0})));
}

TEST_CASE("exp: tangent lower bound holds everywhere") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> d(-4, 4);
  for (int t = 0; t < 200; ++t) {
    double l = d(rng), u = d(rng);
    if (l > u) std::swap(l, u);
    const auto r = exp_relaxation(vec({l}), vec({u}));
    for (double x = -20; x <= 20; x += 0.25) {
      REQUIRE(r.lower_slope[0] * x + r.lower_intercept[0] <= std::exp(x) * (1 + 1e-12));
    }
  }
}

TEST_CASE("property: sampled sandwich for relu, exp and log") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> d(-6, 6);
  for (int t = 0; t < 100; ++t) {
    Vector l(4), u(4);
    for (int k = 0; k < 4; ++k) {
      double a = d(rng), b = d(rng);
      if (k == 3) b = a;  // degenerate neuron
      l[k] = std::min(a, b);
      u[k] = std::max(a, b);
    }
    for (auto mode : {ReluLowerMode::Adaptive, ReluLowerMode::Zero}) {
      require_sandwich(relu_relaxation(l, u, mode), l, u, relu, rng);
    }
    require_sandwich(exp_relaxation(l, u), l, u, [](double x) { return std::exp(x); }, rng);
    const Vector pl = l.array().exp();
    const Vector pu = u.array().exp();
    require_sandwich(log_relaxation(pl, pu), pl, pu, [](double x) { return std::log(x); }, rng);
  }
}

TEST_CASE("log: domain") {
  CHECK_THROWS_AS(log_relaxation(vec({0}), vec({1})), DomainError);
  CHECK_THROWS_AS(log_relaxation(vec({-1}), vec({1})), DomainError);
  const auto r = log_relaxation(vec({1}), vec({1}));
  CHECK(r.upper_slope[0] == 1.0);
  CHECK(r.upper_intercept[0] == -1.0);
}

TEST_CASE("mul: constant operand is exact") {
  const auto r = mul_relaxation(vec({2}), vec({2}), vec({-1}), vec({3}));
  CHECK(r.lower_x[0] == 0.0);
  CHECK(r.lower_y[0] == 2.0);
  CHECK(r.lower_const[0] == 0.0);
  CHECK(r.upper_x[0] == 0.0);
  CHECK(r.upper_y[0] == 2.0);
  CHECK(r.upper_const[0] == 0.0);
}

TEST_CASE("mul: unit box planes") {
  const auto r = mul_relaxation(vec({0}), vec({1}), vec({0}), vec({1}));
  CHECK(r.lower_x[0] == 0.0);
  CHECK(r.lower_y[0] == 0.0);
  CHECK(r.lower_const[0] == 0.0);
  // upper plane uy*x + lx*y - lx*uy = x
  CHECK(r.upper_x[0] == 1.0);
  CHECK(r.upper_y[0] == 0.0);
  CHECK(r.upper_const[0] == 0.0);
}

TEST_CASE("property: mul planes bound x*y on a 21x21 grid and at random points") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> d(-4, 4);
  for (int t = 0; t < 300; ++t) {
    double lx = d(rng), ux = d(rng), ly = d(rng), uy = d(rng);
    if (lx > ux) std::swap(lx, ux);
    if (ly > uy) std::swap(ly, uy);
    if (t % 10 == 0) ux = lx;
    if (t % 10 == 1) uy = ly;
    const auto r = mul_relaxation(vec({lx}), vec({ux}), vec({ly}), vec({uy}));
    const auto check = [&](double x, double y) {
      const double z = x * y;
      REQUIRE(r.lower_x[0] * x + r.lower_y[0] * y + r.lower_const[0] <= z + kSlack * std::max(1.0, std::abs(z)));
      REQUIRE(r.upper_x[0] * x + r.upper_y[0] * y + r.upper_const[0] >= z - kSlack * std::max(1.0, std::abs(z)));
    };
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) check(lx + (ux - lx) * i / 20.0, ly + (uy - ly) * j / 20.0);
    }
    std::uniform_real_distribution<double> px(lx, ux), py(ly, uy);
    for (int s = 0; s < 500; ++s) check(px(rng), py(rng));
  }
}
