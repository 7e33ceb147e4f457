#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "lirpa/backward.hpp"
#include "lirpa/forward.hpp"
#include "lirpa/sampling.hpp"

using namespace lirpa;
using namespace lirpa::testing;

namespace {

BoundOptions zero_mode() { return {ReluLowerMode::Zero, kDefaultExpCap}; }

constexpr BoundStrategy kAll[] = {BoundStrategy::IBP, BoundStrategy::Forward, BoundStrategy::BackwardOnly,
                                  BoundStrategy::IBPPlusBackward, BoundStrategy::ForwardPlusBackward};

}  // namespace

TEST_CASE("strategy names") {
  for (BoundStrategy s : kAll) CHECK(strategy_from_name(strategy_name(s)) == s);
  CHECK_FALSE(strategy_from_name("crown").has_value());
}

TEST_CASE("worked example, backward mode") {
  const Instance inst = worked_example();
  const Graph& g = inst.graph;
  const IntervalMap boxes = compute_intermediates(g, inst.specs, BoundStrategy::Forward, g.output(), zero_mode());

  std::vector<std::pair<NodeId, Matrix>> lower_at_2, upper_at_2, at_4;
  const auto observer = [&](NodeId popped, const BackwardState& st) {
    if (popped.value == 5) at_4.emplace_back(popped, st.lower.at(NodeId{4}));
    if (popped.value == 3) {
      lower_at_2.emplace_back(popped, st.lower.at(NodeId{2}));
      upper_at_2.emplace_back(popped, st.upper.at(NodeId{2}));
    }
  };
  const BackwardResult r = backward_lirpa(g, g.output(), boxes, inst.specs, std::nullopt, zero_mode(), observer);

  REQUIRE(at_4.size() == 1);
  CHECK(at_4[0].second == mat({{-2, 1}}));
  REQUIRE(lower_at_2.size() == 1);
  CHECK(lower_at_2[0].second(0, 0) == doctest::Approx(-1.5));
  CHECK(lower_at_2[0].second(0, 1) == doctest::Approx(2.75));
  CHECK(upper_at_2[0].second(0, 0) == doctest::Approx(2.0));
  CHECK(upper_at_2[0].second(0, 1) == doctest::Approx(1.0));

  CHECK(r.bounds.lower_weight(0, 0) == doctest::Approx(-1.75).epsilon(1e-12));
  CHECK(r.bounds.lower_weight(0, 1) == doctest::Approx(-0.875).epsilon(1e-12));
  CHECK(r.bounds.upper_weight(0, 0) == doctest::Approx(0.40).epsilon(0.02));
  CHECK(r.bounds.upper_weight(0, 1) == doctest::Approx(3.74).epsilon(0.01));
  CHECK(r.bounds.lower_bias[0] == doctest::Approx(-35.875));
  CHECK(r.bounds.upper_bias[0] == doctest::Approx(12.26).epsilon(0.001));

  const auto c = concretize(r.bounds, PerturbationLayout(g, inst.specs), inst.specs);
  CHECK(c.lower[0] == doctest::Approx(-42).epsilon(1e-12));
  CHECK(c.upper[0] == doctest::Approx(170.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("worked example, every strategy") {
  const Instance inst = worked_example();
  const auto run = [&](BoundStrategy s) {
    return compute_bounds(inst.graph, inst.specs, s, inst.graph.output(), zero_mode()).bounds;
  };
  CHECK(run(BoundStrategy::IBP).lower[0] == -56.0);
  CHECK(run(BoundStrategy::IBP).upper[0] == 32.0);
  CHECK(run(BoundStrategy::Forward).lower[0] == doctest::Approx(-56));
  CHECK(run(BoundStrategy::BackwardOnly).lower[0] == doctest::Approx(-42));
  CHECK(run(BoundStrategy::BackwardOnly).upper[0] == doctest::Approx(24.2857).epsilon(1e-5));
  // Regression value: IBP boxes give the same relaxations on this net.
  CHECK(run(BoundStrategy::IBPPlusBackward).lower[0] == doctest::Approx(-42));
  CHECK(run(BoundStrategy::IBPPlusBackward).upper[0] == doctest::Approx(170.0 / 7.0));
  CHECK(run(BoundStrategy::ForwardPlusBackward).lower[0] == doctest::Approx(-42));

  const double wb = run(BoundStrategy::BackwardOnly).width()[0];
  const double wf = run(BoundStrategy::Forward).width()[0];
  const double wi = run(BoundStrategy::IBP).width()[0];
  CHECK(wb <= wf);
  CHECK(wf <= wi);

  // Backward-derived intermediate boxes match the forward ones here.
  const auto back = compute_intermediates(inst.graph, inst.specs, BoundStrategy::BackwardOnly, inst.graph.output(),
                                          zero_mode());
  const auto fwd = compute_intermediates(inst.graph, inst.specs, BoundStrategy::Forward, inst.graph.output(),
                                         zero_mode());
  for (NodeId id : {NodeId{1}, NodeId{3}}) {
    CHECK((back.at(id).lower - fwd.at(id).lower).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.at(id).upper - fwd.at(id).upper).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("missing intermediate boxes") {
  const Instance inst = worked_example();
  CHECK_THROWS_AS(backward_lirpa(inst.graph, inst.graph.output(), IntervalMap(6), inst.specs), PreconditionError);
}

TEST_CASE("out_coeff shape is checked") {
  const Instance inst = worked_example();
  CHECK_THROWS_AS(compute_bounds(inst.graph, inst.specs, BoundStrategy::BackwardOnly, inst.graph.output(), {},
                                 Matrix::Ones(1, 2)),
                  PreconditionError);
}

TEST_CASE("affine chain: every strategy is exact and identical") {
  GraphBuilder b;
  const NodeId x = b.add_input(2);
  const NodeId a = b.add_affine(x, mat({{1, -2}, {0.5, 3}}), vec({1, 0}));
  const NodeId n = b.add_op(OpKind::Neg, {a}, 2);
  const NodeId s = b.add_op(OpKind::Sub, {n, a}, 2);
  b.set_output(b.add_affine(s, mat({{2, 1}}), vec({-1})));
  b.mark_perturbed(x);
  const Graph g = b.build();
  SpecMap specs(5);
  specs.set(x, LpBallSpec{vec({0.3, -0.1}), 0.25, 2.0});
  const auto ref = compute_bounds(g, specs, BoundStrategy::BackwardOnly, g.output()).bounds;
  for (BoundStrategy st : kAll) {
    const auto r = compute_bounds(g, specs, st, g.output());
    if (r.linear) {
      CHECK(((r.linear->lower_weight - r.linear->upper_weight).cwiseAbs().maxCoeff()) <= 1e-12);
    }
    if (st != BoundStrategy::IBP) {
      CHECK((r.bounds.lower - ref.lower).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((r.bounds.upper - ref.upper).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("target that is an input") {
  const Instance inst = worked_example();
  const auto r = compute_bounds(inst.graph, inst.specs, BoundStrategy::BackwardOnly, NodeId{0});
  CHECK(r.bounds.lower == vec({-2, -1}));
  CHECK(r.bounds.upper == vec({2, 3}));
}

TEST_CASE("property: backward pass zeroes every dependent map on random graphs") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 100; ++t) {
    const Instance inst = random_graph(rng);
    const Graph& g = inst.graph;
    const IntervalMap boxes = ibp_propagate(g, inst.specs);
    const BackwardResult r = backward_lirpa(g, g.output(), boxes, inst.specs);
    const auto anc = ancestors_in_order(g, g.output());
    std::vector<bool> on_path(g.size(), false);
    for (NodeId id : anc) on_path[id.value] = true;
    for (const Node& n : g.nodes()) {
      if (n.is_independent()) {
        REQUIRE(r.state.visits[n.id.value] == 0);
        continue;
      }
      REQUIRE(r.state.visits[n.id.value] == (on_path[n.id.value] ? 1 : 0));
      if (const Matrix* m = r.state.lower.find(n.id)) REQUIRE(m->isZero(0.0));
      if (const Matrix* m = r.state.upper.find(n.id)) REQUIRE(m->isZero(0.0));
      REQUIRE(r.state.remaining[n.id.value] == 0);
    }
  }
}

TEST_CASE("property: the partial bound holds after every pop") {
  std::mt19937_64 rng(72);
  for (int t = 0; t < 40; ++t) {
    const Instance inst = random_graph(rng);
    const Graph& g = inst.graph;
    const IntervalMap boxes = ibp_propagate(g, inst.specs);
    std::vector<Assignment> points;
    std::vector<NodeMap<Vector>> values;
    for (int s = 0; s < 100; ++s) {
      points.push_back(sample_assignment(g, inst.specs, rng));
      values.push_back(evaluate(g, points.back()));
    }
    int snapshots = 0;
    const auto observer = [&](NodeId, const BackwardState& st) {
      ++snapshots;
      for (const auto& v : values) {
        Vector lo = st.lower_bias;
        Vector hi = st.upper_bias;
        for (const Node& n : g.nodes()) {
          if (const Matrix* m = st.lower.find(n.id)) lo += *m * v.at(n.id);
          if (const Matrix* m = st.upper.find(n.id)) hi += *m * v.at(n.id);
        }
        const Vector& h = v.at(g.output());
        REQUIRE((lo.array() <= h.array() + 1e-7).all());
        REQUIRE((hi.array() >= h.array() - 1e-7).all());
      }
    };
    (void)backward_lirpa(g, g.output(), boxes, inst.specs, std::nullopt, {}, observer);
    if (!g.node(g.output()).is_independent()) REQUIRE(snapshots > 0);
  }
}

TEST_CASE("property: every strategy is sound on random graphs") {
  std::mt19937_64 rng(73);
  for (int t = 0; t < 30; ++t) {
    const Instance inst = random_graph(rng);
    const Graph& g = inst.graph;
    std::vector<Vector> outs;
    for (int s = 0; s < 500; ++s) outs.push_back(evaluate(g, sample_assignment(g, inst.specs, rng)).at(g.output()));
    for (BoundStrategy st : kAll) {
      for (auto mode : {ReluLowerMode::Adaptive, ReluLowerMode::Zero}) {
        const auto r = compute_bounds(g, inst.specs, st, g.output(), {mode, kDefaultExpCap});
        for (const Vector& h : outs) REQUIRE(r.bounds.contains(h, 1e-7));
      }
    }
  }
}

TEST_CASE("property: nonnegative out_coeff is never looser than composing the identity run") {
  std::mt19937_64 rng(74);
  std::uniform_real_distribution<double> d(0, 1);
  for (int t = 0; t < 50; ++t) {
    const Instance inst = random_graph(rng);
    const Graph& g = inst.graph;
    const auto dim = static_cast<Eigen::Index>(g.node(g.output()).dim);
    Matrix c(2, dim);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = d(rng);
    const auto id = compute_bounds(g, inst.specs, BoundStrategy::IBPPlusBackward, g.output());
    const auto with = compute_bounds(g, inst.specs, BoundStrategy::IBPPlusBackward, g.output(), {}, c);
    REQUIRE(((with.bounds.lower - c * id.bounds.lower).array() >= -1e-9).all());
    REQUIRE(((with.bounds.upper - c * id.bounds.upper).array() <= 1e-9).all());
  }
}
