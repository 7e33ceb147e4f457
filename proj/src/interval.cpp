#include "lirpa/interval.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace lirpa {

bool IntervalBounds::contains(const Vector& v, double slack) const {
  if (v.size() != lower.size()) return false;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v[k] < lower[k] - slack || v[k] > upper[k] + slack) return false;
  }
  return true;
}

bool IntervalBounds::encloses(const IntervalBounds& other, double slack) const {
  return contains(other.lower, slack) && contains(other.upper, slack);
}

IntervalBounds input_interval(const PerturbationSpec& spec) {
  if (const auto* c = std::get_if<ConstantSpec>(&spec)) return IntervalBounds::point(c->value);
  if (const auto* b = std::get_if<LpBallSpec>(&spec)) {
    const Vector r = Vector::Constant(b->center.size(), b->eps);
    return {b->center - r, b->center + r};
  }
  const auto& s = std::get<SynonymSpec>(spec);
  const auto e = static_cast<Eigen::Index>(s.embedding_dim());
  IntervalBounds box{s.clean_value(), s.clean_value()};
  for (std::size_t t = 0; t < s.length(); ++t) {
    const Eigen::Index off = static_cast<Eigen::Index>(t) * e;
    for (const auto& w : s.substitutions[t]) {
      const Vector& emb = s.embedding(w);
      box.lower.segment(off, e) = box.lower.segment(off, e).cwiseMin(emb);
      box.upper.segment(off, e) = box.upper.segment(off, e).cwiseMax(emb);
    }
  }
  return box;
}

IntervalBounds affine_interval(const Matrix& pos, const Matrix& neg, const Vector& bias, const IntervalBounds& x) {
  return {pos * x.lower + neg * x.upper + bias, pos * x.upper + neg * x.lower + bias};
}

IntervalBounds interval_transform(const Node& node, std::span<const IntervalBounds* const> inputs, double exp_cap) {
  const auto in = [&](std::size_t k) -> const IntervalBounds& { return *inputs[k]; };
  switch (node.op) {
    case OpKind::Input:
      throw PreconditionError("input nodes take their box from the perturbation spec");
    case OpKind::Affine: {
      const AffineParams& p = node.params();
      return affine_interval(p.weight_pos, p.weight_neg, p.bias, in(0));
    }
    case OpKind::ReLU:
      return {in(0).lower.cwiseMax(0.0), in(0).upper.cwiseMax(0.0)};
    case OpKind::Exp:
      if ((in(0).upper.array() > exp_cap).any()) {
        throw ExpOverflowError("exp pre-activation exceeds cap at node " + std::to_string(node.id.value));
      }
      return {in(0).lower.array().exp().matrix(), in(0).upper.array().exp().matrix()};
    case OpKind::Log:
      if (!(in(0).lower.array() > 0.0).all()) {
        throw DomainError("log interval touches non-positive values at node " + std::to_string(node.id.value));
      }
      return {in(0).lower.array().log().matrix(), in(0).upper.array().log().matrix()};
    case OpKind::Neg:
      return {-in(0).upper, -in(0).lower};
    case OpKind::Add:
      return {in(0).lower + in(1).lower, in(0).upper + in(1).upper};
    case OpKind::Sub:
      return {in(0).lower - in(1).upper, in(0).upper - in(1).lower};
    case OpKind::MulElementwise: {
      const auto& x = in(0);
      const auto& y = in(1);
      IntervalBounds out{Vector(node.dim), Vector(node.dim)};
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double c[4] = {x.lower[k] * y.lower[k], x.lower[k] * y.upper[k], x.upper[k] * y.lower[k],
                             x.upper[k] * y.upper[k]};
        out.lower[k] = *std::min_element(c, c + 4);
        out.upper[k] = *std::max_element(c, c + 4);
      }
      return out;
    }
    case OpKind::SumReduce:
      return {Vector::Constant(1, in(0).lower.sum()), Vector::Constant(1, in(0).upper.sum())};
  }
  throw PreconditionError("unhandled op");
}

IntervalMap ibp_propagate(const Graph& g, const SpecMap& specs, double exp_cap, std::optional<NodeId> target) {
  IntervalMap boxes(g.size());
  for (NodeId id : target ? ancestors_in_order(g, *target) : g.order()) {
    const Node& n = g.node(id);
    if (n.is_independent()) {
      const PerturbationSpec* spec = specs.find(id);
      if (spec == nullptr) throw PreconditionError("input node " + std::to_string(id.value) + " has no spec");
      boxes.set(id, input_interval(*spec));
      continue;
    }
    std::vector<const IntervalBounds*> ins;
    for (NodeId j : n.inputs) ins.push_back(&boxes.at(j));
    boxes.set(id, interval_transform(n, ins, exp_cap));
  }
  return boxes;
}

IntervalBounds intersect(const IntervalBounds& a, const IntervalBounds& b) {
  IntervalBounds out{a.lower.cwiseMax(b.lower), a.upper.cwiseMin(b.upper)};
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (out.lower[k] > out.upper[k]) {
      out.lower[k] = std::min(a.lower[k], b.lower[k]);
      out.upper[k] = std::max(a.upper[k], b.upper[k]);
    }
  }
  return out;
}

}  // namespace lirpa
