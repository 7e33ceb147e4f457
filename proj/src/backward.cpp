#include "lirpa/backward.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "lirpa/forward.hpp"

namespace lirpa {

namespace {

struct StrategyName {
  BoundStrategy strategy;
  std::string_view name;
};

constexpr std::array<StrategyName, 5> kStrategies = {{
    {BoundStrategy::IBP, "ibp"},
    {BoundStrategy::Forward, "forward"},
    {BoundStrategy::BackwardOnly, "backward"},
    {BoundStrategy::IBPPlusBackward, "ibp+backward"},
    {BoundStrategy::ForwardPlusBackward, "forward+backward"},
}};

Matrix output_coefficients(const Node& target, const std::optional<Matrix>& out_coeff) {
  const auto dim = static_cast<Eigen::Index>(target.dim);
  if (!out_coeff) return Matrix::Identity(dim, dim);
  if (out_coeff->cols() != dim) {
    throw PreconditionError("out_coeff has " + std::to_string(out_coeff->cols()) + " columns, target dim is " +
                            std::to_string(dim));
  }
  return *out_coeff;
}

}  // namespace

BackwardResult backward_lirpa(const Graph& g, NodeId target, const IntervalMap& boxes, const SpecMap& specs,
                              const std::optional<Matrix>& out_coeff, const BoundOptions& options,
                              const BackwardObserver& observer) {
  const PerturbationLayout layout(g, specs);
  const Node& out = g.node(target);
  const Matrix coeff = output_coefficients(out, out_coeff);
  const Eigen::Index rows = coeff.rows();

  BackwardState st;
  st.lower.resize(g.size());
  st.upper.resize(g.size());
  st.lower.set(target, coeff);
  st.upper.set(target, coeff);
  st.lower_bias = Vector::Zero(rows);
  st.upper_bias = Vector::Zero(rows);
  st.remaining = get_out_degree(g, target);
  st.visits.assign(g.size(), 0);

  std::deque<NodeId> queue;
  if (!out.is_independent()) queue.push_back(target);

  std::vector<const IntervalBounds*> in_boxes;
  std::vector<NodeId> ready;
  while (!queue.empty()) {
    const NodeId i = queue.front();
    queue.pop_front();
    ++st.visits[i.value];
    const Node& node = g.node(i);

    in_boxes.clear();
    for (NodeId j : node.inputs) in_boxes.push_back(boxes.find(j));
    BackwardStep step = backward_oracle(g, node, st.lower.at(i), st.upper.at(i), in_boxes, options);

    ready.clear();
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const NodeId j = node.inputs[k];
      if (!st.lower.contains(j)) {
        const auto width = static_cast<Eigen::Index>(g.node(j).dim);
        st.lower.set(j, Matrix::Zero(rows, width));
        st.upper.set(j, Matrix::Zero(rows, width));
      }
      st.lower.at(j) += step.lower[k];
      st.upper.at(j) += step.upper[k];
      if (--st.remaining[j.value] == 0 && !g.node(j).is_independent()) ready.push_back(j);
    }
    std::sort(ready.begin(), ready.end());
    for (NodeId j : ready) queue.push_back(j);

    st.lower_bias += step.lower_bias;
    st.upper_bias += step.upper_bias;
    st.lower.at(i).setZero();
    st.upper.at(i).setZero();
    if (observer) observer(i, st);
  }

  BackwardResult r;
  r.bounds = LinearBounds::zero(rows, static_cast<Eigen::Index>(layout.total_dim()));
  r.bounds.lower_bias = st.lower_bias;
  r.bounds.upper_bias = st.upper_bias;
  for (const Node& n : g.nodes()) {
    if (!n.is_independent() || !st.lower.contains(n.id)) continue;
    const Matrix& lo = st.lower.at(n.id);
    const Matrix& hi = st.upper.at(n.id);
    if (const auto* block = layout.find(n.id)) {
      const auto off = static_cast<Eigen::Index>(block->offset);
      r.bounds.lower_weight.middleCols(off, lo.cols()) = lo;
      r.bounds.upper_weight.middleCols(off, hi.cols()) = hi;
    } else {
      const Vector value = nominal_value(specs.at(n.id));
      r.bounds.lower_bias += lo * value;
      r.bounds.upper_bias += hi * value;
    }
  }
  r.state = std::move(st);
  return r;
}

std::string_view strategy_name(BoundStrategy s) {
  for (const auto& e : kStrategies) {
    if (e.strategy == s) return e.name;
  }
  return "unknown";
}

std::optional<BoundStrategy> strategy_from_name(std::string_view name) {
  for (const auto& e : kStrategies) {
    if (e.name == name) return e.strategy;
  }
  return std::nullopt;
}

IntervalMap compute_intermediates(const Graph& g, const SpecMap& specs, BoundStrategy strategy, NodeId target,
                                  const BoundOptions& options) {
  switch (strategy) {
    case BoundStrategy::IBP:
    case BoundStrategy::IBPPlusBackward:
      return ibp_propagate(g, specs, options.exp_cap, target);
    case BoundStrategy::Forward:
    case BoundStrategy::ForwardPlusBackward:
      return forward_lirpa(g, specs, options, target).boxes;
    case BoundStrategy::BackwardOnly:
      break;
  }

  const PerturbationLayout layout(g, specs);
  const std::vector<NodeId> nodes = ancestors_in_order(g, target);
  const std::vector<bool> needs_box = nodes_feeding_nonlinear(g, nodes);
  IntervalMap memo(g.size());
  for (NodeId id : nodes) {
    if (!needs_box[id.value]) continue;
    const Node& n = g.node(id);
    if (n.is_independent()) {
      memo.set(id, input_interval(specs.at(id)));
      continue;
    }
    const BackwardResult r = backward_lirpa(g, id, memo, specs, std::nullopt, options);
    memo.set(id, refine_with_input_box(n, concretize(r.bounds, layout, specs), memo, options));
  }
  return memo;
}

BoundResult compute_bounds(const Graph& g, const SpecMap& specs, BoundStrategy strategy, NodeId target,
                           const BoundOptions& options, const std::optional<Matrix>& out_coeff) {
  const Matrix coeff = output_coefficients(g.node(target), out_coeff);
  const Matrix pos = coeff.cwiseMax(0.0);
  const Matrix neg = coeff.cwiseMin(0.0);
  BoundResult r;

  switch (strategy) {
    case BoundStrategy::IBP: {
      r.intermediates = ibp_propagate(g, specs, options.exp_cap, target);
      r.bounds = affine_interval(pos, neg, Vector::Zero(coeff.rows()), r.intermediates.at(target));
      return r;
    }
    case BoundStrategy::Forward: {
      ForwardResult fr = forward_lirpa(g, specs, options, target);
      const LinearBounds& t = fr.bounds.at(target);
      LinearBounds lb{pos * t.lower_weight + neg * t.upper_weight, pos * t.lower_bias + neg * t.upper_bias,
                      pos * t.upper_weight + neg * t.lower_weight, pos * t.upper_bias + neg * t.lower_bias};
      r.bounds = concretize(lb, fr.layout, specs);
      r.linear = std::move(lb);
      r.intermediates = std::move(fr.boxes);
      return r;
    }
    case BoundStrategy::BackwardOnly:
    case BoundStrategy::IBPPlusBackward:
    case BoundStrategy::ForwardPlusBackward:
      break;
  }

  r.intermediates = compute_intermediates(g, specs, strategy, target, options);
  BackwardResult br = backward_lirpa(g, target, r.intermediates, specs, coeff, options);
  r.bounds = concretize(br.bounds, PerturbationLayout(g, specs), specs);
  r.linear = std::move(br.bounds);
  return r;
}

}  // namespace lirpa
