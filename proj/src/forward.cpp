#include "lirpa/forward.hpp"

namespace lirpa {

std::vector<bool> nodes_feeding_nonlinear(const Graph& g, const std::vector<NodeId>& nodes) {
  std::vector<bool> in_set(g.size(), false);
  for (NodeId id : nodes) in_set[id.value] = true;
  std::vector<bool> needs(g.size(), false);
  for (NodeId id : nodes) {
    const Node& n = g.node(id);
    if (!is_nonlinear(n.op)) continue;
    for (NodeId j : n.inputs) {
      if (in_set[j.value]) needs[j.value] = true;
    }
  }
  return needs;
}

IntervalBounds refine_with_input_box(const Node& node, IntervalBounds box, const IntervalMap& boxes,
                                     const BoundOptions& options) {
  if (node.op != OpKind::ReLU && node.op != OpKind::Exp && node.op != OpKind::Log) return box;
  const IntervalBounds* in = boxes.find(node.inputs[0]);
  if (in == nullptr) return box;
  const IntervalBounds* ins[] = {in};
  return intersect(box, interval_transform(node, ins, options.exp_cap));
}

ForwardResult forward_lirpa(const Graph& g, const SpecMap& specs, const BoundOptions& options,
                            std::optional<NodeId> target) {
  ForwardResult r;
  r.layout = PerturbationLayout(g, specs);
  r.bounds.resize(g.size());
  r.boxes.resize(g.size());
  const auto cols = static_cast<Eigen::Index>(r.layout.total_dim());

  const std::vector<NodeId> nodes = target ? ancestors_in_order(g, *target) : g.order();
  const std::vector<bool> needs_box = nodes_feeding_nonlinear(g, nodes);

  for (NodeId id : nodes) {
    const Node& n = g.node(id);
    const auto rows = static_cast<Eigen::Index>(n.dim);
    if (n.is_independent()) {
      LinearBounds lb = LinearBounds::zero(rows, cols);
      if (const auto* block = r.layout.find(id)) {
        const auto off = static_cast<Eigen::Index>(block->offset);
        lb.lower_weight.middleCols(off, rows).setIdentity();
        lb.upper_weight.middleCols(off, rows).setIdentity();
      } else {
        lb.lower_bias = nominal_value(specs.at(id));
        lb.upper_bias = lb.lower_bias;
      }
      r.bounds.set(id, std::move(lb));
    } else {
      std::vector<const LinearBounds*> ins;
      std::vector<const IntervalBounds*> in_boxes;
      for (NodeId j : n.inputs) {
        ins.push_back(&r.bounds.at(j));
        in_boxes.push_back(r.boxes.find(j));
      }
      r.bounds.set(id, forward_oracle(n, ins, in_boxes, options));
    }

    if (needs_box[id.value]) {
      IntervalBounds box = n.is_independent() ? input_interval(specs.at(id))
                                              : concretize(r.bounds.at(id), r.layout, specs);
      r.boxes.set(id, refine_with_input_box(n, std::move(box), r.boxes, options));
    }
  }
  return r;
}

}  // namespace lirpa
