#include "lirpa/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace lirpa {

namespace {

const Node& classifier_output(const Graph& g, const MarginSpec& spec) {
  spec.validate();
  const Node& out = g.node(g.output());
  if (out.dim != spec.num_classes) {
    throw PreconditionError("output dim " + std::to_string(out.dim) + " does not match " +
                            std::to_string(spec.num_classes) + " classes");
  }
  return out;
}

}  // namespace

void MarginSpec::validate() const {
  if (num_classes == 0) throw PreconditionError("num_classes must be positive");
  if (label >= num_classes) {
    throw PreconditionError("label " + std::to_string(label) + " out of range for " + std::to_string(num_classes) +
                            " classes");
  }
}

Matrix margin_transform(const MarginSpec& spec) {
  spec.validate();
  const auto k = static_cast<Eigen::Index>(spec.num_classes);
  const auto y = static_cast<Eigen::Index>(spec.label);
  Matrix m = -Matrix::Identity(k, k);
  m.col(y).array() += 1.0;
  return m;
}

bool is_certified(const Vector& margin_lowers, std::size_t label) {
  for (Eigen::Index i = 0; i < margin_lowers.size(); ++i) {
    if (static_cast<std::size_t>(i) != label && !(margin_lowers[i] > 0.0)) return false;
  }
  return true;
}

double log_sum_exp(const Vector& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

double cross_entropy(const Vector& logits, std::size_t label) {
  return log_sum_exp(logits) - logits[static_cast<Eigen::Index>(label)];
}

Graph build_fused_loss_graph(const Graph& g, const MarginSpec& spec) {
  const Node& out = classifier_output(g, spec);
  GraphBuilder b = GraphBuilder::from(g);
  const NodeId neg = b.add_affine(out.id, -margin_transform(spec), Vector::Zero(out.dim));
  const NodeId ex = b.add_op(OpKind::Exp, {neg}, out.dim);
  const NodeId sum = b.add_op(OpKind::SumReduce, {ex}, 1);
  b.set_output(sum);
  return b.build();
}

double bound_loss_fused(const Graph& g, const SpecMap& specs, const MarginSpec& spec, BoundStrategy strategy,
                        const BoundOptions& options) {
  const Graph fused = build_fused_loss_graph(g, spec);
  try {
    const BoundResult r = compute_bounds(fused, specs, strategy, fused.output(), options);
    return std::log(r.bounds.upper[0]);
  } catch (const ExpOverflowError&) {
    return std::numeric_limits<double>::infinity();
  }
}

UnfusedLoss bound_loss_unfused(const Graph& g, const SpecMap& specs, const MarginSpec& spec, BoundStrategy strategy,
                               const BoundOptions& options) {
  classifier_output(g, spec);
  const BoundResult r = compute_bounds(g, specs, strategy, g.output(), options, margin_transform(spec));
  return {log_sum_exp(-r.bounds.lower), r.bounds.lower};
}

FusedLossReport compare_loss_fusion(const Graph& g, const SpecMap& specs, const MarginSpec& spec,
                                    BoundStrategy supplier, const BoundOptions& options) {
  if (supplier != BoundStrategy::IBP && supplier != BoundStrategy::Forward) {
    throw PreconditionError("the shared box supplier must be ibp or forward");
  }
  const Node& out = classifier_output(g, spec);
  const PerturbationLayout layout(g, specs);
  const IntervalMap boxes = compute_intermediates(g, specs, supplier, out.id, options);

  const BackwardResult margins = backward_lirpa(g, out.id, boxes, specs, margin_transform(spec), options);
  const IntervalBounds m = concretize(margins.bounds, layout, specs);

  FusedLossReport report;
  report.margin_lowers = m.lower;
  report.margin_uppers = m.upper;
  report.unfused_upper = log_sum_exp(-m.lower);

  const Graph fused = build_fused_loss_graph(g, spec);
  const NodeId neg{g.size()};
  IntervalMap fused_boxes = boxes;
  fused_boxes.resize(fused.size());
  fused_boxes.set(neg, IntervalBounds{-m.upper, -m.lower});
  try {
    const BackwardResult s = backward_lirpa(fused, fused.output(), fused_boxes, specs, std::nullopt, options);
    report.fused_upper = std::log(concretize(s.bounds, layout, specs).upper[0]);
  } catch (const ExpOverflowError&) {
    report.fused_upper = std::numeric_limits<double>::infinity();
  }
  return report;
}

WeightPerturbedGraph build_weight_perturbed_graph(const Graph& g, double eps_bar, const std::vector<NodeId>& layers) {
  if (!(eps_bar >= 0.0) || !std::isfinite(eps_bar)) throw PreconditionError("eps_bar must be finite and >= 0");
  std::vector<bool> perturb(g.size(), false);
  if (layers.empty()) {
    for (const Node& n : g.nodes()) perturb[n.id.value] = n.op == OpKind::Affine;
  }
  for (NodeId id : layers) {
    if (g.node(id).op != OpKind::Affine) {
      throw PreconditionError("node " + std::to_string(id.value) + " is not an affine layer");
    }
    perturb[id.value] = true;
  }

  WeightPerturbedGraph out;
  GraphBuilder b;
  NodeMap<NodeId> map(g.size());
  for (NodeId id : g.order()) {
    const Node& n = g.node(id);
    std::vector<NodeId> ins;
    for (NodeId j : n.inputs) ins.push_back(map.at(j));

    if (n.op == OpKind::Input) {
      const NodeId x = b.add_input(n.dim);
      out.data_inputs.set(id, x);
      map.set(id, x);
    } else if (n.op == OpKind::Affine && perturb[id.value]) {
      const AffineParams& p = n.params();
      const Eigen::Index rows = p.weight.rows();
      const Eigen::Index cols = p.weight.cols();
      const Eigen::Index flat = rows * cols;

      Matrix tile = Matrix::Zero(flat, cols);
      Matrix group = Matrix::Zero(rows, flat);
      for (Eigen::Index r = 0; r < rows; ++r) {
        tile.middleRows(r * cols, cols).setIdentity();
        group.block(r, r * cols, 1, cols).setOnes();
      }
      const Matrix row_major = p.weight.transpose();
      const Vector center = Eigen::Map<const Vector>(row_major.data(), flat);

      const NodeId w = b.add_input(static_cast<std::size_t>(flat));
      b.mark_perturbed(w);
      out.weight_specs.set(w, LpBallSpec{center, p.weight.norm() * eps_bar, 2.0});
      const NodeId tiled = b.add_affine(ins[0], tile, Vector::Zero(flat));
      const NodeId prod = b.add_op(OpKind::MulElementwise, {w, tiled}, static_cast<std::size_t>(flat));
      map.set(id, b.add_affine(prod, group, p.bias));
    } else if (n.op == OpKind::Affine) {
      map.set(id, b.add_affine(ins[0], n.params().weight, n.params().bias));
    } else {
      map.set(id, b.add_op(n.op, ins, n.dim));
    }
  }
  b.set_output(map.at(g.output()));
  out.graph = b.build();
  out.weight_specs.resize(out.graph.size());
  out.data_inputs.resize(g.size());
  return out;
}

double flatness_score(const Graph& g, double eps_bar, const std::vector<FlatnessExample>& batch,
                      const std::vector<NodeId>& layers, BoundStrategy strategy, const BoundOptions& options) {
  if (batch.empty()) throw PreconditionError("flatness needs at least one example");
  const WeightPerturbedGraph wp = build_weight_perturbed_graph(g, eps_bar, layers);
  const std::size_t k = g.node(g.output()).dim;

  double total = 0.0;
  for (const FlatnessExample& ex : batch) {
    const MarginSpec spec{ex.label, k};
    SpecMap specs = wp.weight_specs;
    for (const Node& n : g.nodes()) {
      if (n.is_independent()) specs.set(wp.data_inputs.at(n.id), ConstantSpec{ex.inputs.at(n.id)});
    }
    const BoundResult r =
        compute_bounds(wp.graph, specs, strategy, wp.graph.output(), options, margin_transform(spec));
    const Vector logits = evaluate(g, ex.inputs).at(g.output());
    total += log_sum_exp(-r.bounds.lower) - cross_entropy(logits, ex.label);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace lirpa
