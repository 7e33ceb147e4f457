#include "lirpa/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <queue>
#include <utility>

namespace lirpa {

namespace {

struct OpInfo {
  OpKind op;
  std::string_view name;
  std::size_t in_degree;
  bool nonlinear;
};

constexpr std::array<OpInfo, 10> kOps = {{
    {OpKind::Input, "input", 0, false},
    {OpKind::Affine, "affine", 1, false},
    {OpKind::ReLU, "relu", 1, true},
    {OpKind::Exp, "exp", 1, true},
    {OpKind::Log, "log", 1, true},
    {OpKind::Neg, "neg", 1, false},
    {OpKind::Add, "add", 2, false},
    {OpKind::Sub, "sub", 2, false},
    {OpKind::MulElementwise, "mul", 2, true},
    {OpKind::SumReduce, "sum", 1, false},
}};

const OpInfo& info(OpKind op) {
  for (const auto& i : kOps) {
    if (i.op == op) return i;
  }
  throw PreconditionError("unknown op kind");
}

std::string node_label(const Node& n) {
  return "node " + std::to_string(n.id.value) + " (" + std::string(op_name(n.op)) + ")";
}

}  // namespace

std::size_t required_in_degree(OpKind op) { return info(op).in_degree; }
bool is_nonlinear(OpKind op) { return info(op).nonlinear; }
std::string_view op_name(OpKind op) { return info(op).name; }

std::optional<OpKind> op_from_name(std::string_view name) {
  for (const auto& i : kOps) {
    if (i.name == name) return i.op;
  }
  return std::nullopt;
}

AffineParams::AffineParams(Matrix w, Vector b)
    : weight(std::move(w)), bias(std::move(b)) {
  weight_pos = weight.cwiseMax(0.0);
  weight_neg = weight.cwiseMin(0.0);
}

const AffineParams& Node::params() const {
  if (!affine) throw PreconditionError(node_label(*this) + " has no affine parameters");
  return *affine;
}

const Node& Graph::node(NodeId id) const {
  if (id.value >= nodes_.size()) {
    throw PreconditionError("node id " + std::to_string(id.value) + " out of range");
  }
  return nodes_[id.value];
}

bool Graph::is_perturbed(NodeId id) const {
  return std::find(perturbed_inputs_.begin(), perturbed_inputs_.end(), id) != perturbed_inputs_.end();
}

NodeId GraphBuilder::add_input(std::size_t dim) {
  Node n;
  n.id = NodeId{nodes_.size()};
  n.op = OpKind::Input;
  n.dim = dim;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

NodeId GraphBuilder::add_affine(NodeId input, Matrix weight, Vector bias) {
  Node n;
  n.id = NodeId{nodes_.size()};
  n.op = OpKind::Affine;
  n.inputs = {input};
  n.dim = static_cast<std::size_t>(weight.rows());
  n.affine = AffineParams(std::move(weight), std::move(bias));
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

NodeId GraphBuilder::add_op(OpKind op, std::vector<NodeId> inputs, std::size_t dim) {
  if (op == OpKind::Affine) {
    throw PreconditionError("use add_affine for affine nodes");
  }
  Node n;
  n.id = NodeId{nodes_.size()};
  n.op = op;
  n.inputs = std::move(inputs);
  n.dim = dim;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

GraphBuilder GraphBuilder::from(const Graph& g) {
  GraphBuilder b;
  b.nodes_ = g.nodes_;
  b.output_ = g.output_;
  b.perturbed_ = g.perturbed_inputs_;
  return b;
}

Graph GraphBuilder::build() const {
  using K = ParseErrorKind;
  const std::size_t n = nodes_.size();
  if (n == 0) throw ParseError(K::Output, "graph has no nodes");
  if (!output_) throw ParseError(K::Output, "graph has no output node");
  if (output_->value >= n) {
    throw ParseError(K::InputOutOfRange, "output id " + std::to_string(output_->value) + " out of range");
  }

  for (const Node& node : nodes_) {
    if (node.dim == 0) throw ParseError(K::DimensionMismatch, node_label(node) + " has zero dimension");
    if (node.inputs.size() != required_in_degree(node.op)) {
      throw ParseError(K::DimensionMismatch, node_label(node) + " expects " +
                                                 std::to_string(required_in_degree(node.op)) + " inputs, got " +
                                                 std::to_string(node.inputs.size()));
    }
    for (NodeId in : node.inputs) {
      if (in.value >= n) {
        throw ParseError(K::InputOutOfRange, node_label(node) + " references missing node " + std::to_string(in.value));
      }
    }
  }

  for (const Node& node : nodes_) {
    auto in_dim = [&](std::size_t k) { return nodes_[node.inputs[k].value].dim; };
    auto mismatch = [&](const std::string& detail) {
      throw ParseError(K::DimensionMismatch, node_label(node) + ": " + detail);
    };
    switch (node.op) {
      case OpKind::Input:
        break;
      case OpKind::Affine: {
        const AffineParams& p = node.params();
        if (static_cast<std::size_t>(p.weight.rows()) != node.dim) mismatch("weight rows != dim");
        if (static_cast<std::size_t>(p.weight.cols()) != in_dim(0)) {
          mismatch("weight has " + std::to_string(p.weight.cols()) + " columns but input dim is " +
                   std::to_string(in_dim(0)));
        }
        if (p.bias.size() != p.weight.rows()) mismatch("bias length != weight rows");
        break;
      }
      case OpKind::ReLU:
      case OpKind::Exp:
      case OpKind::Log:
      case OpKind::Neg:
        if (in_dim(0) != node.dim) mismatch("elementwise op must preserve dimension");
        break;
      case OpKind::Add:
      case OpKind::Sub:
      case OpKind::MulElementwise:
        if (in_dim(0) != node.dim || in_dim(1) != node.dim) mismatch("binary op operands must match node dim");
        break;
      case OpKind::SumReduce:
        if (node.dim != 1) mismatch("sum reduces to dimension 1");
        break;
    }
  }

  Graph g;
  g.nodes_ = nodes_;
  g.output_ = *output_;
  g.successors_.assign(n, {});
  for (const Node& node : nodes_) {
    for (NodeId in : node.inputs) g.successors_[in.value].push_back(node.id);
  }

  for (NodeId p : perturbed_) {
    if (p.value >= n) throw ParseError(K::InputOutOfRange, "perturbed id " + std::to_string(p.value) + " out of range");
    if (nodes_[p.value].op != OpKind::Input) {
      throw ParseError(K::Perturbation, "perturbed node " + std::to_string(p.value) + " is not an input");
    }
    if (!g.is_perturbed(p)) g.perturbed_inputs_.push_back(p);
  }
  std::sort(g.perturbed_inputs_.begin(), g.perturbed_inputs_.end());

  // Kahn's algorithm; ready nodes ordered by (dependent?, id).
  std::vector<std::size_t> indegree(n, 0);
  for (const Node& node : nodes_) indegree[node.id.value] = node.inputs.size();
  using Key = std::pair<bool, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  for (const Node& node : nodes_) {
    if (indegree[node.id.value] == 0) ready.emplace(!node.is_independent(), node.id.value);
  }
  while (!ready.empty()) {
    const std::size_t i = ready.top().second;
    ready.pop();
    g.order_.push_back(NodeId{i});
    for (NodeId s : g.successors_[i]) {
      if (--indegree[s.value] == 0) ready.emplace(true, s.value);
    }
  }
  if (g.order_.size() != n) throw ParseError(K::Cycle, "cycle detected in graph");
  return g;
}

std::vector<NodeId> topological_order(const Graph& g) { return g.order(); }

NodeMap<Vector> evaluate(const Graph& g, const Assignment& a) {
  NodeMap<Vector> values(g.size());
  for (NodeId id : g.order()) {
    const Node& n = g.node(id);
    auto in = [&](std::size_t k) -> const Vector& { return values.at(n.inputs[k]); };
    Vector h;
    switch (n.op) {
      case OpKind::Input: {
        if (!a.contains(id)) throw PreconditionError("no value assigned to input " + std::to_string(id.value));
        h = a.at(id);
        if (static_cast<std::size_t>(h.size()) != n.dim) {
          throw PreconditionError("assignment for input " + std::to_string(id.value) + " has wrong length");
        }
        break;
      }
      case OpKind::Affine:
        h = n.params().weight * in(0) + n.params().bias;
        break;
      case OpKind::ReLU:
        h = in(0).cwiseMax(0.0);
        break;
      case OpKind::Exp:
        h = in(0).array().exp().matrix();
        break;
      case OpKind::Log:
        if ((in(0).array() <= 0.0).any()) {
          throw DomainError("log of non-positive value at node " + std::to_string(id.value));
        }
        h = in(0).array().log().matrix();
        break;
      case OpKind::Neg:
        h = -in(0);
        break;
      case OpKind::Add:
        h = in(0) + in(1);
        break;
      case OpKind::Sub:
        h = in(0) - in(1);
        break;
      case OpKind::MulElementwise:
        h = in(0).cwiseProduct(in(1));
        break;
      case OpKind::SumReduce:
        h = Vector::Constant(1, in(0).sum());
        break;
    }
    values.set(id, std::move(h));
  }
  return values;
}

std::vector<int> get_out_degree(const Graph& g, NodeId target) {
  const std::size_t n = g.size();
  std::vector<int> degree(n, 0);
  std::vector<bool> queued(n, false);
  std::deque<NodeId> queue{target};
  queued[target.value] = true;
  while (!queue.empty()) {
    const NodeId i = queue.front();
    queue.pop_front();
    for (NodeId j : g.node(i).inputs) {
      ++degree[j.value];
      if (!queued[j.value]) {
        queued[j.value] = true;
        queue.push_back(j);
      }
    }
  }
  return degree;
}

std::vector<NodeId> ancestors_in_order(const Graph& g, NodeId target) {
  std::vector<bool> keep(g.size(), false);
  std::vector<NodeId> stack{target};
  keep[target.value] = true;
  while (!stack.empty()) {
    const NodeId i = stack.back();
    stack.pop_back();
    for (NodeId j : g.node(i).inputs) {
      if (!keep[j.value]) {
        keep[j.value] = true;
        stack.push_back(j);
      }
    }
  }
  std::vector<NodeId> out;
  for (NodeId id : g.order()) {
    if (keep[id.value]) out.push_back(id);
  }
  return out;
}

}  // namespace lirpa
