#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lirpa/errors.hpp"

namespace lirpa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense index of a node inside a Graph; document order defines it.
struct NodeId {
  std::size_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class OpKind {
  Input,
  Affine,
  ReLU,
  Exp,
  Log,
  Neg,
  Add,
  Sub,
  MulElementwise,
  SumReduce,
};

/// Number of graph inputs an op consumes.
std::size_t required_in_degree(OpKind op);
bool is_nonlinear(OpKind op);
std::string_view op_name(OpKind op);
std::optional<OpKind> op_from_name(std::string_view name);

/// Parameters of an Affine node. The sign split of the weight is computed once
/// when the node is built and reused by every bound engine.
struct AffineParams {
  Matrix weight;
  Vector bias;
  Matrix weight_pos;
  Matrix weight_neg;

  AffineParams() = default;
  AffineParams(Matrix w, Vector b);
};

struct Node {
  NodeId id;
  OpKind op = OpKind::Input;
  std::vector<NodeId> inputs;
  std::size_t dim = 0;
  std::optional<AffineParams> affine;

  bool is_independent() const { return op == OpKind::Input; }
  const AffineParams& params() const;
};

/// Per-node storage keyed by NodeId. Entries may be absent.
template <typename T>
class NodeMap {
 public:
  NodeMap() = default;
  explicit NodeMap(std::size_t n) : slots_(n) {}

  std::size_t size() const { return slots_.size(); }
  void resize(std::size_t n) { slots_.resize(n); }

  bool contains(NodeId id) const { return id.value < slots_.size() && slots_[id.value].has_value(); }

  const T& at(NodeId id) const {
    if (!contains(id)) {
      throw PreconditionError("no entry for node " + std::to_string(id.value));
    }
    return *slots_[id.value];
  }
  T& at(NodeId id) {
    if (!contains(id)) {
      throw PreconditionError("no entry for node " + std::to_string(id.value));
    }
    return *slots_[id.value];
  }
  const T* find(NodeId id) const { return contains(id) ? &*slots_[id.value] : nullptr; }
  T* find(NodeId id) { return contains(id) ? &*slots_[id.value] : nullptr; }

  void set(NodeId id, T value) {
    if (id.value >= slots_.size()) slots_.resize(id.value + 1);
    slots_[id.value] = std::move(value);
  }
  void erase(NodeId id) {
    if (id.value < slots_.size()) slots_[id.value].reset();
  }

 private:
  std::vector<std::optional<T>> slots_;
};

/// Immutable computational DAG with a single designated output node.
class Graph {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  NodeId output() const { return output_; }
  const std::vector<NodeId>& perturbed_inputs() const { return perturbed_inputs_; }
  bool is_perturbed(NodeId id) const;

  /// Successor lists, parallel to nodes(); duplicates kept when a node feeds
  /// the same consumer twice.
  const std::vector<std::vector<NodeId>>& successors() const { return successors_; }

  /// Topological order computed at build time.
  const std::vector<NodeId>& order() const { return order_; }

 private:
  friend class GraphBuilder;

  std::vector<Node> nodes_;
  NodeId output_;
  std::vector<NodeId> perturbed_inputs_;
  std::vector<std::vector<NodeId>> successors_;
  std::vector<NodeId> order_;
};

/// Accumulates nodes and produces a validated Graph. Inputs of a node may
/// reference ids that are added later; everything is checked in build().
class GraphBuilder {
 public:
  NodeId add_input(std::size_t dim);
  NodeId add_affine(NodeId input, Matrix weight, Vector bias);
  NodeId add_op(OpKind op, std::vector<NodeId> inputs, std::size_t dim);

  void set_output(NodeId id) { output_ = id; }
  void mark_perturbed(NodeId id) { perturbed_.push_back(id); }

  std::size_t size() const { return nodes_.size(); }

  /// Throws ParseError (dimension mismatch, cycle, bad output, input range).
  Graph build() const;

  /// Starts from an existing graph's nodes, output and perturbed set.
  static GraphBuilder from(const Graph& g);

 private:
  std::vector<Node> nodes_;
  std::optional<NodeId> output_;
  std::vector<NodeId> perturbed_;
};

/// Concrete input values, one vector per Input node.
using Assignment = NodeMap<Vector>;

/// Every node after all of its inputs; Input nodes first; ties by id.
std::vector<NodeId> topological_order(const Graph& g);

/// Concrete forward pass. Throws DomainError for log of a non-positive value.
NodeMap<Vector> evaluate(const Graph& g, const Assignment& a);

/// d_i = number of successor edges of i that lie on a path to `target`.
std::vector<int> get_out_degree(const Graph& g, NodeId target);

/// Nodes `target` depends on, including itself, in topological order.
std::vector<NodeId> ancestors_in_order(const Graph& g, NodeId target);

}  // namespace lirpa
