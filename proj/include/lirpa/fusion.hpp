#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "lirpa/backward.hpp"

namespace lirpa {

/// Ground-truth label and number of classes of a classifier output.
struct MarginSpec {
  std::size_t label = 0;
  std::size_t num_classes = 1;

  void validate() const;
};

/// K x K matrix whose row i is e_y - e_i, so M f is the vector of margins
/// f_y - f_i. Row y is zero.
Matrix margin_transform(const MarginSpec& spec);

/// True when every margin lower bound except the label's own is positive.
bool is_certified(const Vector& margin_lowers, std::size_t label);

/// Numerically stable log(sum(exp(v))).
double log_sum_exp(const Vector& v);
/// Cross-entropy of logits f against label y.
double cross_entropy(const Vector& logits, std::size_t label);

/// Options with ReLU lower slopes fixed at zero, the default for every loss
/// bound below.
inline BoundOptions loss_bound_defaults() { return {ReluLowerMode::Zero, kDefaultExpCap}; }

/// Copy of `g` with Affine(-M) -> Exp -> SumReduce appended after the output.
/// The new output computes S = sum_i exp(f_i - f_y); log S is the loss.
Graph build_fused_loss_graph(const Graph& g, const MarginSpec& spec);

/// log of the upper bound of S on the fused graph. Returns +inf when an Exp
/// input bound exceeds the cap.
double bound_loss_fused(const Graph& g, const SpecMap& specs, const MarginSpec& spec, BoundStrategy strategy,
                        const BoundOptions& options = loss_bound_defaults());

struct UnfusedLoss {
  double loss = 0.0;
  /// Lower bounds of the margins f_y - f_i.
  Vector margin_lowers;
};

/// log sum_i exp(-g_i) with g the certified margin lower bounds.
UnfusedLoss bound_loss_unfused(const Graph& g, const SpecMap& specs, const MarginSpec& spec, BoundStrategy strategy,
                               const BoundOptions& options = loss_bound_defaults());

struct FusedLossReport {
  double fused_upper = 0.0;
  double unfused_upper = 0.0;
  Vector margin_lowers;
  Vector margin_uppers;
};

/// Runs both losses on one set of network boxes taken from `supplier` (IBP or
/// Forward style). The fused graph's margin node gets the box [-g_upper, -g_lower]
/// from the same margin pass, so the Exp relaxation sees identical endpoints.
FusedLossReport compare_loss_fusion(const Graph& g, const SpecMap& specs, const MarginSpec& spec,
                                    BoundStrategy supplier = BoundStrategy::IBP,
                                    const BoundOptions& options = loss_bound_defaults());

/// Graph in which the weights of selected Affine nodes are perturbed inputs.
/// Each such node W x + b becomes
///   Input_w (row-major W) , Affine(tile) x  ->  Mul  ->  Affine(row sums) + b.
/// Data inputs keep their role and are mapped through `data_inputs`.
struct WeightPerturbedGraph {
  Graph graph;
  /// Specs of the weight inputs only.
  SpecMap weight_specs;
  /// Original Input id -> id in `graph`.
  NodeMap<NodeId> data_inputs;
};

/// Perturbs the weights of `layers` (every Affine node when empty) inside l2
/// balls of radius ||W||_F * eps_bar. Biases stay fixed.
WeightPerturbedGraph build_weight_perturbed_graph(const Graph& g, double eps_bar,
                                                  const std::vector<NodeId>& layers = {});

struct FlatnessExample {
  /// Values of the original graph's Input nodes.
  Assignment inputs;
  std::size_t label = 0;
};

/// Mean over the batch of (certified worst-case loss under weight
/// perturbation) - (loss at the nominal weights).
double flatness_score(const Graph& g, double eps_bar, const std::vector<FlatnessExample>& batch,
                      const std::vector<NodeId>& layers = {}, BoundStrategy strategy = BoundStrategy::BackwardOnly,
                      const BoundOptions& options = loss_bound_defaults());

}  // namespace lirpa
