#pragma once

#include <random>
#include <string>
#include <vector>

#include "lirpa/graph.hpp"
#include "lirpa/perturbation.hpp"

namespace lirpa::testing {

struct Instance {
  Graph graph;
  SpecMap specs;
};

/// The 2-2-2-1 ReLU net of the worked example: nodes
///   0 input, 1 affine W1, 2 relu, 3 affine W2, 4 relu, 5 affine W3,
/// X0 = [0, 1], l-inf ball of radius eps.
Instance worked_example(double eps = 2.0);

Matrix mat(std::initializer_list<std::initializer_list<double>> rows);
Vector vec(std::initializer_list<double> v);

struct RandomGraphOptions {
  std::size_t max_nodes = 12;
  std::size_t max_dim = 3;
  /// Adds a synonym-perturbed input with this probability.
  double synonym_probability = 0.2;
  /// Adds an unperturbed constant input with this probability.
  double constant_probability = 0.3;
  double max_eps = 0.6;
};

/// Random DAG drawing from every op kind. Log only consumes Exp outputs and
/// Exp never sits below another Exp, which keeps every box finite and every
/// Log input positive. The output is the last node.
Instance random_graph(std::mt19937_64& rng, const RandomGraphOptions& options = {});

/// Random classifier: input -> Affine -> ReLU -> ... -> Affine to K logits,
/// l-inf (or l2) ball around a random center.
Instance random_classifier(std::mt19937_64& rng, std::size_t num_classes, std::size_t hidden = 3,
                           std::size_t layers = 2, double eps = 0.1);

/// Random synonym spec: `n` words, each with up to `max_subs` substitutes.
SynonymSpec random_synonym(std::mt19937_64& rng, std::size_t n, std::size_t max_subs, int budget,
                           std::size_t emb_dim);

/// Concatenates the perturbed inputs' values in layout order.
Vector stack_perturbed(const PerturbationLayout& layout, const Assignment& a);

/// Value of every Input node from its spec's nominal point.
Assignment nominal_assignment(const Graph& g, const SpecMap& specs);

/// Same graph with every lp-ball radius multiplied by `scale`.
SpecMap scale_eps(const SpecMap& specs, double scale);

}  // namespace lirpa::testing
