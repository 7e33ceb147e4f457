#pragma once

// Independent reference computations used as test oracles. None of them call
// into the bound engines.

#include <functional>

#include "lirpa/graph.hpp"
#include "lirpa/interval.hpp"
#include "lirpa/linear_bounds.hpp"
#include "lirpa/perturbation.hpp"

namespace lirpa::testing {

/// Number of distinct paths from `from` to `to` (edge multiplicity counts).
std::size_t count_paths(const Graph& g, NodeId from, NodeId to);

/// For each node, the number of its outgoing edges whose head has at least one
/// path to `target` (or is `target`).
std::vector<int> out_degree_by_paths(const Graph& g, NodeId target);

/// Max/min of W x + b over every corner of the cube center +- eps.
IntervalBounds corner_enumeration(const LinearBounds& lb, const Vector& center, double eps);

/// Min of lower and max of upper linear function over every sentence with at
/// most `budget` substitutions, by recursion over positions.
IntervalBounds enumerate_sentences(const LinearBounds& lb, const SynonymSpec& spec);

/// Plain loops over the worked-example weights.
double worked_example_value(double x0, double x1);

}  // namespace lirpa::testing
