#pragma once

#include <cstddef>
#include <vector>

#include "lirpa/interval.hpp"
#include "lirpa/linear_bounds.hpp"
#include "lirpa/perturbation.hpp"

namespace lirpa {

/// Row-wise q-norm of a matrix, q in [1, inf].
Vector row_norms(const Matrix& m, double q);

/// Closed form over an lp ball:
///   lower = W_l X0 + b_l - eps * ||W_l||_q,  upper = W_u X0 + b_u + eps * ||W_u||_q.
IntervalBounds concretize_lp(const LinearBounds& lb, const LpBallSpec& spec);

/// DP cells for the synonym concretizer: lower[i][j] (resp. upper) bounds
/// the bias plus the first i positions' terms with exactly j replacements.
/// Unreachable cells hold +inf (resp. -inf).
struct DpTable {
  std::vector<std::vector<Vector>> lower;
  std::vector<std::vector<Vector>> upper;
};

DpTable synonym_dp_table(const LinearBounds& lb, const SynonymSpec& spec);

/// Exact min/max of the linear bounds over sentences with at most `budget`
/// replacements, by dynamic programming over (position, replacements).
IntervalBounds concretize_synonym_dp(const LinearBounds& lb, const SynonymSpec& spec);

/// Enumerates every admissible sentence. Throws PreconditionError when the
/// number of assignments would exceed `max_assignments`.
IntervalBounds brute_force_synonym(const LinearBounds& lb, const SynonymSpec& spec,
                                   std::size_t max_assignments = 1'000'000);

/// Concretizes bounds over every perturbed block of `layout`. Blocks are
/// independent, so the extremes add up.
IntervalBounds concretize(const LinearBounds& lb, const PerturbationLayout& layout, const SpecMap& specs);

}  // namespace lirpa
