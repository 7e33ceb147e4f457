#pragma once

#include <random>

#include "lirpa/perturbation.hpp"

namespace lirpa {

/// Draws a point of one perturbation set. About a quarter of the draws land
/// on the boundary (cube corners, l1 vertices, l2 sphere) where extremes live.
Vector sample_point(const PerturbationSpec& spec, std::mt19937_64& rng);

/// One value per Input node of `g`, each drawn from its spec.
Assignment sample_assignment(const Graph& g, const SpecMap& specs, std::mt19937_64& rng);

}  // namespace lirpa
