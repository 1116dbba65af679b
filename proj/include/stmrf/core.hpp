#pragma once

#include "stmrf/types.hpp"

namespace stmrf {

/// Default clip applied to probabilities before the logarithm.
inline constexpr double kDefaultProbFloor = 1e-12;

/// Converts class probabilities to unary energies: -ln(max(p, floor)).
/// Minimizing the summed energies over labels is equivalent to maximizing
/// the product of the per-pixel probabilities.
/// floor must satisfy 0 < floor <= 1e-6.
EnergyStack prob_to_energy(const ProbabilityStack& p,
                           double floor = kDefaultProbFloor);

/// Per-pixel class of maximal probability; ties resolved toward the lowest
/// class index.
LabelStack argmax_labels(const ProbabilityStack& p);

}  // namespace stmrf
