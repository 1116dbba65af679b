#pragma once

#include <utility>
#include <vector>

#include "stmrf/transitions.hpp"
#include "stmrf/types.hpp"

namespace stmrf {

/// A spatio-temporal labeling problem: unary energies plus the pairwise
/// compatibility structure. tau_pairs[g] couples layers g and g+1.
struct MrfProblem {
  EnergyStack unary;
  TransitionMatrix delta;
  std::vector<std::pair<TransitionMatrix, TransitionMatrix>> tau_pairs;
  double beta_sp = 1.0;
  double beta_temp = 1.0;

  int num_classes() const { return unary.k; }

  /// Throws DataError when shapes, matrix sizes, or betas are inconsistent.
  void validate() const;

  /// Pairwise energy contributed by one temporal link between labels a
  /// (layer g) and b (layer g+1): both directed terms of the link, i.e.
  /// beta_temp * ((1 - tau2(a,b)) + (1 - tau1(b,a))).
  double temporal_link_energy(int gap_index, int a, int b) const {
    const auto& [tau1, tau2] = tau_pairs[gap_index];
    return beta_temp * ((1.0 - tau2(a, b)) + (1.0 - tau1(b, a)));
  }

  /// Pairwise energy of one undirected spatial edge.
  double spatial_edge_energy(int a, int b) const {
    return beta_sp * (1.0 - delta(a, b));
  }
};

/// Sum over unordered 4-connected neighbor pairs within each date of
/// beta_sp * (1 - delta(y_i, y_j)). Each undirected edge counted once.
double spatial_energy(const LabelStack& labels, const TransitionMatrix& delta,
                      double beta_sp);

/// Sum over pixels and consecutive-date links of both directed terms,
/// beta_temp * ((1 - tau2(y_t, y_{t+1})) + (1 - tau1(y_{t+1}, y_t))).
double temporal_energy(
    const LabelStack& labels,
    const std::vector<std::pair<TransitionMatrix, TransitionMatrix>>& tau_pairs,
    double beta_temp);

/// Unary sum + spatial_energy + temporal_energy of a labeling.
double total_energy(const LabelStack& labels, const MrfProblem& problem);

}  // namespace stmrf
