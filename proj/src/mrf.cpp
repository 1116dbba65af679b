#include "stmrf/mrf.hpp"

#include <string>

namespace stmrf {

void MrfProblem::validate() const {
  unary.validate();
  const int k = unary.k;
  if (delta.size() != k)
    throw DataError("spatial matrix is " + std::to_string(delta.size()) +
                    "x" + std::to_string(delta.size()) + " for K=" +
                    std::to_string(k));
  if (delta.kind() != TransitionKind::kSpatial)
    throw DataError("delta must be a spatial matrix");
  if (static_cast<int>(tau_pairs.size()) != unary.t - 1)
    throw DataError("expected " + std::to_string(unary.t - 1) +
                    " tau pairs, got " + std::to_string(tau_pairs.size()));
  for (const auto& [tau1, tau2] : tau_pairs) {
    if (tau1.size() != k || tau2.size() != k)
      throw DataError("temporal matrix size does not match K");
    if (tau1.kind() != TransitionKind::kTemporalBackward ||
        tau2.kind() != TransitionKind::kTemporalForward)
      throw DataError("tau pair kinds must be (backward, forward)");
  }
  if (beta_sp < 0.0 || beta_temp < 0.0)
    throw DataError("beta weights must be >= 0");
}

double spatial_energy(const LabelStack& labels, const TransitionMatrix& delta,
                      double beta_sp) {
  double sum = 0.0;
  for (int t = 0; t < labels.t; ++t)
    for (int y = 0; y < labels.h; ++y)
      for (int x = 0; x < labels.w; ++x) {
        const int a = labels.at(t, y, x);
        if (x + 1 < labels.w) sum += 1.0 - delta(a, labels.at(t, y, x + 1));
        if (y + 1 < labels.h) sum += 1.0 - delta(a, labels.at(t, y + 1, x));
      }
  return beta_sp * sum;
}

double temporal_energy(
    const LabelStack& labels,
    const std::vector<std::pair<TransitionMatrix, TransitionMatrix>>& tau_pairs,
    double beta_temp) {
  double sum = 0.0;
  for (int t = 0; t + 1 < labels.t; ++t) {
    const auto& [tau1, tau2] = tau_pairs.at(t);
    for (int y = 0; y < labels.h; ++y)
      for (int x = 0; x < labels.w; ++x) {
        const int a = labels.at(t, y, x);
        const int b = labels.at(t + 1, y, x);
        sum += (1.0 - tau2(a, b)) + (1.0 - tau1(b, a));
      }
  }
  return beta_temp * sum;
}

double total_energy(const LabelStack& labels, const MrfProblem& problem) {
  const EnergyStack& u = problem.unary;
  if (labels.t != u.t || labels.h != u.h || labels.w != u.w)
    throw DataError("label stack shape does not match unary stack");
  double unary_sum = 0.0;
  for (int t = 0; t < labels.t; ++t)
    for (int y = 0; y < labels.h; ++y)
      for (int x = 0; x < labels.w; ++x)
        unary_sum += u.at(t, y, x, labels.at(t, y, x));
  return unary_sum + spatial_energy(labels, problem.delta, problem.beta_sp) +
         temporal_energy(labels, problem.tau_pairs, problem.beta_temp);
}

}  // namespace stmrf
