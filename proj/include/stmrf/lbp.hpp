#pragma once

#include <iosfwd>
#include <utility>

#include "stmrf/mrf.hpp"
#include "stmrf/types.hpp"

namespace stmrf {

struct LbpConfig {
  int max_iters = 10;
  double damping = 0.0;         // in [0,1); 0 = off
  double convergence_eps = 1e-4;  // stop when changed-label fraction < eps
  int window = 256;             // moving-window edge length, layered schedule
  int threads = 1;
  std::ostream* trace = nullptr;  // per-iteration "iter,energy,changed_frac"

  void validate() const;
};

struct LbpResult {
  LabelStack labels;
  bool converged = false;
  int iters = 0;
};

/// Min-sum loopy belief propagation with a synchronous flooding schedule.
/// Stores the full message set; the correctness reference for the layered
/// schedule. Messages are min-normalized to zero after every update.
LbpResult lbp_reference(const MrfProblem& problem, const LbpConfig& cfg);

/// The layered moving-window schedule: one pass over the layers in date
/// order equals one LBP iteration. Each layer is updated from the fallback
/// copy of the previous layer, the next layer's current state, and its own
/// spatial messages, using windows that tile the layer and read one pixel
/// beyond their write region. Keeps three layers of temporal state active
/// (fallback, current, next) instead of a full message store.
LbpResult lbp_layered_sweep(const MrfProblem& problem, const LbpConfig& cfg);

/// Iterated conditional modes from a given initialization; raster-order
/// single-pixel moves, stops after a sweep with zero changes or max_sweeps.
LabelStack icm_baseline(const MrfProblem& problem, const LabelStack& init,
                        int max_sweeps);

/// Exhaustive global minimizer for tiny problems. Refuses (DataError) when
/// K^(T*H*W) exceeds state_limit. Ties resolve to the lexicographically
/// smallest labeling in (t, y, x) raster order.
std::pair<LabelStack, double> brute_force_map(const MrfProblem& problem,
                                              long long state_limit);

}  // namespace stmrf
