#include "stmrf/lbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "stmrf/parallel.hpp"

namespace stmrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const double* msg, int k, int t, int y, int x) {
  for (int i = 0; i < k; ++i)
    if (!std::isfinite(msg[i]))
      throw NumericError("non-finite message at (t=" + std::to_string(t) +
                         ", y=" + std::to_string(y) +
                         ", x=" + std::to_string(x) + ")");
}

/// Subtracts the minimum so the smallest entry becomes exactly 0.
void min_normalize(double* msg, int k) {
  double m = msg[0];
  for (int i = 1; i < k; ++i) m = std::min(m, msg[i]);
  for (int i = 0; i < k; ++i) msg[i] -= m;
}

int argmin_label(const double* belief, int k) {
  int best = 0;
  double best_v = belief[0];
  for (int i = 1; i < k; ++i)
    if (belief[i] < best_v) {
      best_v = belief[i];
      best = i;
    }
  return best;
}

double changed_fraction(const LabelStack& a, const LabelStack& b) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    changed += a.values[i] != b.values[i];
  return static_cast<double>(changed) / static_cast<double>(a.values.size());
}

// Incoming-message directions per pixel. PREV = from the earlier date,
// NEXT = from the later date.
enum Dir { LEFT = 0, RIGHT, UP, DOWN, PREV, NEXT, NDIRS };

/// Full message store for the flooding schedule: one K-vector per pixel and
/// incoming direction, double-buffered per iteration.
struct MessageStore {
  int t, h, w, k;
  std::vector<double> buf[NDIRS];

  MessageStore(int t_, int h_, int w_, int k_) : t(t_), h(h_), w(w_), k(k_) {
    const std::size_t n = static_cast<std::size_t>(t) * h * w * k;
    for (auto& b : buf) b.assign(n, 0.0);
  }

  double* at(Dir d, int ti, int y, int x) {
    return buf[d].data() +
           ((static_cast<std::size_t>(ti) * h + y) * w + x) * k;
  }
  const double* at(Dir d, int ti, int y, int x) const {
    return buf[d].data() +
           ((static_cast<std::size_t>(ti) * h + y) * w + x) * k;
  }
};

}  // namespace

void LbpConfig::validate() const {
  if (max_iters < 1) throw DataError("lbp max_iters must be >= 1");
  if (damping < 0.0 || damping >= 1.0)
    throw DataError("lbp damping must lie in [0,1)");
  if (convergence_eps < 0.0) throw DataError("lbp convergence_eps must be >= 0");
  if (window < 2) throw DataError("lbp window must be >= 2");
  if (threads < 1) throw DataError("lbp threads must be >= 1");
}

// ============================================================================
// Reference flooding schedule
// ============================================================================

LbpResult lbp_reference(const MrfProblem& problem, const LbpConfig& cfg) {
  cfg.validate();
  problem.validate();
  const EnergyStack& u = problem.unary;
  const int T = u.t, H = u.h, W = u.w, K = u.k;

  MessageStore old_store(T, H, W, K);
  MessageStore new_store(T, H, W, K);

  auto beliefs_to_labels = [&](const MessageStore& st) {
    LabelStack labels(T, H, W);
    std::vector<double> belief(K);
    for (int t = 0; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          for (int k = 0; k < K; ++k) belief[k] = u.at(t, y, x, k);
          for (int d = 0; d < NDIRS; ++d) {
            const double* m = st.at(static_cast<Dir>(d), t, y, x);
            for (int k = 0; k < K; ++k) belief[k] += m[k];
          }
          labels.at(t, y, x) = argmin_label(belief.data(), K);
        }
    return labels;
  };

  LabelStack labels = beliefs_to_labels(old_store);  // unary argmin at start
  bool converged = false;
  int iters = 0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // One synchronous flood: every directed message recomputed from the
    // previous iteration's store.
    const std::size_t npixels = static_cast<std::size_t>(T) * H * W;
    parallel_chunks(npixels, cfg.threads, [&](std::size_t pb, std::size_t pe) {
      std::vector<double> total(K), cavity(K), out(K);
      for (std::size_t p = pb; p < pe; ++p) {
        const int t = static_cast<int>(p / (static_cast<std::size_t>(H) * W));
        const int rem = static_cast<int>(p % (static_cast<std::size_t>(H) * W));
        const int y = rem / W;
        const int x = rem % W;

        // Sum of unary and all incoming messages at the sender i=(t,y,x).
        for (int k = 0; k < K; ++k) total[k] = u.at(t, y, x, k);
        for (int d = 0; d < NDIRS; ++d) {
          const double* m = old_store.at(static_cast<Dir>(d), t, y, x);
          for (int k = 0; k < K; ++k) total[k] += m[k];
        }

        // The message i -> j lands in j's incoming slot for the direction
        // that points back at i.
        auto send = [&](Dir back_at_i, Dir slot_at_j, int tj, int yj, int xj,
                        auto&& edge) {
          const double* echo = old_store.at(back_at_i, t, y, x);
          for (int k = 0; k < K; ++k) cavity[k] = total[k] - echo[k];
          for (int b = 0; b < K; ++b) {
            double best = kInf;
            for (int a = 0; a < K; ++a)
              best = std::min(best, cavity[a] + edge(a, b));
            out[b] = best;
          }
          double* dst = new_store.at(slot_at_j, tj, yj, xj);
          if (cfg.damping > 0.0) {
            const double* prev = old_store.at(slot_at_j, tj, yj, xj);
            for (int k = 0; k < K; ++k)
              out[k] = (1.0 - cfg.damping) * out[k] + cfg.damping * prev[k];
          }
          min_normalize(out.data(), K);
          check_finite(out.data(), K, t, y, x);
          std::copy(out.begin(), out.end(), dst);
        };

        auto sp = [&](int a, int b) { return problem.spatial_edge_energy(a, b); };
        if (x + 1 < W) send(RIGHT, LEFT, t, y, x + 1, sp);
        if (x > 0) send(LEFT, RIGHT, t, y, x - 1, sp);
        if (y + 1 < H) send(DOWN, UP, t, y + 1, x, sp);
        if (y > 0) send(UP, DOWN, t, y - 1, x, sp);
        if (t + 1 < T)
          send(NEXT, PREV, t + 1, y, x, [&](int a, int b) {
            return problem.temporal_link_energy(t, a, b);
          });
        if (t > 0)
          send(PREV, NEXT, t - 1, y, x, [&](int a, int b) {
            return problem.temporal_link_energy(t - 1, b, a);
          });
      }
    });

    std::swap(old_store, new_store);
    iters = iter + 1;

    LabelStack next = beliefs_to_labels(old_store);
    const double frac = changed_fraction(labels, next);
    labels = std::move(next);
    if (cfg.trace)
      *cfg.trace << iters << ',' << total_energy(labels, problem) << ','
                 << frac << '\n';
    if (frac < cfg.convergence_eps) {
      converged = true;
      break;
    }
  }
  return {std::move(labels), converged, iters};
}

// ============================================================================
// Layered moving-window schedule
// ============================================================================

namespace {

/// Working view of one layer while the layered schedule visits it.
struct LayerPass {
  int H, W, K;
  const MrfProblem* problem;
  const double* eff_unary;  // theta + m_prev + m_next, H*W*K
  // Incoming spatial messages, one field per direction.
  std::vector<double> in[4];

  LayerPass(int h, int w, int k, const MrfProblem* pr)
      : H(h), W(w), K(k), problem(pr), eff_unary(nullptr) {
    for (auto& f : in) f.assign(static_cast<std::size_t>(H) * W * K, 0.0);
  }

  double* slot(Dir d, int y, int x) {
    return in[d].data() + (static_cast<std::size_t>(y) * W + x) * K;
  }

  /// Recomputes the outgoing messages of pixel (y, x) in place, reading
  /// whatever its neighbors' slots currently hold (Gauss-Seidel).
  void update_pixel(int t, int y, int x) {
    double total[64];  // K <= 64 enforced by caller
    const double* eu = eff_unary + (static_cast<std::size_t>(y) * W + x) * K;
    for (int k = 0; k < K; ++k) total[k] = eu[k];
    for (int d = 0; d < 4; ++d) {
      const double* m = slot(static_cast<Dir>(d), y, x);
      for (int k = 0; k < K; ++k) total[k] += m[k];
    }
    double cavity[64], out[64];
    auto send = [&](Dir back, Dir slot_dir, int yj, int xj) {
      const double* echo = slot(back, y, x);
      for (int k = 0; k < K; ++k) cavity[k] = total[k] - echo[k];
      for (int b = 0; b < K; ++b) {
        double best = kInf;
        for (int a = 0; a < K; ++a)
          best = std::min(best, cavity[a] + problem->spatial_edge_energy(a, b));
        out[b] = best;
      }
      min_normalize(out, K);
      check_finite(out, K, t, y, x);
      std::copy(out, out + K, slot(slot_dir, yj, xj));
    };
    if (x + 1 < W) send(RIGHT, LEFT, y, x + 1);
    if (x > 0) send(LEFT, RIGHT, y, x - 1);
    if (y + 1 < H) send(DOWN, UP, y + 1, x);
    if (y > 0) send(UP, DOWN, y - 1, x);
  }
};

}  // namespace

LbpResult lbp_layered_sweep(const MrfProblem& problem, const LbpConfig& cfg) {
  cfg.validate();
  problem.validate();
  const EnergyStack& u = problem.unary;
  const int T = u.t, H = u.h, W = u.w, K = u.k;
  if (K > 64) throw DataError("layered schedule supports at most 64 classes");
  const std::size_t layer_n = static_cast<std::size_t>(H) * W * K;

  // Per-layer energy fields, initialized to the unaries. fwd_src is what a
  // layer exposes to its successor, bwd_src what it exposes to its
  // predecessor; each already contains the layer's spatial context plus the
  // temporal message from the opposite side (the cavity for that direction).
  std::vector<std::vector<double>> fwd_src(T), bwd_src(T);
  for (int t = 0; t < T; ++t) {
    fwd_src[t].resize(layer_n);
    bwd_src[t].resize(layer_n);
    std::copy(u.values.begin() + static_cast<std::ptrdiff_t>(t) * layer_n,
              u.values.begin() + static_cast<std::ptrdiff_t>(t + 1) * layer_n,
              fwd_src[t].begin());
    bwd_src[t] = fwd_src[t];
  }
  std::vector<LayerPass> passes;
  passes.reserve(T);
  for (int t = 0; t < T; ++t) passes.emplace_back(H, W, K, &problem);

  LabelStack labels(T, H, W);
  {  // start from the unary argmin
    for (int t = 0; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const double* e = u.values.data() +
                            detail::flat4(t, y, x, 0, H, W, K);
          labels.at(t, y, x) = argmin_label(e, K);
        }
  }

  std::vector<double> fb_prev(layer_n), fb_current(layer_n);
  std::vector<double> m_prev(layer_n), m_next(layer_n);

  // Minimizes src(a) + link(a, b) over a, per pixel; dst indexed by b.
  auto min_convolve = [&](const std::vector<double>& src, int gap_index,
                          bool forward, std::vector<double>& dst) {
    const std::size_t npix = static_cast<std::size_t>(H) * W;
    for (std::size_t p = 0; p < npix; ++p) {
      const double* s = src.data() + p * K;
      double* d = dst.data() + p * K;
      for (int b = 0; b < K; ++b) {
        double best = kInf;
        for (int a = 0; a < K; ++a) {
          const double edge = forward
                                  ? problem.temporal_link_energy(gap_index, a, b)
                                  : problem.temporal_link_energy(gap_index, b, a);
          best = std::min(best, s[a] + edge);
        }
        d[b] = best;
      }
      min_normalize(d, K);
    }
  };

  bool converged = false;
  int iters = 0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    LabelStack next_labels(T, H, W);

    for (int t = 0; t < T; ++t) {
      // Step 1: fallback copy of the current energy layer, read when the
      // successor layer is visited.
      fb_current = fwd_src[t];

      // Step 2: temporal messages from the previous fallback and from the
      // next layer's current state.
      if (t > 0)
        min_convolve(fb_prev, t - 1, /*forward=*/true, m_prev);
      else
        std::fill(m_prev.begin(), m_prev.end(), 0.0);
      if (t + 1 < T)
        min_convolve(bwd_src[t + 1], t, /*forward=*/false, m_next);
      else
        std::fill(m_next.begin(), m_next.end(), 0.0);

      std::vector<double> eff(layer_n);
      const double* theta = u.values.data() +
                            static_cast<std::size_t>(t) * layer_n;
      for (std::size_t i = 0; i < layer_n; ++i)
        eff[i] = theta[i] + m_prev[i] + m_next[i];

      // Intra-layer spatial messages inside moving windows; the message
      // fields persist across sweeps. Windows tile the write region and
      // read one pixel past their edge, visited in raster order and again
      // in reverse, so the result is identical to a whole-layer sweep
      // regardless of the window size.
      LayerPass& pass = passes[t];
      pass.eff_unary = eff.data();
      const int win = cfg.window;
      for (int rep = 0; rep < 1; ++rep) {
      for (int wy = 0; wy < H; wy += win)
        for (int wx = 0; wx < W; wx += win) {
          const int ye = std::min(H, wy + win), xe = std::min(W, wx + win);
          for (int y = wy; y < ye; ++y)
            for (int x = wx; x < xe; ++x) pass.update_pixel(t, y, x);
        }
      const int last_wy = ((H - 1) / win) * win;
      const int last_wx = ((W - 1) / win) * win;
      for (int wy = last_wy; wy >= 0; wy -= win)
        for (int wx = last_wx; wx >= 0; wx -= win) {
          const int ye = std::min(H, wy + win), xe = std::min(W, wx + win);
          for (int y = ye - 1; y >= wy; --y)
            for (int x = xe - 1; x >= wx; --x) pass.update_pixel(t, y, x);
        }
      }

      // Fold the fresh spatial context back into the layer's energy fields
      // and read off labels.
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const std::size_t off = (static_cast<std::size_t>(y) * W + x) * K;
          double spatial[64];
          for (int k = 0; k < K; ++k) spatial[k] = 0.0;
          for (int d = 0; d < 4; ++d) {
            const double* m = pass.slot(static_cast<Dir>(d), y, x);
            for (int k = 0; k < K; ++k) spatial[k] += m[k];
          }
          double belief[64];
          for (int k = 0; k < K; ++k) {
            const double base = theta[off + k] + spatial[k];
            fwd_src[t][off + k] = base + m_prev[off + k];
            bwd_src[t][off + k] = base + m_next[off + k];
            belief[k] = base + m_prev[off + k] + m_next[off + k];
          }
          min_normalize(fwd_src[t].data() + off, K);
          min_normalize(bwd_src[t].data() + off, K);
          check_finite(fwd_src[t].data() + off, K, t, y, x);
          next_labels.at(t, y, x) = argmin_label(belief, K);
        }

      // Step 3: discard the previous fallback, advance the buffer.
      std::swap(fb_prev, fb_current);
    }

    iters = iter + 1;
    const double frac = changed_fraction(labels, next_labels);
    labels = std::move(next_labels);
    if (cfg.trace)
      *cfg.trace << iters << ',' << total_energy(labels, problem) << ','
                 << frac << '\n';
    if (frac < cfg.convergence_eps) {
      converged = true;
      break;
    }
  }
  return {std::move(labels), converged, iters};
}

// ============================================================================
// ICM and exhaustive oracle
// ============================================================================

LabelStack icm_baseline(const MrfProblem& problem, const LabelStack& init,
                        int max_sweeps) {
  problem.validate();
  const EnergyStack& u = problem.unary;
  if (init.t != u.t || init.h != u.h || init.w != u.w)
    throw DataError("ICM init shape does not match unary stack");
  if (max_sweeps < 1) throw DataError("ICM max_sweeps must be >= 1");
  const int T = u.t, H = u.h, W = u.w, K = u.k;

  LabelStack labels = init;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    std::size_t changes = 0;
    for (int t = 0; t < T; ++t)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          int best = 0;
          double best_e = kInf;
          for (int k = 0; k < K; ++k) {
            double e = u.at(t, y, x, k);
            if (x > 0) e += problem.spatial_edge_energy(k, labels.at(t, y, x - 1));
            if (x + 1 < W)
              e += problem.spatial_edge_energy(k, labels.at(t, y, x + 1));
            if (y > 0) e += problem.spatial_edge_energy(k, labels.at(t, y - 1, x));
            if (y + 1 < H)
              e += problem.spatial_edge_energy(k, labels.at(t, y + 1, x));
            if (t > 0)
              e += problem.temporal_link_energy(t - 1, labels.at(t - 1, y, x), k);
            if (t + 1 < T)
              e += problem.temporal_link_energy(t, k, labels.at(t + 1, y, x));
            if (e < best_e) {
              best_e = e;
              best = k;
            }
          }
          if (best != labels.at(t, y, x)) {
            labels.at(t, y, x) = best;
            ++changes;
          }
        }
    if (changes == 0) break;
  }
  return labels;
}

std::pair<LabelStack, double> brute_force_map(const MrfProblem& problem,
                                              long long state_limit) {
  problem.validate();
  const EnergyStack& u = problem.unary;
  const std::size_t n = static_cast<std::size_t>(u.t) * u.h * u.w;
  const int K = u.k;

  long double states = 1.0L;
  for (std::size_t i = 0; i < n; ++i) states *= K;
  if (states > static_cast<long double>(state_limit))
    throw DataError("brute force refused: " + std::to_string(K) + "^" +
                    std::to_string(n) + " = " +
                    std::to_string(static_cast<double>(states)) +
                    " states exceeds limit " + std::to_string(state_limit));

  LabelStack current(u.t, u.h, u.w);
  LabelStack best = current;
  double best_e = total_energy(current, problem);
  // Odometer with the last cell fastest enumerates labelings in ascending
  // lexicographic order, so the first strict improvement is also the
  // lexicographically smallest optimum.
  while (true) {
    int pos = static_cast<int>(n) - 1;
    while (pos >= 0) {
      if (++current.values[pos] < K) break;
      current.values[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    const double e = total_energy(current, problem);
    if (e < best_e) {
      best_e = e;
      best = current;
    }
  }
  return {std::move(best), best_e};
}

}  // namespace stmrf
