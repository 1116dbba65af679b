#include "stmrf/glcm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stmrf/parallel.hpp"

namespace stmrf {

void GlcmConfig::validate() const {
  if (window < 3 || window % 2 == 0)
    throw DataError("GLCM window must be odd and >= 3, got " +
                    std::to_string(window));
  if (levels < 2) throw DataError("GLCM levels must be >= 2");
  if (offset < 1) throw DataError("GLCM offset must be >= 1");
  if (directions.empty()) throw DataError("GLCM needs at least one direction");
  for (const auto& [dy, dx] : directions)
    if (dy == 0 && dx == 0) throw DataError("GLCM direction (0,0) is invalid");
}

const char* GlcmFeatures::name(int i) {
  static const char* names[kCount] = {
      "contrast", "dissimilarity", "homogeneity", "asm",      "energy",
      "max_prob", "entropy",       "glcm_mean",   "variance", "correlation"};
  return names[i];
}

std::vector<int> quantize_probabilistic(const std::vector<double>& band, int h,
                                        int w, int levels) {
  if (levels < 2) throw DataError("quantization levels must be >= 2");
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (band.size() != n) throw DataError("band size does not match dimensions");
  for (double v : band)
    if (!std::isfinite(v)) throw DataError("non-finite value in band");

  std::vector<double> sorted(band);
  std::sort(sorted.begin(), sorted.end());

  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Tied values collapse onto the rank of their first occurrence, so a
    // constant band lands entirely in level 0.
    const std::size_t rank =
        std::lower_bound(sorted.begin(), sorted.end(), band[i]) -
        sorted.begin();
    out[i] = static_cast<int>(rank * static_cast<std::size_t>(levels) / n);
  }
  return out;
}

namespace {

/// Reusable co-occurrence accumulator. Tracks which cells were touched so a
/// sliding pass over many windows does not rescan the whole matrix.
struct GlcmAccum {
  int levels;
  std::vector<double> count;
  std::vector<int> touched;
  double total = 0.0;

  explicit GlcmAccum(int lv) : levels(lv) {
    count.assign(static_cast<std::size_t>(lv) * lv, 0.0);
    touched.reserve(1024);
  }

  void reset() {
    for (int idx : touched) count[idx] = 0.0;
    touched.clear();
    total = 0.0;
  }

  void add_pair(int a, int b) {
    const int ij = a * levels + b;
    const int ji = b * levels + a;
    if (count[ij] == 0.0) touched.push_back(ij);
    count[ij] += 1.0;
    if (ij != ji) {
      if (count[ji] == 0.0) touched.push_back(ji);
      count[ji] += 1.0;
    } else {
      count[ji] += 1.0;
    }
    total += 2.0;
  }

  /// Accumulates all co-occurrences of the clamped window
  /// [y0, y1] x [x0, x1] of `lv` (an h x w index image).
  void accumulate(const std::vector<int>& lv, int w, int y0, int y1, int x0,
                  int x1, const GlcmConfig& cfg) {
    for (const auto& [dy, dx] : cfg.directions) {
      const int oy = dy * cfg.offset, ox = dx * cfg.offset;
      for (int y = y0; y <= y1; ++y) {
        const int yn = y + oy;
        if (yn < y0 || yn > y1) continue;
        for (int x = x0; x <= x1; ++x) {
          const int xn = x + ox;
          if (xn < x0 || xn > x1) continue;
          add_pair(lv[static_cast<std::size_t>(y) * w + x],
                   lv[static_cast<std::size_t>(yn) * w + xn]);
        }
      }
    }
  }

  GlcmFeatures features() const {
    GlcmFeatures f;
    if (total == 0.0) return f;
    double contrast = 0, dissim = 0, homog = 0, asm2 = 0, maxp = 0, ent = 0;
    double mean = 0;
    for (int idx : touched) {
      const double p = count[idx] / total;
      const int i = idx / levels, j = idx % levels;
      const double d = i - j;
      contrast += p * d * d;
      dissim += p * std::abs(d);
      homog += p / (1.0 + d * d);
      asm2 += p * p;
      maxp = std::max(maxp, p);
      ent -= p * std::log(p);  // p > 0 on touched cells
      mean += p * i;
    }
    double var = 0, cov = 0;
    for (int idx : touched) {
      const double p = count[idx] / total;
      const int i = idx / levels, j = idx % levels;
      var += p * (i - mean) * (i - mean);
      cov += p * (i - mean) * (j - mean);
    }
    f.v = {contrast, dissim, homog,           asm2, std::sqrt(asm2),
           maxp,     ent,    mean,            var,
           var > 0.0 ? cov / var : 1.0};
    return f;
  }
};

}  // namespace

Glcm compute_glcm(const std::vector<int>& levels_window, int h, int w,
                  const GlcmConfig& cfg) {
  cfg.validate();
  if (h < 1 || w < 1 ||
      levels_window.size() != static_cast<std::size_t>(h) * w)
    throw DataError("level window size does not match dimensions");
  for (int v : levels_window)
    if (v < 0 || v >= cfg.levels)
      throw DataError("level index out of range: " + std::to_string(v));

  GlcmAccum acc(cfg.levels);
  acc.accumulate(levels_window, w, 0, h - 1, 0, w - 1, cfg);
  if (acc.total == 0.0)
    throw DataError("no pairs: window " + std::to_string(h) + "x" +
                    std::to_string(w) + " admits no co-occurrence at offset " +
                    std::to_string(cfg.offset));

  Glcm g;
  g.levels = cfg.levels;
  g.p.assign(acc.count.size(), 0.0);
  for (std::size_t i = 0; i < acc.count.size(); ++i)
    g.p[i] = acc.count[i] / acc.total;
  return g;
}

GlcmFeatures glcm_features(const Glcm& g) {
  if (g.levels < 1 ||
      g.p.size() != static_cast<std::size_t>(g.levels) * g.levels)
    throw DataError("malformed GLCM");
  GlcmAccum acc(g.levels);
  for (int i = 0; i < g.levels; ++i)
    for (int j = 0; j < g.levels; ++j) {
      const double p = g.at(i, j);
      if (p < 0.0) throw DataError("GLCM entries must be non-negative");
      if (p > 0.0) {
        const int idx = i * g.levels + j;
        acc.count[idx] = p;
        acc.touched.push_back(idx);
      }
    }
  double sum = 0.0;
  for (double p : g.p) sum += p;
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("GLCM does not sum to 1");
  acc.total = sum;
  return acc.features();
}

std::vector<double> texture_feature_stack(const std::vector<double>& scene,
                                          int h, int w, int bands,
                                          const GlcmConfig& cfg, int threads) {
  cfg.validate();
  if (bands < 1) throw DataError("texture needs at least one band");
  if (scene.size() != static_cast<std::size_t>(h) * w * bands)
    throw DataError("scene size does not match dimensions");
  if (cfg.window > h || cfg.window > w)
    throw DataError("GLCM window " + std::to_string(cfg.window) +
                    " exceeds scene extent " + std::to_string(h) + "x" +
                    std::to_string(w));

  const int nf = GlcmFeatures::kCount;
  std::vector<double> out(static_cast<std::size_t>(h) * w * nf * bands, 0.0);
  const int r = cfg.window / 2;

  for (int b = 0; b < bands; ++b) {
    std::vector<double> band(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        band[static_cast<std::size_t>(y) * w + x] =
            scene[(static_cast<std::size_t>(y) * w + x) * bands + b];
    const std::vector<int> lv = quantize_probabilistic(band, h, w, cfg.levels);

    parallel_chunks(h, threads, [&](std::size_t yb, std::size_t ye) {
      GlcmAccum acc(cfg.levels);
      for (std::size_t y = yb; y < ye; ++y) {
        const int y0 = std::max(0, static_cast<int>(y) - r);
        const int y1 = std::min(h - 1, static_cast<int>(y) + r);
        for (int x = 0; x < w; ++x) {
          const int x0 = std::max(0, x - r);
          const int x1 = std::min(w - 1, x + r);
          acc.reset();
          acc.accumulate(lv, w, y0, y1, x0, x1, cfg);
          const GlcmFeatures f = acc.features();
          double* dst = out.data() +
                        (static_cast<std::size_t>(y) * w + x) * nf * bands +
                        static_cast<std::size_t>(b) * nf;
          std::copy(f.v.begin(), f.v.end(), dst);
        }
      }
    });
  }
  return out;
}

}  // namespace stmrf
