#pragma once

#include <array>
#include <utility>
#include <vector>

#include "stmrf/types.hpp"

namespace stmrf {

struct GlcmConfig {
  int window = 11;  // odd, >= 3
  int levels = 64;  // >= 2
  int offset = 1;   // >= 1
  // (dy, dx) displacement per direction; counted symmetrically.
  std::vector<std::pair<int, int>> directions = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};

  void validate() const;
};

/// Normalized symmetric co-occurrence matrix.
struct Glcm {
  int levels = 0;
  std::vector<double> p;  // levels * levels, row-major, sums to 1

  double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

/// The ten texture measures, in the order they are reported.
struct GlcmFeatures {
  static constexpr int kCount = 10;
  std::array<double, kCount> v{};

  double contrast() const { return v[0]; }
  double dissimilarity() const { return v[1]; }
  double homogeneity() const { return v[2]; }
  double angular_second_moment() const { return v[3]; }
  double energy() const { return v[4]; }
  double max_probability() const { return v[5]; }
  double entropy() const { return v[6]; }
  double mean() const { return v[7]; }
  double variance() const { return v[8]; }
  double correlation() const { return v[9]; }

  static const char* name(int i);
};

/// Equal-frequency quantization over the whole band: level boundaries sit at
/// the j/levels quantiles, ties share the level of their first occurrence.
/// Every output lies in [0, levels); a constant band maps to level 0.
std::vector<int> quantize_probabilistic(const std::vector<double>& band, int h,
                                        int w, int levels);

/// Co-occurrence counts of a window of level indices over all configured
/// directions, accumulated symmetrically and normalized to sum 1.
/// Throws DataError("no pairs") when no displacement fits inside the window.
Glcm compute_glcm(const std::vector<int>& levels_window, int h, int w,
                  const GlcmConfig& cfg);

/// Direct evaluation of the ten measures. Correlation of a zero-variance
/// matrix is defined as 1.
GlcmFeatures glcm_features(const Glcm& g);

/// Sliding-window texture features for one scene of B bands (row-major,
/// band index fastest). Border windows are clamped to the image. Output is
/// H x W x (10 * B), feature index fastest, grouped by band.
std::vector<double> texture_feature_stack(const std::vector<double>& scene,
                                          int h, int w, int bands,
                                          const GlcmConfig& cfg,
                                          int threads = 1);

}  // namespace stmrf
