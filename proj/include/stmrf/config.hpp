#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stmrf/glcm.hpp"
#include "stmrf/ivm.hpp"
#include "stmrf/lbp.hpp"
#include "stmrf/synth.hpp"
#include "stmrf/types.hpp"

namespace stmrf {

/// Everything the four pipeline stages need, loaded from a UTF-8 text file
/// of "section.key = value" lines ('#' starts a comment). Unknown keys are
/// configuration errors so typos cannot silently fall back to defaults.
struct PipelineConfig {
  ClassSet classes = ClassSet::study_default();
  std::vector<Date> dates = {Date{2014, 6, 8}, Date{2014, 6, 30},
                             Date{2014, 7, 22}, Date{2014, 8, 24},
                             Date{2014, 9, 4}};

  // synth
  int height = 128, width = 128;
  int bands = 2;
  double speckle_looks = 4.0;
  int pasture_patches = 10, burnt_patches = 3, water_bodies = 2;
  int forest_sites = 8;
  int patch_radius_min = 6, patch_radius_max = 14;
  int polygons_per_patch = 2;
  int polygon_edge_min = 8, polygon_edge_max = 12;
  bool fishbone = false;
  Date burn_start{2014, 7, 25};
  std::vector<double> date_noise;  // empty: study default when 5 dates
  std::map<std::string, ClassAppearance> appearance_override;

  // glcm
  GlcmConfig glcm;

  // ivm
  std::vector<double> sigma_factors = {0.25, 0.5, 1, 2, 4, 8, 16};
  std::vector<double> c_grid = {0.125, 0.25, 0.5, 1, 2, 4, 8, 16, 32, 64, 128};
  int folds = 5;
  IvmTrainConfig ivm;

  // mrf
  std::string delta_file;  // empty: Potts
  std::string tau_file;    // empty: built-in study matrix
  double beta_sp = 1.0;
  double beta_temp = 1.0;
  int base_days = kBaseGapDays;

  // lbp
  LbpConfig lbp;

  // sampling
  int per_polygon = 15;
  double min_dist_px = 6.0;  // 30 m at 5 m pixel spacing

  // assess
  double total_area = 0.0;  // 0: use H*W pixels

  int runs = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";

  static PipelineConfig load(const std::string& path);
  static PipelineConfig parse(std::istream& in, const std::string& origin);

  /// Applies one "section.key" assignment; throws ConfigError on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Cross-field checks plus existence of every referenced file.
  void validate() const;

  /// The synthetic scenario implied by this configuration.
  Scenario scenario() const;
};

}  // namespace stmrf
