#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stmrf/types.hpp"

namespace stmrf {

/// Per-class intensity distribution of the rendered bands: independent
/// gaussians (a diagonal covariance). Zero sd renders the exact mean.
struct ClassAppearance {
  std::vector<double> mean;
  std::vector<double> sd;
};

/// Fully seeded description of a synthetic multi-temporal scene. Identical
/// scenarios produce bit-identical truth, features, and samples.
struct Scenario {
  ClassSet classes = ClassSet::study_default();
  int height = 128;
  int width = 128;
  std::vector<Date> dates;  // T acquisition dates, strictly increasing
  std::uint64_t seed = 1;
  std::uint64_t patch_seed = 0;  // 0: derived from seed
  int bands = 2;
  double speckle_looks = 4.0;  // <= 0 or inf: speckle off
  std::vector<ClassAppearance> appearance;  // one per class
  // Per-date noise multiplier on the class sd (mirrors scenes of weaker
  // polarizations); empty means 1.0 everywhere.
  std::vector<double> date_noise;

  // Patch layout at the first date. The matrix background is forest.
  int pasture_patches = 10;  // per pasture type (clean and shrubby)
  int burnt_patches = 3;
  int water_bodies = 2;
  int forest_sites = 8;      // rectangles reserved on background forest
  int patch_radius_min = 6;
  int patch_radius_max = 14;
  bool fishbone = false;     // elongate pasture patches along x

  // Row-stochastic true dynamics, one K x K matrix per consecutive gap.
  std::vector<std::vector<std::vector<double>>> true_forward;

  // Reference rectangles: how many to inscribe per patch and their edges.
  int polygons_per_patch = 2;
  int polygon_edge_min = 8;
  int polygon_edge_max = 12;

  /// The five study dates of 2014 with the default dynamics: burning ramps
  /// up for gaps that end after late July.
  static Scenario study_default(std::uint64_t seed = 1);

  void validate() const;
};

/// Row-stochastic true dynamics of the default study classes for the given
/// dates: pasture shifts and burns (after burn_start), water and forest
/// persist. One matrix per consecutive gap.
std::vector<std::vector<std::vector<double>>> default_true_dynamics(
    const std::vector<Date>& dates, const Date& burn_start);

enum class PolyRole { kTrain, kTest };

/// Axis-aligned reference rectangle, single-class at every date.
struct Polygon {
  int id = 0;
  int y0 = 0, x0 = 0, y1 = 0, x1 = 0;  // inclusive bounds
  std::vector<int> class_per_date;
  PolyRole role = PolyRole::kTrain;

  int area() const { return (y1 - y0 + 1) * (x1 - x0 + 1); }
  bool contains(int y, int x) const {
    return y >= y0 && y <= y1 && x >= x0 && x <= x1;
  }
  /// Corner vertices in (y, x) order, clockwise from the top-left.
  std::vector<std::pair<int, int>> vertices() const;
};

struct PolygonSet {
  int t = 0;  // dates covered by class_per_date
  std::vector<Polygon> polys;
};

struct SynthTruth {
  LabelStack truth;
  std::vector<int> patch_of;  // H*W patch index, -1 on background
  PolygonSet polygons;        // roles not yet assigned
};

/// Patch mosaic at the first date (forest matrix, pasture patches, water
/// bodies, a few early burns), evolved per gap by sampling the scenario's
/// true forward matrices. Whole patches transition together.
SynthTruth generate_truth(const Scenario& sc);
LabelStack generate_truth_stack(const Scenario& sc);

/// Class-conditional gaussian intensities multiplied by unit-mean gamma
/// speckle of the configured number of looks.
FeatureStack render_features(const LabelStack& truth, const Scenario& sc);

struct SamplePoint {
  int polygon_id = 0;
  int y = 0, x = 0;
};

struct SamplePlan {
  PolygonSet polygons;  // with roles assigned
  std::vector<SamplePoint> train_points, test_points;
  std::vector<std::string> warnings;
  int subseed_increments = 0;  // coverage retries that were needed
};

/// Splits polygons 50:50 into train and test roles per first-date class,
/// then draws per_poly points per polygon with the minimum spacing
/// (rejection sampling; an infeasible polygon yields the maximum it can
/// host plus a warning). Resamples with an incremented sub-seed until every
/// class present in the truth at a date has at least min_per_class training
/// points at that date (grid search needs one per fold).
SamplePlan sample_polygons(const PolygonSet& polys, const LabelStack& truth,
                           int per_poly, double min_dist, std::uint64_t seed,
                           int min_per_class = 1);

/// Polygon CSV: "id,date,class,role,vertices"; vertices are
/// "y:x" pairs joined by '|'.
void write_polygons_csv(std::ostream& out, const PolygonSet& polys,
                        const ClassSet& classes,
                        const std::vector<Date>& dates);
PolygonSet read_polygons_csv(std::istream& in, const ClassSet& classes,
                             const std::vector<Date>& dates);

/// Derives an independent stream seed for a named stage of a run.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace stmrf
