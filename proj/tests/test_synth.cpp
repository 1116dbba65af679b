#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "stmrf/rng.hpp"
#include "stmrf/synth.hpp"

using namespace stmrf;

TEST_CASE("identical scenarios are bit-identical end to end") {
  const Scenario sc = Scenario::study_default(42);
  const SynthTruth a = generate_truth(sc);
  const SynthTruth b = generate_truth(sc);
  CHECK(a.truth.values == b.truth.values);
  CHECK(a.patch_of == b.patch_of);
  CHECK(a.polygons.polys.size() == b.polygons.polys.size());

  const FeatureStack fa = render_features(a.truth, sc);
  const FeatureStack fb = render_features(b.truth, sc);
  CHECK(fa.values == fb.values);

  const SamplePlan pa = sample_polygons(a.polygons, a.truth, 5, 3.0, 7);
  const SamplePlan pb = sample_polygons(b.polygons, b.truth, 5, 3.0, 7);
  CHECK(pa.train_points.size() == pb.train_points.size());
  for (std::size_t i = 0; i < pa.train_points.size(); ++i) {
    CHECK(pa.train_points[i].y == pb.train_points[i].y);
    CHECK(pa.train_points[i].x == pb.train_points[i].x);
  }
}

TEST_CASE("different seeds give different scenes") {
  const Scenario a = Scenario::study_default(1);
  const Scenario b = Scenario::study_default(2);
  CHECK(generate_truth_stack(a).values != generate_truth_stack(b).values);
}

TEST_CASE("truth respects the scenario dynamics") {
  Scenario sc = Scenario::study_default(3);
  const int burnt = sc.classes.index_of("burnt_pasture");

  SUBCASE("zero burn probability keeps burnt pixels away") {
    sc.burnt_patches = 0;
    for (auto& m : sc.true_forward) {
      // remove every transition into burnt, renormalize rows
      for (auto& row : m) {
        row[burnt] = 0.0;
        double s = 0.0;
        for (double v : row) s += v;
        for (auto& v : row) v /= s;
      }
    }
    const LabelStack truth = generate_truth_stack(sc);
    for (int v : truth.values) CHECK(v != burnt);
  }
  SUBCASE("every class appears at the first date") {
    const LabelStack truth = generate_truth_stack(sc);
    std::set<int> seen;
    for (int y = 0; y < sc.height; ++y)
      for (int x = 0; x < sc.width; ++x) seen.insert(truth.at(0, y, x));
    CHECK(seen.size() == 5);
  }
  SUBCASE("water never moves") {
    const SynthTruth bundle = generate_truth(sc);
    const int water = sc.classes.index_of("water");
    for (int y = 0; y < sc.height; ++y)
      for (int x = 0; x < sc.width; ++x)
        if (bundle.truth.at(0, y, x) == water)
          for (int t = 1; t < bundle.truth.t; ++t)
            CHECK(bundle.truth.at(t, y, x) == water);
  }
}

TEST_CASE("patch-level class proportions follow the chain expectation") {
  // Many small patches on a large grid: the final-date class distribution of
  // pasture patches must match the matrix-power prediction within 3 sigma.
  Scenario sc = Scenario::study_default(11);
  sc.height = 256;
  sc.width = 256;
  sc.pasture_patches = 60;
  sc.burnt_patches = 10;
  sc.water_bodies = 2;
  sc.patch_radius_min = 3;
  sc.patch_radius_max = 5;
  sc.polygon_edge_min = 2;
  sc.polygon_edge_max = 3;

  const SynthTruth bundle = generate_truth(sc);
  const int t_last = bundle.truth.t - 1;

  // initial patch-class counts (one trial per patch)
  std::map<int, int> first_class, last_class;
  std::map<int, bool> seen;
  const int npix = sc.height * sc.width;
  std::vector<int> initial, final_;
  for (int i = 0; i < npix; ++i) {
    const int p = bundle.patch_of[i];
    if (p < 0 || seen[p]) continue;
    seen[p] = true;
    initial.push_back(bundle.truth.values[i]);
    final_.push_back(
        bundle.truth.values[static_cast<std::size_t>(t_last) * npix + i]);
  }
  const int n = static_cast<int>(initial.size());
  REQUIRE(n >= 60);

  // chain expectation: distribute each patch's start class through the gaps
  std::vector<double> expect(5, 0.0);
  for (int c0 : initial) {
    std::vector<double> dist(5, 0.0);
    dist[c0] = 1.0;
    for (const auto& m : sc.true_forward) {
      std::vector<double> next(5, 0.0);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) next[j] += dist[i] * m[i][j];
      dist = next;
    }
    for (int j = 0; j < 5; ++j) expect[j] += dist[j];
  }
  std::vector<int> got(5, 0);
  for (int c : final_) ++got[c];
  for (int j = 0; j < 5; ++j) {
    const double p = expect[j] / n;
    const double sigma = std::sqrt(std::max(1e-9, n * p * (1.0 - p)));
    CHECK(std::abs(got[j] - expect[j]) <= 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("rendering honors the appearance parameters") {
  Scenario sc = Scenario::study_default(5);
  sc.height = 32;
  sc.width = 32;
  sc.pasture_patches = 3;
  sc.burnt_patches = 1;
  sc.patch_radius_min = 3;
  sc.patch_radius_max = 5;
  sc.polygon_edge_min = 2;
  sc.polygon_edge_max = 3;

  SUBCASE("zero sd and no speckle renders exact class means") {
    for (auto& ap : sc.appearance) ap.sd = {0.0, 0.0};
    sc.speckle_looks = 0.0;  // off switch
    const LabelStack truth = generate_truth_stack(sc);
    const FeatureStack f = render_features(truth, sc);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        for (int b = 0; b < 2; ++b)
          CHECK(f.at(0, y, x, b) ==
                sc.appearance[truth.at(0, y, x)].mean[b]);
  }
  SUBCASE("speckled per-class sample mean approaches the class mean") {
    Scenario big = Scenario::study_default(6);
    big.height = 128;
    big.width = 128;
    const SynthTruth bundle = generate_truth(big);
    const FeatureStack f = render_features(bundle.truth, big);
    const int forest = big.classes.index_of("forest");
    double sum = 0.0;
    long long count = 0;
    for (int y = 0; y < big.height; ++y)
      for (int x = 0; x < big.width; ++x)
        if (bundle.truth.at(0, y, x) == forest) {
          sum += f.at(0, y, x, 0);
          ++count;
        }
    REQUIRE(count > 4000);
    const double mean = sum / count;
    const double mu = big.appearance[forest].mean[0];
    // speckle at L=4 dominates the spread: sd ~ mu/2 per draw
    const double se = (mu / 2.0) / std::sqrt(static_cast<double>(count));
    CHECK(std::abs(mean - mu) <= 3.5 * se);
  }
  SUBCASE("negative variance is rejected") {
    sc.appearance[0].sd = {-1.0, 0.1};
    CHECK_THROWS_WITH_AS(generate_truth_stack(sc),
                         doctest::Contains("positive semi-definite"),
                         DataError);
  }
}

TEST_CASE("polygon sampling protocol") {
  const Scenario sc = Scenario::study_default(9);
  const SynthTruth bundle = generate_truth(sc);

  SUBCASE("spacing holds within every polygon") {
    const SamplePlan plan =
        sample_polygons(bundle.polygons, bundle.truth, 15, 6.0, 1);
    std::map<int, std::vector<std::pair<int, int>>> by_poly;
    for (const auto& pt : plan.train_points)
      by_poly[pt.polygon_id].push_back({pt.y, pt.x});
    for (const auto& pt : plan.test_points)
      by_poly[pt.polygon_id].push_back({pt.y, pt.x});
    for (const auto& [id, pts] : by_poly)
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          const double dy = pts[i].first - pts[j].first;
          const double dx = pts[i].second - pts[j].second;
          CHECK(std::sqrt(dy * dy + dx * dx) >= 6.0);
        }
  }
  SUBCASE("train and test pixels are disjoint, roles split polygons") {
    const SamplePlan plan =
        sample_polygons(bundle.polygons, bundle.truth, 15, 6.0, 2);
    std::set<std::pair<int, int>> train_px;
    for (const auto& pt : plan.train_points) train_px.insert({pt.y, pt.x});
    for (const auto& pt : plan.test_points)
      CHECK(train_px.count({pt.y, pt.x}) == 0);

    int train_polys = 0, test_polys = 0;
    for (const auto& p : plan.polygons.polys)
      (p.role == PolyRole::kTrain ? train_polys : test_polys)++;
    CHECK(train_polys > 0);
    CHECK(test_polys > 0);
    CHECK(std::abs(train_polys - test_polys) <=
          static_cast<int>(plan.polygons.polys.size()) / 4 + 5);
  }
  SUBCASE("a polygon too small for the request warns and yields fewer") {
    PolygonSet tiny;
    tiny.t = bundle.polygons.t;
    Polygon p;
    p.id = 0;
    p.y0 = p.y1 = 4;
    p.x0 = p.x1 = 4;  // a single pixel
    p.class_per_date.assign(tiny.t, 4);
    tiny.polys.push_back(p);
    Polygon q = p;  // a second polygon so train and test both exist
    q.id = 1;
    q.y0 = q.y1 = 20;
    q.x0 = q.x1 = 20;
    tiny.polys.push_back(q);
    LabelStack forest_truth(tiny.t, sc.height, sc.width);
    for (auto& v : forest_truth.values) v = 4;
    const SamplePlan plan = sample_polygons(tiny, forest_truth, 15, 6.0, 3);
    CHECK(plan.train_points.size() == 1);
    CHECK(plan.test_points.size() == 1);
    CHECK(plan.warnings.size() == 2);
  }
  SUBCASE("per-date training coverage holds for every class in the truth") {
    const SamplePlan plan =
        sample_polygons(bundle.polygons, bundle.truth, 15, 6.0, 4);
    std::map<int, const Polygon*> by_id;
    for (const auto& p : plan.polygons.polys) by_id[p.id] = &p;
    for (int t = 0; t < bundle.truth.t; ++t) {
      std::set<int> in_truth, in_train;
      for (int y = 0; y < sc.height; ++y)
        for (int x = 0; x < sc.width; ++x)
          in_truth.insert(bundle.truth.at(t, y, x));
      for (const auto& pt : plan.train_points)
        in_train.insert(by_id.at(pt.polygon_id)->class_per_date[t]);
      for (int c : in_truth) CHECK(in_train.count(c) == 1);
    }
  }
}

TEST_CASE("polygons are single-class per date and disjoint") {
  const Scenario sc = Scenario::study_default(13);
  const SynthTruth bundle = generate_truth(sc);
  REQUIRE(bundle.polygons.polys.size() >= 10);
  for (const auto& p : bundle.polygons.polys) {
    for (int t = 0; t < bundle.truth.t; ++t)
      for (int y = p.y0; y <= p.y1; ++y)
        for (int x = p.x0; x <= p.x1; ++x)
          CHECK(bundle.truth.at(t, y, x) == p.class_per_date[t]);
  }
  for (std::size_t i = 0; i < bundle.polygons.polys.size(); ++i)
    for (std::size_t j = i + 1; j < bundle.polygons.polys.size(); ++j) {
      const auto& a = bundle.polygons.polys[i];
      const auto& b = bundle.polygons.polys[j];
      const bool disjoint =
          a.y1 < b.y0 || b.y1 < a.y0 || a.x1 < b.x0 || b.x1 < a.x0;
      CHECK(disjoint);
    }
}

TEST_CASE("polygon CSV round trip") {
  const Scenario sc = Scenario::study_default(17);
  const SynthTruth bundle = generate_truth(sc);
  const SamplePlan plan =
      sample_polygons(bundle.polygons, bundle.truth, 5, 3.0, 1);

  std::stringstream ss;
  write_polygons_csv(ss, plan.polygons, sc.classes, sc.dates);
  const PolygonSet loaded = read_polygons_csv(ss, sc.classes, sc.dates);
  REQUIRE(loaded.polys.size() == plan.polygons.polys.size());
  for (std::size_t i = 0; i < loaded.polys.size(); ++i) {
    const auto& a = plan.polygons.polys[i];
    const Polygon* b = nullptr;
    for (const auto& q : loaded.polys)
      if (q.id == a.id) b = &q;
    REQUIRE(b != nullptr);
    CHECK(b->y0 == a.y0);
    CHECK(b->y1 == a.y1);
    CHECK(b->x0 == a.x0);
    CHECK(b->x1 == a.x1);
    CHECK(b->role == a.role);
    CHECK(b->class_per_date == a.class_per_date);
  }
}

TEST_CASE("gamma speckle is unit mean") {
  Rng rng(100);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += rng.speckle(4.0);
  // var = 1/L per draw
  CHECK(std::abs(sum / n - 1.0) <= 3.5 * std::sqrt(0.25 / n));
}
