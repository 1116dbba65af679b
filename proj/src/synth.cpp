#include "stmrf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "stmrf/rng.hpp"

namespace stmrf {

namespace {

constexpr std::uint64_t kLayoutStream = 0xA11CE;
constexpr std::uint64_t kDynamicsStream = 0xB0B;
constexpr std::uint64_t kFeatureStream = 0xFEA7;
constexpr std::uint64_t kSamplingStream = 0x5A3;

}  // namespace

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<std::vector<double>>> default_true_dynamics(
    const std::vector<Date>& dates, const Date& burn_start) {
  std::vector<std::vector<std::vector<double>>> out;
  for (std::size_t g = 0; g + 1 < dates.size(); ++g) {
    std::vector<std::vector<double>> m(5, std::vector<double>(5, 0.0));
    const bool burning = burn_start < dates[g + 1];
    if (burning) {
      m[0] = {0.72, 0.14, 0.14, 0.00, 0.00};
      m[1] = {0.28, 0.62, 0.10, 0.00, 0.00};
      m[2] = {0.22, 0.05, 0.73, 0.00, 0.00};
    } else {
      m[0] = {0.55, 0.25, 0.20, 0.00, 0.00};
      m[1] = {0.04, 0.86, 0.10, 0.00, 0.00};
      m[2] = {0.04, 0.10, 0.82, 0.00, 0.04};
    }
    m[3] = {0.00, 0.00, 0.00, 1.00, 0.00};
    m[4] = {0.00, 0.00, 0.00, 0.00, 1.00};
    out.push_back(std::move(m));
  }
  return out;
}

Scenario Scenario::study_default(std::uint64_t seed) {
  Scenario sc;
  sc.seed = seed;
  sc.dates = {Date{2014, 6, 8}, Date{2014, 6, 30}, Date{2014, 7, 22},
              Date{2014, 8, 24}, Date{2014, 9, 4}};

  // Bands resemble two polarization intensities. The pasture pair overlaps
  // on purpose; separating it is the hard part of the mapping task.
  sc.appearance = {
      {{0.22, 0.10}, {0.030, 0.020}},  // burnt_pasture: dark scars
      {{0.35, 0.18}, {0.045, 0.030}},  // clean_pasture
      {{0.41, 0.23}, {0.055, 0.040}},  // shrubby_pasture: close to clean
      {{0.06, 0.03}, {0.010, 0.008}},  // water: near-specular
      {{0.70, 0.45}, {0.060, 0.050}},  // forest: bright canopy
  };

  // The second scene stands in for the weakest acquisition of the series.
  sc.date_noise = {1.0, 1.8, 1.0, 1.0, 1.2};

  // Dynamics per gap: pasture is restless, water and forest persist. Gaps
  // that end after late July carry the burning season.
  sc.true_forward = default_true_dynamics(sc.dates, Date{2014, 7, 25});
  return sc;
}

void Scenario::validate() const {
  const int k = classes.size();
  if (height < 16 || width < 16)
    throw DataError("scenario grid must be at least 16x16");
  if (dates.empty()) throw DataError("scenario needs at least one date");
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (!(dates[i - 1] < dates[i]))
      throw DataError("scenario dates must be strictly increasing");
  if (bands < 1) throw DataError("scenario needs at least one band");
  if (static_cast<int>(appearance.size()) != k)
    throw DataError("scenario needs appearance parameters for all classes");
  for (int c = 0; c < k; ++c) {
    const auto& ap = appearance[c];
    if (static_cast<int>(ap.mean.size()) != bands ||
        static_cast<int>(ap.sd.size()) != bands)
      throw DataError("appearance of class '" + classes.name(c) +
                      "' does not cover all bands");
    for (double s : ap.sd)
      if (s < 0.0 || !std::isfinite(s))
        throw DataError("covariance of class '" + classes.name(c) +
                        "' is not positive semi-definite");
  }
  if (!date_noise.empty()) {
    if (date_noise.size() != dates.size())
      throw DataError("date_noise must list one factor per date");
    for (double v : date_noise)
      if (!(v > 0.0)) throw DataError("date_noise factors must be > 0");
  }
  if (true_forward.size() != dates.size() - 1)
    throw DataError("scenario needs one true forward matrix per gap");
  for (const auto& m : true_forward) {
    if (static_cast<int>(m.size()) != k)
      throw DataError("true forward matrix must be KxK");
    for (const auto& row : m) {
      if (static_cast<int>(row.size()) != k)
        throw DataError("true forward matrix must be KxK");
      double sum = 0.0;
      for (double v : row) {
        if (v < 0.0) throw DataError("true forward entries must be >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw DataError("true forward rows must sum to 1");
    }
  }
  if (patch_radius_min < 2 || patch_radius_max < patch_radius_min)
    throw DataError("invalid patch radius range");
  if (pasture_patches < 1 || water_bodies < 1)
    throw DataError("scenario needs pasture patches and a water body");
  if (polygon_edge_min < 2 || polygon_edge_max < polygon_edge_min)
    throw DataError("invalid polygon edge range");
  if (polygons_per_patch < 1)
    throw DataError("scenario needs at least one polygon per patch");
}

std::vector<std::pair<int, int>> Polygon::vertices() const {
  return {{y0, x0}, {y0, x1}, {y1, x1}, {y1, x0}};
}

namespace {

/// Grows one roughly round patch of `target` cells from (sy, sx) into
/// unclaimed (-1) cells of `owner`, claiming them for `id`. Fishbone growth
/// prefers horizontal expansion.
void grow_patch(std::vector<int>& owner, int h, int w, int sy, int sx,
                int target, int id, bool fishbone, Rng& rng) {
  std::vector<std::pair<int, int>> frontier{{sy, sx}};
  int grown = 0;
  while (!frontier.empty() && grown < target) {
    const std::size_t pick = rng.uniform_int(frontier.size());
    const auto [y, x] = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    const std::size_t idx = static_cast<std::size_t>(y) * w + x;
    if (owner[idx] != -1) continue;
    owner[idx] = id;
    ++grown;
    const int dy[4] = {0, 0, 1, -1};
    const int dx[4] = {1, -1, 0, 0};
    for (int d = 0; d < 4; ++d) {
      const int ny = y + dy[d], nx = x + dx[d];
      if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
      if (owner[static_cast<std::size_t>(ny) * w + nx] != -1) continue;
      // Horizontal bias duplicates x-neighbors in the frontier pool.
      const int copies = fishbone && d < 2 ? 3 : 1;
      for (int cpy = 0; cpy < copies; ++cpy) frontier.push_back({ny, nx});
    }
  }
}

int categorical(const std::vector<double>& row, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    acc += row[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(row.size()) - 1;
}

}  // namespace

SynthTruth generate_truth(const Scenario& sc) {
  sc.validate();
  const int h = sc.height, w = sc.width, t = static_cast<int>(sc.dates.size());
  const int k = sc.classes.size();
  const int burnt = sc.classes.index_of("burnt_pasture");
  const int clean = sc.classes.index_of("clean_pasture");
  const int shrubby = sc.classes.index_of("shrubby_pasture");
  const int water = sc.classes.index_of("water");
  const int forest = sc.classes.index_of("forest");
  if (burnt < 0 || clean < 0 || shrubby < 0 || water < 0 || forest < 0)
    throw DataError("truth generation requires the study class set");

  const std::uint64_t layout_seed =
      sc.patch_seed != 0 ? sc.patch_seed : sub_seed(sc.seed, kLayoutStream);
  Rng layout_rng(layout_seed);

  // Patch class roster at the first date.
  std::vector<int> patch_class;
  for (int i = 0; i < sc.pasture_patches; ++i) patch_class.push_back(clean);
  for (int i = 0; i < sc.pasture_patches; ++i) patch_class.push_back(shrubby);
  for (int i = 0; i < sc.burnt_patches; ++i) patch_class.push_back(burnt);
  for (int i = 0; i < sc.water_bodies; ++i) patch_class.push_back(water);
  const int npatches = static_cast<int>(patch_class.size());

  std::vector<int> owner(static_cast<std::size_t>(h) * w, -1);
  std::vector<std::pair<int, int>> seeds;
  const int margin = sc.patch_radius_min;
  for (int p = 0; p < npatches; ++p) {
    // Separation relaxes as attempts fail so dense rosters still place; the
    // seed cell itself must be unclaimed or the patch could not grow.
    int sy = -1, sx = -1;
    bool placed = false;
    for (int attempt = 0; attempt < 600 && !placed; ++attempt) {
      const double sep =
          1.6 * sc.patch_radius_max * std::pow(0.85, attempt / 60);
      const int ty =
          margin + static_cast<int>(layout_rng.uniform_int(h - 2 * margin));
      const int tx =
          margin + static_cast<int>(layout_rng.uniform_int(w - 2 * margin));
      if (owner[static_cast<std::size_t>(ty) * w + tx] != -1) continue;
      placed = true;
      for (const auto& [py, px] : seeds) {
        const double dy = py - ty, dx = px - tx;
        if (std::sqrt(dy * dy + dx * dx) < sep) {
          placed = false;
          break;
        }
      }
      if (placed) {
        sy = ty;
        sx = tx;
      }
    }
    if (sy < 0) {
      // deterministic fallback: first unclaimed cell from a seeded offset
      const std::size_t start = layout_rng.uniform_int(
          static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w));
      for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) {
        const std::size_t cell = (start + i) % (static_cast<std::size_t>(h) * w);
        if (owner[cell] == -1) {
          sy = static_cast<int>(cell / w);
          sx = static_cast<int>(cell % w);
          break;
        }
      }
      if (sy < 0)
        throw DataError("patch roster does not fit the scenario grid");
    }
    seeds.push_back({sy, sx});
    const int radius =
        sc.patch_radius_min +
        static_cast<int>(layout_rng.uniform_int(
            sc.patch_radius_max - sc.patch_radius_min + 1));
    const int target = static_cast<int>(3.14159 * radius * radius);
    const bool stripes =
        sc.fishbone && (patch_class[p] == clean || patch_class[p] == shrubby);
    grow_patch(owner, h, w, sy, sx, target, p, stripes, layout_rng);
  }

  // Evolve whole patches along the true dynamics.
  Rng dyn_rng(sub_seed(sc.seed, kDynamicsStream));
  std::vector<std::vector<int>> patch_traj(npatches, std::vector<int>(t));
  for (int p = 0; p < npatches; ++p) {
    patch_traj[p][0] = patch_class[p];
    for (int g = 0; g + 1 < t; ++g)
      patch_traj[p][g + 1] =
          categorical(sc.true_forward[g][patch_traj[p][g]], dyn_rng);
  }

  LabelStack truth(t, h, w);
  for (int ti = 0; ti < t; ++ti)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int p = owner[static_cast<std::size_t>(y) * w + x];
        truth.at(ti, y, x) = p < 0 ? forest : patch_traj[p][ti];
      }

  // Reference rectangles: a couple inscribed per patch plus forest sites on
  // the untouched background. Attempted sizes shrink toward 2x2 so that
  // even small irregular patches end up with reference polygons.
  PolygonSet polys;
  polys.t = t;
  int next_id = 0;
  auto rect_inside = [&](int y0, int x0, int edge_y, int edge_x, int want) {
    if (y0 + edge_y > h || x0 + edge_x > w) return false;
    for (int y = y0; y < y0 + edge_y; ++y)
      for (int x = x0; x < x0 + edge_x; ++x)
        if (owner[static_cast<std::size_t>(y) * w + x] != want) return false;
    return true;
  };
  auto place_polygons = [&](int want, const std::vector<int>& traj,
                            int max_polys) {
    int placed = 0;
    for (int attempt = 0; attempt < 600 && placed < max_polys; ++attempt) {
      int lo = sc.polygon_edge_min, hi = sc.polygon_edge_max;
      if (attempt >= 200) hi = std::max(2, sc.polygon_edge_min);
      if (attempt >= 400) lo = hi = 2;
      lo = std::min(lo, hi);
      const int ey = lo + static_cast<int>(layout_rng.uniform_int(hi - lo + 1));
      const int ex = lo + static_cast<int>(layout_rng.uniform_int(hi - lo + 1));
      if (ey > h || ex > w) continue;
      const int y0 = static_cast<int>(layout_rng.uniform_int(h - ey + 1));
      const int x0 = static_cast<int>(layout_rng.uniform_int(w - ex + 1));
      if (!rect_inside(y0, x0, ey, ex, want)) continue;
      bool overlaps = false;
      for (const auto& q : polys.polys)
        if (!(y0 + ey - 1 < q.y0 || q.y1 < y0 || x0 + ex - 1 < q.x0 ||
              q.x1 < x0)) {
          overlaps = true;
          break;
        }
      if (overlaps) continue;
      Polygon poly;
      poly.id = next_id++;
      poly.y0 = y0;
      poly.x0 = x0;
      poly.y1 = y0 + ey - 1;
      poly.x1 = x0 + ex - 1;
      poly.class_per_date = traj;
      polys.polys.push_back(std::move(poly));
      ++placed;
    }
  };
  for (int p = 0; p < npatches; ++p)
    place_polygons(p, patch_traj[p], sc.polygons_per_patch);
  const std::vector<int> forest_traj(t, forest);
  place_polygons(-1, forest_traj, sc.forest_sites);

  return SynthTruth{std::move(truth), std::move(owner), std::move(polys)};
}

LabelStack generate_truth_stack(const Scenario& sc) {
  return generate_truth(sc).truth;
}

FeatureStack render_features(const LabelStack& truth, const Scenario& sc) {
  sc.validate();
  if (truth.t != static_cast<int>(sc.dates.size()) || truth.h != sc.height ||
      truth.w != sc.width)
    throw DataError("truth stack shape does not match scenario");
  truth.validate(sc.classes.size());

  const bool speckle_on =
      sc.speckle_looks > 0.0 && std::isfinite(sc.speckle_looks);
  Rng rng(sub_seed(sc.seed, kFeatureStream));
  FeatureStack out(truth.t, truth.h, truth.w, sc.bands, sc.dates);
  for (int t = 0; t < truth.t; ++t) {
    // Noisier dates widen the gaussian spread and thin the looks, like a
    // scene of the weaker polarization pair.
    const double noise = sc.date_noise.empty() ? 1.0 : sc.date_noise[t];
    const double looks = sc.speckle_looks / (noise * noise);
    for (int y = 0; y < truth.h; ++y)
      for (int x = 0; x < truth.w; ++x) {
        const auto& ap = sc.appearance[truth.at(t, y, x)];
        for (int b = 0; b < sc.bands; ++b) {
          double v = ap.mean[b];
          if (ap.sd[b] > 0.0) v += noise * ap.sd[b] * rng.normal();
          if (speckle_on) v *= rng.speckle(looks);
          out.at(t, y, x, b) = v;
        }
      }
  }
  return out;
}

namespace {

/// Draws up to per_poly points in the polygon with pairwise spacing
/// >= min_dist. Returns false when the full count could not be placed.
bool draw_points(const Polygon& poly, int per_poly, double min_dist, Rng& rng,
                 std::vector<SamplePoint>& out) {
  const int hh = poly.y1 - poly.y0 + 1, ww = poly.x1 - poly.x0 + 1;
  std::vector<std::pair<int, int>> placed;
  const int budget = 300 * per_poly;
  for (int attempt = 0; attempt < budget && static_cast<int>(placed.size()) < per_poly;
       ++attempt) {
    const int y = poly.y0 + static_cast<int>(rng.uniform_int(hh));
    const int x = poly.x0 + static_cast<int>(rng.uniform_int(ww));
    bool ok = true;
    for (const auto& [py, px] : placed) {
      const double dy = py - y, dx = px - x;
      if (std::sqrt(dy * dy + dx * dx) < min_dist) {
        ok = false;
        break;
      }
    }
    if (ok) placed.push_back({y, x});
  }
  for (const auto& [y, x] : placed) out.push_back({poly.id, y, x});
  return static_cast<int>(placed.size()) == per_poly;
}

}  // namespace

SamplePlan sample_polygons(const PolygonSet& polys, const LabelStack& truth,
                           int per_poly, double min_dist, std::uint64_t seed,
                           int min_per_class) {
  if (per_poly < 1) throw DataError("per_poly must be >= 1");
  if (min_per_class < 1) throw DataError("min_per_class must be >= 1");
  if (min_dist < 0.0) throw DataError("min_dist must be >= 0");
  if (polys.polys.empty()) throw DataError("no polygons to sample");
  if (polys.t != truth.t)
    throw DataError("polygon set covers " + std::to_string(polys.t) +
                    " dates, truth has " + std::to_string(truth.t));

  const int t = truth.t;
  // Classes present anywhere in the truth, per date: the coverage target.
  int k = 0;
  for (int v : truth.values) k = std::max(k, v + 1);
  std::vector<std::vector<char>> present(t, std::vector<char>(k, 0));
  for (int ti = 0; ti < t; ++ti)
    for (int y = 0; y < truth.h; ++y)
      for (int x = 0; x < truth.w; ++x) present[ti][truth.at(ti, y, x)] = 1;

  // Polygon ids need not be dense; map them back to indices once.
  int max_id = 0;
  for (const auto& p : polys.polys) max_id = std::max(max_id, p.id);
  std::vector<int> index_of_id(max_id + 1, -1);
  for (std::size_t i = 0; i < polys.polys.size(); ++i)
    index_of_id[polys.polys[i].id] = static_cast<int>(i);

  for (int bump = 0; bump < 100; ++bump) {
    Rng rng(sub_seed(seed + bump, kSamplingStream));
    SamplePlan plan;
    plan.polygons = polys;
    plan.subseed_increments = bump;

    // 50:50 split per first-date class so both roles see every class.
    std::vector<std::vector<int>> groups(k);
    for (std::size_t i = 0; i < plan.polygons.polys.size(); ++i)
      groups[plan.polygons.polys[i].class_per_date[0]].push_back(
          static_cast<int>(i));
    for (auto& g : groups) {
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const std::size_t j = i + rng.uniform_int(g.size() - i);
        std::swap(g[i], g[j]);
      }
      for (std::size_t i = 0; i < g.size(); ++i)
        plan.polygons.polys[g[i]].role =
            i % 2 == 0 ? PolyRole::kTrain : PolyRole::kTest;
    }

    for (const auto& poly : plan.polygons.polys) {
      auto& dst = poly.role == PolyRole::kTrain ? plan.train_points
                                                : plan.test_points;
      if (!draw_points(poly, per_poly, min_dist, rng, dst))
        plan.warnings.push_back(
            "polygon " + std::to_string(poly.id) + " hosts fewer than " +
            std::to_string(per_poly) + " samples at spacing " +
            std::to_string(min_dist));
    }

    // Coverage check: every class present in the truth of a date must have
    // enough training points at that date.
    bool covered = true;
    for (int ti = 0; ti < t && covered; ++ti) {
      std::vector<int> got(k, 0);
      for (const auto& pt : plan.train_points)
        ++got[plan.polygons.polys[index_of_id[pt.polygon_id]]
                  .class_per_date[ti]];
      for (int c = 0; c < k; ++c)
        if (present[ti][c] && got[c] < min_per_class) {
          covered = false;
          break;
        }
    }
    if (covered) return plan;
  }
  throw DataError(
      "sampling could not cover every class present in the truth; "
      "the scenario has too few polygons");
}

void write_polygons_csv(std::ostream& out, const PolygonSet& polys,
                        const ClassSet& classes,
                        const std::vector<Date>& dates) {
  out << "id,date,class,role,vertices\n";
  for (const auto& p : polys.polys)
    for (int t = 0; t < polys.t; ++t) {
      out << p.id << ',' << dates.at(t).to_string() << ','
          << classes.name(p.class_per_date[t]) << ','
          << (p.role == PolyRole::kTrain ? "train" : "test") << ',';
      const auto vs = p.vertices();
      for (std::size_t i = 0; i < vs.size(); ++i)
        out << vs[i].first << ':' << vs[i].second
            << (i + 1 < vs.size() ? "|" : "\n");
    }
}

PolygonSet read_polygons_csv(std::istream& in, const ClassSet& classes,
                             const std::vector<Date>& dates) {
  const int t = static_cast<int>(dates.size());
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,date,class,role", 0) != 0)
    throw DataError("polygon CSV lacks the expected header");
  std::map<int, Polygon> by_id;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id_s, date_s, class_s, role_s, verts_s;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, date_s, ',') ||
        !std::getline(ss, class_s, ',') || !std::getline(ss, role_s, ',') ||
        !std::getline(ss, verts_s))
      throw DataError("polygon CSV row is malformed: " + line);
    const int id = std::stoi(id_s);
    const int cls = classes.index_of(class_s);
    if (cls < 0) throw DataError("polygon CSV names unknown class " + class_s);
    int date_idx = -1;
    for (int i = 0; i < t; ++i)
      if (dates[i].to_string() == date_s) date_idx = i;
    if (date_idx < 0)
      throw DataError("polygon CSV names unknown date " + date_s);

    auto& poly = by_id[id];
    if (poly.class_per_date.empty()) {
      poly.id = id;
      poly.class_per_date.assign(t, 0);
      poly.role = role_s == "test" ? PolyRole::kTest : PolyRole::kTrain;
      int ymin = 1 << 30, ymax = -1, xmin = 1 << 30, xmax = -1;
      std::istringstream vs(verts_s);
      std::string pair;
      while (std::getline(vs, pair, '|')) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos)
          throw DataError("polygon CSV vertex is malformed: " + pair);
        const int y = std::stoi(pair.substr(0, colon));
        const int x = std::stoi(pair.substr(colon + 1));
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
      }
      if (ymax < 0) throw DataError("polygon CSV row lists no vertices");
      poly.y0 = ymin;
      poly.y1 = ymax;
      poly.x0 = xmin;
      poly.x1 = xmax;
    }
    poly.class_per_date[date_idx] = cls;
  }
  PolygonSet out;
  out.t = t;
  for (auto& [id, poly] : by_id) out.polys.push_back(std::move(poly));
  return out;
}

}  // namespace stmrf
