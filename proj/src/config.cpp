#include "stmrf/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stmrf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::vector<double> to_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ','))
    if (!item.empty()) out.push_back(to_real(key, item));
  if (out.empty())
    throw ConfigError("key '" + key + "' expects a comma-separated list");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "classes.names") {
    auto names = split(value, ',');
    try {
      classes = ClassSet(names);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "dates.list") {
    std::vector<Date> ds;
    try {
      for (const auto& s : split(value, ',')) ds.push_back(Date::parse(s));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (ds.empty()) throw ConfigError("dates.list must not be empty");
    dates = std::move(ds);
  } else if (key == "synth.height") {
    height = static_cast<int>(to_int(key, value));
  } else if (key == "synth.width") {
    width = static_cast<int>(to_int(key, value));
  } else if (key == "synth.bands") {
    bands = static_cast<int>(to_int(key, value));
  } else if (key == "synth.speckle_looks") {
    speckle_looks = to_real(key, value);
  } else if (key == "synth.pasture_patches") {
    pasture_patches = static_cast<int>(to_int(key, value));
  } else if (key == "synth.burnt_patches") {
    burnt_patches = static_cast<int>(to_int(key, value));
  } else if (key == "synth.water_bodies") {
    water_bodies = static_cast<int>(to_int(key, value));
  } else if (key == "synth.forest_sites") {
    forest_sites = static_cast<int>(to_int(key, value));
  } else if (key == "synth.patch_radius_min") {
    patch_radius_min = static_cast<int>(to_int(key, value));
  } else if (key == "synth.patch_radius_max") {
    patch_radius_max = static_cast<int>(to_int(key, value));
  } else if (key == "synth.polygons_per_patch") {
    polygons_per_patch = static_cast<int>(to_int(key, value));
  } else if (key == "synth.polygon_edge_min") {
    polygon_edge_min = static_cast<int>(to_int(key, value));
  } else if (key == "synth.polygon_edge_max") {
    polygon_edge_max = static_cast<int>(to_int(key, value));
  } else if (key == "synth.fishbone") {
    fishbone = to_bool(key, value);
  } else if (key == "synth.burn_start") {
    try {
      burn_start = Date::parse(value);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "synth.date_noise") {
    date_noise = to_reals(key, value);
  } else if (key.rfind("synth.mean.", 0) == 0) {
    const std::string cls = key.substr(11);
    if (classes.index_of(cls) < 0)
      throw ConfigError("unknown class in key '" + key + "'");
    appearance_override[cls].mean = to_reals(key, value);
  } else if (key.rfind("synth.sd.", 0) == 0) {
    const std::string cls = key.substr(9);
    if (classes.index_of(cls) < 0)
      throw ConfigError("unknown class in key '" + key + "'");
    appearance_override[cls].sd = to_reals(key, value);
  } else if (key == "glcm.window") {
    glcm.window = static_cast<int>(to_int(key, value));
  } else if (key == "glcm.levels") {
    glcm.levels = static_cast<int>(to_int(key, value));
  } else if (key == "glcm.offset") {
    glcm.offset = static_cast<int>(to_int(key, value));
  } else if (key == "ivm.sigma_factors") {
    sigma_factors = to_reals(key, value);
  } else if (key == "ivm.c_grid") {
    c_grid = to_reals(key, value);
  } else if (key == "ivm.folds") {
    folds = static_cast<int>(to_int(key, value));
  } else if (key == "ivm.max_import") {
    ivm.max_import = static_cast<int>(to_int(key, value));
  } else if (key == "ivm.tol") {
    ivm.tol = to_real(key, value);
  } else if (key == "ivm.candidate_subsample") {
    ivm.candidate_subsample = static_cast<int>(to_int(key, value));
  } else if (key == "mrf.delta_file") {
    delta_file = value;
  } else if (key == "mrf.tau_file") {
    tau_file = value;
  } else if (key == "mrf.beta_sp") {
    beta_sp = to_real(key, value);
  } else if (key == "mrf.beta_temp") {
    beta_temp = to_real(key, value);
  } else if (key == "mrf.base_days") {
    base_days = static_cast<int>(to_int(key, value));
  } else if (key == "lbp.max_iters") {
    lbp.max_iters = static_cast<int>(to_int(key, value));
  } else if (key == "lbp.damping") {
    lbp.damping = to_real(key, value);
  } else if (key == "lbp.converge_eps") {
    lbp.convergence_eps = to_real(key, value);
  } else if (key == "lbp.window") {
    lbp.window = static_cast<int>(to_int(key, value));
  } else if (key == "sampling.per_polygon") {
    per_polygon = static_cast<int>(to_int(key, value));
  } else if (key == "sampling.min_dist_px") {
    min_dist_px = to_real(key, value);
  } else if (key == "assess.total_area") {
    total_area = to_real(key, value);
  } else if (key == "runs.count") {
    runs = static_cast<int>(to_int(key, value));
  } else if (key == "runs.seed") {
    seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "runtime.threads") {
    threads = static_cast<int>(to_int(key, value));
  } else if (key == "paths.out") {
    out_dir = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

PipelineConfig PipelineConfig::parse(std::istream& in,
                                     const std::string& origin) {
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key '" + key + "' lacks a section prefix");
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse(in, path);
}

void PipelineConfig::validate() const {
  if (beta_sp < 0.0 || beta_temp < 0.0)
    throw ConfigError("mrf.beta_sp and mrf.beta_temp must be >= 0");
  if (runs < 1) throw ConfigError("runs.count must be >= 1");
  if (threads < 1) throw ConfigError("runtime.threads must be >= 1");
  if (folds < 2) throw ConfigError("ivm.folds must be >= 2");
  if (per_polygon < 1) throw ConfigError("sampling.per_polygon must be >= 1");
  if (min_dist_px < 0.0) throw ConfigError("sampling.min_dist_px must be >= 0");
  if (base_days <= 0) throw ConfigError("mrf.base_days must be > 0");
  if (sigma_factors.empty() || c_grid.empty())
    throw ConfigError("ivm grids must not be empty");
  for (double s : sigma_factors)
    if (!(s > 0.0)) throw ConfigError("ivm.sigma_factors must be > 0");
  for (double c : c_grid)
    if (!(c > 0.0)) throw ConfigError("ivm.c_grid must be > 0");
  if (total_area < 0.0) throw ConfigError("assess.total_area must be >= 0");
  if (static_cast<int>(dates.size()) < 1)
    throw ConfigError("dates.list must not be empty");
  if (!date_noise.empty() && date_noise.size() != dates.size())
    throw ConfigError("synth.date_noise must list one factor per date");
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (!(dates[i - 1] < dates[i]))
      throw ConfigError("dates.list must be strictly increasing");
  try {
    glcm.validate();
    lbp.validate();
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  for (const std::string& f : {delta_file, tau_file})
    if (!f.empty() && !std::filesystem::exists(f))
      throw ConfigError("referenced file does not exist: " + f);
  for (const auto& [cls, ap] : appearance_override) {
    if ((!ap.mean.empty() &&
         static_cast<int>(ap.mean.size()) != bands) ||
        (!ap.sd.empty() && static_cast<int>(ap.sd.size()) != bands))
      throw ConfigError("appearance of class '" + cls + "' must list " +
                        std::to_string(bands) + " values per band");
  }
}

Scenario PipelineConfig::scenario() const {
  Scenario sc = Scenario::study_default(seed);
  sc.classes = classes;
  sc.height = height;
  sc.width = width;
  sc.dates = dates;
  sc.bands = bands;
  sc.speckle_looks = speckle_looks;
  sc.pasture_patches = pasture_patches;
  sc.burnt_patches = burnt_patches;
  sc.water_bodies = water_bodies;
  sc.forest_sites = forest_sites;
  sc.patch_radius_min = patch_radius_min;
  sc.patch_radius_max = patch_radius_max;
  sc.polygons_per_patch = polygons_per_patch;
  sc.polygon_edge_min = polygon_edge_min;
  sc.polygon_edge_max = polygon_edge_max;
  sc.fishbone = fishbone;
  if (!date_noise.empty())
    sc.date_noise = date_noise;
  else if (dates.size() != 5)
    sc.date_noise.clear();

  // Rebuild dynamics and appearance for the configured dates and classes.
  const int k = classes.size();
  sc.true_forward.clear();
  if (classes == ClassSet::study_default()) {
    sc.true_forward = default_true_dynamics(dates, burn_start);
  } else {
    // Non-study class sets keep a sticky identity-leaning chain.
    for (std::size_t g = 0; g + 1 < dates.size(); ++g) {
      std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          m[i][j] = i == j ? 0.9 : 0.1 / (k - 1);
      sc.true_forward.push_back(std::move(m));
    }
  }

  if (!(classes == ClassSet::study_default())) {
    sc.appearance.assign(k, ClassAppearance{});
    for (int c = 0; c < k; ++c) {
      sc.appearance[c].mean.assign(bands, 0.2 + 0.15 * c);
      sc.appearance[c].sd.assign(bands, 0.05);
    }
  } else if (bands != 2) {
    for (auto& ap : sc.appearance) {
      const double m0 = ap.mean[0], s0 = ap.sd[0];
      ap.mean.assign(bands, m0);
      ap.sd.assign(bands, s0);
    }
  }
  for (const auto& [cls, ap] : appearance_override) {
    const int c = classes.index_of(cls);
    if (!ap.mean.empty()) sc.appearance[c].mean = ap.mean;
    if (!ap.sd.empty()) sc.appearance[c].sd = ap.sd;
  }
  return sc;
}

}  // namespace stmrf
