#include "stmrf/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "stmrf/assess.hpp"
#include "stmrf/core.hpp"
#include "stmrf/lbp.hpp"
#include "stmrf/raster_io.hpp"
#include "stmrf/transitions.hpp"

namespace stmrf {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string run_dir(const PipelineConfig& cfg, int run) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "run_%02d", run);
  return (fs::path(cfg.out_dir) / buf).string();
}

void require_out_dir(const PipelineConfig& cfg) {
  if (!fs::is_directory(cfg.out_dir))
    throw DataError("output directory does not exist: " + cfg.out_dir);
}

void require_file(const std::string& path, const char* hint) {
  if (!fs::exists(path))
    throw DataError(std::string(hint) + " missing: " + path +
                    " (run the earlier pipeline stages first)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

/// Sampled reference points of one run, with their per-date classes.
struct RunSamples {
  // rows: polygon_id, y, x, class per date
  std::vector<SamplePoint> points;
  std::vector<std::vector<int>> class_per_date;  // aligned with points
};

void write_samples_csv(const std::string& path, const PipelineConfig& cfg,
                       const SamplePlan& plan,
                       const std::vector<SamplePoint>& points) {
  auto out = open_out(path);
  out << "polygon_id,y,x";
  for (const auto& d : cfg.dates) out << ",class_" << d.to_string();
  out << '\n';
  std::map<int, const Polygon*> by_id;
  for (const auto& p : plan.polygons.polys) by_id[p.id] = &p;
  for (const auto& pt : points) {
    out << pt.polygon_id << ',' << pt.y << ',' << pt.x;
    for (int c : by_id.at(pt.polygon_id)->class_per_date)
      out << ',' << cfg.classes.name(c);
    out << '\n';
  }
}

RunSamples read_samples_csv(const std::string& path,
                            const PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open samples file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("polygon_id,y,x", 0) != 0)
    throw DataError("samples CSV lacks the expected header: " + path);
  RunSamples rs;
  const int t = static_cast<int>(cfg.dates.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    SamplePoint pt;
    std::getline(ss, field, ',');
    pt.polygon_id = std::stoi(field);
    std::getline(ss, field, ',');
    pt.y = std::stoi(field);
    std::getline(ss, field, ',');
    pt.x = std::stoi(field);
    std::vector<int> classes(t);
    for (int ti = 0; ti < t; ++ti) {
      if (!std::getline(ss, field, ','))
        throw DataError("samples CSV row is short: " + line);
      const int c = cfg.classes.index_of(field);
      if (c < 0) throw DataError("samples CSV names unknown class " + field);
      classes[ti] = c;
    }
    rs.points.push_back(pt);
    rs.class_per_date.push_back(std::move(classes));
  }
  return rs;
}

/// Band intensities followed by their texture features: F = B + 10*B.
FeatureStack assemble_classification_features(const FeatureStack& rendered,
                                              const PipelineConfig& cfg) {
  const int t = rendered.t, h = rendered.h, w = rendered.w, b = rendered.f;
  const int nf = b + GlcmFeatures::kCount * b;
  FeatureStack full(t, h, w, nf, rendered.dates);
  for (int ti = 0; ti < t; ++ti) {
    std::vector<double> scene(static_cast<std::size_t>(h) * w * b);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int bi = 0; bi < b; ++bi)
          scene[(static_cast<std::size_t>(y) * w + x) * b + bi] =
              rendered.at(ti, y, x, bi);
    const std::vector<double> tex =
        texture_feature_stack(scene, h, w, b, cfg.glcm, cfg.threads);
    const int ntex = GlcmFeatures::kCount * b;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        for (int bi = 0; bi < b; ++bi)
          full.at(ti, y, x, bi) = rendered.at(ti, y, x, bi);
        const double* src =
            tex.data() + (static_cast<std::size_t>(y) * w + x) * ntex;
        for (int fi = 0; fi < ntex; ++fi)
          full.at(ti, y, x, b + fi) = src[fi];
      }
  }
  return full;
}

TrainSet make_train_set(const PipelineConfig& cfg, const FeatureStack& full,
                        const SamplePlan& plan, int date) {
  std::map<int, const Polygon*> by_id;
  for (const auto& p : plan.polygons.polys) by_id[p.id] = &p;
  TrainSet ts;
  ts.classes = cfg.classes;
  ts.f = full.f;
  for (const auto& pt : plan.train_points) {
    for (int fi = 0; fi < full.f; ++fi)
      ts.features.push_back(full.at(date, pt.y, pt.x, fi));
    ts.labels.push_back(by_id.at(pt.polygon_id)->class_per_date[date]);
    ts.polygon_ids.push_back(pt.polygon_id);
    ++ts.n;
  }
  return ts;
}

/// The MRF pairwise structure of a config: delta plus the gap-scaled tau
/// pair per consecutive-date link.
struct MrfStructure {
  TransitionMatrix delta;
  std::vector<std::pair<TransitionMatrix, TransitionMatrix>> tau_pairs;
};

MrfStructure build_mrf_structure(const PipelineConfig& cfg, bool need_tau) {
  const int k = cfg.classes.size();
  TransitionMatrix delta =
      cfg.delta_file.empty()
          ? potts_matrix(k)
          : TransitionMatrix(load_compat_csv_file(cfg.delta_file, cfg.classes),
                             TransitionKind::kSpatial);

  std::vector<std::vector<double>> forward;
  if (!cfg.tau_file.empty()) {
    forward = load_compat_csv_file(cfg.tau_file, cfg.classes);
  } else if (cfg.classes == ClassSet::study_default()) {
    forward = default_study_matrix();
  } else if (need_tau) {
    throw DataError(
        "st-mrf needs mrf.tau_file: the built-in forward matrix only covers "
        "the default study classes");
  } else {
    forward = potts_matrix(k).rows();  // placeholder, weighted by beta_temp=0
  }
  const auto [tau1, tau2] = build_tau_pair(forward);

  MrfStructure s{std::move(delta), {}};
  for (std::size_t g = 0; g + 1 < cfg.dates.size(); ++g) {
    const int gap = gap_days(cfg.dates[g], cfg.dates[g + 1]);
    s.tau_pairs.emplace_back(scale_for_gap(tau1, gap, cfg.base_days),
                             scale_for_gap(tau2, gap, cfg.base_days));
  }
  return s;
}

}  // namespace

RegularizeMode parse_regularize_mode(const std::string& mode) {
  if (mode == "ivm") return RegularizeMode::kIvm;
  if (mode == "s-mrf") return RegularizeMode::kSMrf;
  if (mode == "st-mrf") return RegularizeMode::kStMrf;
  throw ConfigError("unknown regularize mode '" + mode +
                    "' (expected ivm, s-mrf, or st-mrf)");
}

const char* mode_name(RegularizeMode mode) {
  switch (mode) {
    case RegularizeMode::kIvm: return "ivm";
    case RegularizeMode::kSMrf: return "s-mrf";
    case RegularizeMode::kStMrf: return "st-mrf";
  }
  return "?";
}

void cmd_synth(const PipelineConfig& cfg) {
  cfg.validate();
  require_out_dir(cfg);
  const Scenario sc = cfg.scenario();
  const SynthTruth bundle = generate_truth(sc);
  const FeatureStack features = render_features(bundle.truth, sc);

  const fs::path out(cfg.out_dir);
  write_label_stack((out / "truth.stmr").string(), bundle.truth, cfg.dates);
  write_feature_stack((out / "features.stmr").string(), features);

  // The role column documents the base-seed split; every classification run
  // re-splits with its own sub-seed.
  const SamplePlan base_plan =
      sample_polygons(bundle.polygons, bundle.truth, cfg.per_polygon,
                      cfg.min_dist_px, cfg.seed, cfg.folds);
  auto pcsv = open_out((out / "polygons.csv").string());
  write_polygons_csv(pcsv, base_plan.polygons, cfg.classes, cfg.dates);

  std::cout << "[synth] wrote truth, features and " << base_plan.polygons.polys.size()
            << " polygons to " << cfg.out_dir << "\n";
}

void cmd_classify(const PipelineConfig& cfg) {
  cfg.validate();
  require_out_dir(cfg);
  const fs::path out(cfg.out_dir);
  require_file((out / "features.stmr").string(), "feature raster");
  require_file((out / "truth.stmr").string(), "truth raster");
  require_file((out / "polygons.csv").string(), "polygon file");

  const FeatureStack rendered = read_feature_stack((out / "features.stmr").string());
  const LabelStack truth = read_label_stack((out / "truth.stmr").string());
  PolygonSet polygons;
  {
    std::ifstream in((out / "polygons.csv").string());
    polygons = read_polygons_csv(in, cfg.classes, cfg.dates);
  }

  const FeatureStack full = assemble_classification_features(rendered, cfg);
  write_feature_stack((out / "texture.stmr").string(), full);

  const int t = rendered.t;
  for (int run = 0; run < cfg.runs; ++run) {
    const fs::path rdir(run_dir(cfg, run));
    fs::create_directories(rdir);

    const SamplePlan plan =
        sample_polygons(polygons, truth, cfg.per_polygon, cfg.min_dist_px,
                        sub_seed(cfg.seed, 9000 + run), cfg.folds);
    write_samples_csv((rdir / "samples_train.csv").string(), cfg, plan,
                      plan.train_points);
    write_samples_csv((rdir / "samples_test.csv").string(), cfg, plan,
                      plan.test_points);
    for (const auto& warn : plan.warnings)
      std::cout << "[classify] run " << run << ": " << warn << "\n";

    ProbabilityStack proba(t, rendered.h, rendered.w, cfg.classes.size());
    auto params = open_out((rdir / "ivm_params.csv").string());
    params << "date,sigma,c,cv_accuracy,imports\n";

    for (int date = 0; date < t; ++date) {
      const TrainSet train = make_train_set(cfg, full, plan, date);
      const double med = median_pairwise_distance(train);
      std::vector<double> sigma_grid;
      for (double f : cfg.sigma_factors) sigma_grid.push_back(f * med);

      const GridSearchResult gs =
          grid_search_cv(train, sigma_grid, cfg.c_grid, cfg.folds, cfg.ivm);
      const IvmModel model = train_ivm(train, gs.sigma, gs.c, cfg.ivm);
      model.save_file((rdir / ("model_t" + std::to_string(date) + ".ivm")).string());

      // Predict this date's layer.
      FeatureStack layer(1, full.h, full.w, full.f, {cfg.dates[date]});
      std::copy(full.values.begin() +
                    static_cast<std::ptrdiff_t>(date) * full.h * full.w * full.f,
                full.values.begin() +
                    static_cast<std::ptrdiff_t>(date + 1) * full.h * full.w * full.f,
                layer.values.begin());
      const ProbabilityStack p = predict_proba(model, layer, cfg.threads);
      std::copy(p.values.begin(), p.values.end(),
                proba.values.begin() + static_cast<std::ptrdiff_t>(date) *
                                           full.h * full.w * cfg.classes.size());

      params << cfg.dates[date].to_string() << ',' << fmt(gs.sigma) << ','
             << fmt(gs.c) << ',' << fmt(gs.mean_accuracy) << ',' << model.s
             << '\n';
      std::cout << "[classify] run " << run << " date "
                << cfg.dates[date].to_string() << ": sigma=" << fmt(gs.sigma)
                << " C=" << fmt(gs.c) << " cv_acc=" << fmt(gs.mean_accuracy)
                << " imports=" << model.s << "\n";
    }
    write_probability_stack((rdir / "proba.stmr").string(), proba, cfg.dates);
  }
}

void cmd_regularize(const PipelineConfig& cfg, RegularizeMode mode) {
  cfg.validate();
  require_out_dir(cfg);
  const MrfStructure structure =
      build_mrf_structure(cfg, mode == RegularizeMode::kStMrf);

  for (int run = 0; run < cfg.runs; ++run) {
    const fs::path rdir(run_dir(cfg, run));
    require_file((rdir / "proba.stmr").string(), "probability stack");
    const ProbabilityStack proba =
        read_probability_stack((rdir / "proba.stmr").string());

    LabelStack labels;
    if (mode == RegularizeMode::kIvm) {
      labels = argmax_labels(proba);
    } else {
      MrfProblem problem{prob_to_energy(proba), structure.delta,
                         structure.tau_pairs, cfg.beta_sp,
                         mode == RegularizeMode::kSMrf ? 0.0 : cfg.beta_temp};
      LbpConfig lbp = cfg.lbp;
      lbp.threads = cfg.threads;
      auto trace = open_out(
          (rdir / (std::string("lbp_trace_") + mode_name(mode) + ".csv"))
              .string());
      lbp.trace = &trace;
      const LbpResult result = lbp_layered_sweep(problem, lbp);
      labels = std::move(result.labels);
      std::cout << "[regularize] run " << run << " mode " << mode_name(mode)
                << ": " << result.iters << " iterations, "
                << (result.converged ? "converged" : "iteration limit")
                << ", energy " << fmt(total_energy(labels, problem)) << "\n";
    }
    write_label_stack(
        (rdir / (std::string("labels_") + mode_name(mode) + ".stmr")).string(),
        labels, cfg.dates);
  }
}

void cmd_assess(const PipelineConfig& cfg) {
  cfg.validate();
  require_out_dir(cfg);
  const fs::path out(cfg.out_dir);
  const fs::path adir = out / "assess";
  fs::create_directories(adir);
  const int t = static_cast<int>(cfg.dates.size());
  const double total_area =
      cfg.total_area > 0.0 ? cfg.total_area
                           : static_cast<double>(cfg.height) * cfg.width;
  const int burnt_idx = cfg.classes.index_of("burnt_pasture");

  const RegularizeMode modes[] = {RegularizeMode::kIvm, RegularizeMode::kSMrf,
                                  RegularizeMode::kStMrf};

  auto reports_csv = open_out((adir / "reports.csv").string());
  reports_csv << "run,date,method,metric,class,value,ci\n";

  // reports[method][date][run]
  std::map<std::string, std::vector<std::vector<AccuracyReport>>> collected;
  std::map<std::string, std::vector<std::vector<Metric>>> burnt_area;
  for (const auto m : modes) {
    collected[mode_name(m)].resize(t);
    burnt_area[mode_name(m)].resize(t);
  }

  for (int run = 0; run < cfg.runs; ++run) {
    const fs::path rdir(run_dir(cfg, run));
    require_file((rdir / "samples_test.csv").string(), "test samples");
    const RunSamples test = read_samples_csv(
        (rdir / "samples_test.csv").string(), cfg);
    if (test.points.empty())
      throw DataError("test sample set of run " + std::to_string(run) +
                      " is empty");

    fs::create_directories(adir / rdir.filename());
    for (const auto m : modes) {
      const std::string name = mode_name(m);
      const std::string lpath =
          (rdir / ("labels_" + name + ".stmr")).string();
      require_file(lpath, "label stack");
      const LabelStack labels = read_label_stack(lpath);

      for (int date = 0; date < t; ++date) {
        std::vector<RefSample> refs;
        refs.reserve(test.points.size());
        for (std::size_t i = 0; i < test.points.size(); ++i)
          refs.push_back({test.points[i].y, test.points[i].x,
                          test.class_per_date[i][date]});
        std::vector<std::string> notices;
        const ErrorMatrix em = drop_unsampled_strata(
            error_matrix(labels, date, refs, cfg.classes), &notices);
        for (const auto& n : notices)
          std::cout << "[assess] run " << run << " date "
                    << cfg.dates[date].to_string() << " " << name << ": " << n
                    << "\n";
        {
          auto emf = open_out((adir / rdir.filename() /
                               ("errmat_" + cfg.dates[date].to_string() + "_" +
                                name + ".csv"))
                                  .string());
          write_error_matrix_csv(emf, em);
        }
        const AccuracyReport rep = area_adjusted_metrics(em);
        collected[name][date].push_back(rep);
        if (burnt_idx >= 0)
          burnt_area[name][date].push_back(
              area_estimates(em, total_area)[burnt_idx]);

        std::ostringstream rows;
        write_report_csv(rows, cfg.dates[date].to_string(), name, cfg.classes,
                         rep);
        std::istringstream rows_in(rows.str());
        for (std::string row; std::getline(rows_in, row);)
          reports_csv << run << ',' << row << '\n';
      }
    }
  }

  // Multi-run averages.
  auto averages = open_out((adir / "averages.csv").string());
  averages << "date,method,metric,class,value,ci,run_sd\n";
  for (const auto m : modes) {
    const std::string name = mode_name(m);
    for (int date = 0; date < t; ++date) {
      const MultiRunSummary s = multi_run_average(collected[name][date]);
      averages << cfg.dates[date].to_string() << ',' << name << ",oa,all,"
               << fmt(s.mean.oa.value) << ',' << fmt(s.mean.oa.ci) << ','
               << fmt(s.oa_sd) << '\n';
      for (int c = 0; c < s.mean.k; ++c) {
        if (s.mean.ua[c])
          averages << cfg.dates[date].to_string() << ',' << name << ",ua,"
                   << cfg.classes.name(c) << ',' << fmt(s.mean.ua[c]->value)
                   << ',' << fmt(s.mean.ua[c]->ci) << ','
                   << fmt(s.ua_sd[c].value_or(0.0)) << '\n';
        if (s.mean.pa[c])
          averages << cfg.dates[date].to_string() << ',' << name << ",pa,"
                   << cfg.classes.name(c) << ',' << fmt(s.mean.pa[c]->value)
                   << ',' << fmt(s.mean.pa[c]->ci) << ','
                   << fmt(s.pa_sd[c].value_or(0.0)) << '\n';
        averages << cfg.dates[date].to_string() << ',' << name
                 << ",area_proportion," << cfg.classes.name(c) << ','
                 << fmt(s.mean.ref_proportion[c].value) << ','
                 << fmt(s.mean.ref_proportion[c].ci) << ",0\n";
      }
    }
  }

  // Burnt-area development over the season, averaged over runs.
  if (burnt_idx >= 0) {
    auto series = open_out((adir / "burnt_area.csv").string());
    series << "date,method,area,ci\n";
    for (const auto m : modes) {
      const std::string name = mode_name(m);
      for (int date = 0; date < t; ++date) {
        double area = 0.0, ci = 0.0;
        const auto& v = burnt_area[name][date];
        for (const auto& e : v) {
          area += e.value;
          ci += e.ci;
        }
        area /= v.size();
        ci /= v.size();
        series << cfg.dates[date].to_string() << ',' << name << ','
               << fmt(area) << ',' << fmt(ci) << '\n';
      }
    }
  }

  // Difference maps of the first run: st-MRF against the raw IVM map.
  {
    const fs::path rdir(run_dir(cfg, 0));
    const LabelStack ivm =
        read_label_stack((rdir / "labels_ivm.stmr").string());
    const LabelStack st =
        read_label_stack((rdir / "labels_st-mrf.stmr").string());
    for (int date = 0; date < t; ++date) {
      const AgreementMap am = agreement_map(ivm, date, st, date);
      RasterData d;
      d.t = 1;
      d.h = am.h;
      d.w = am.w;
      d.c = 2;
      d.dtype = RasterDtype::kU16;
      d.u16.resize(static_cast<std::size_t>(am.h) * am.w * 2);
      for (std::size_t i = 0; i < am.agree.size(); ++i) {
        d.u16[i * 2] = am.agree[i];
        d.u16[i * 2 + 1] = static_cast<std::uint16_t>(am.second_class[i]);
      }
      write_raster(
          (adir / ("diff_" + cfg.dates[date].to_string() + ".stmr")).string(),
          d);
    }
  }
  std::cout << "[assess] wrote reports, averages, burnt-area series and "
               "difference maps to "
            << adir.string() << "\n";
}

}  // namespace stmrf
