// Command-line front end of the mapping pipeline. Talks to the shared
// library exclusively through its C interface.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "stmrf.h"

namespace {

struct CommonOpts {
  std::string config_path;
  long long seed = -1;
  int threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Pipeline configuration file")
      ->required();
  cmd->add_option("--seed", opts.seed, "Override runs.seed");
  cmd->add_option("--threads", opts.threads,
                  "Worker threads (does not change results)");
  cmd->add_option("--out", opts.out_dir, "Override paths.out");
}

int fail(stmrf_status status) {
  std::fprintf(stderr, "error: %s\n", stmrf_last_error());
  return static_cast<int>(status);
}

stmrf_config* load_config(const CommonOpts& opts, int& err) {
  stmrf_config* cfg = nullptr;
  stmrf_status st = stmrf_config_load(opts.config_path.c_str(), &cfg);
  if (st != STMRF_OK) {
    err = fail(st);
    return nullptr;
  }
  auto apply = [&](const char* key, const std::string& value) {
    if (st == STMRF_OK)
      st = stmrf_config_set(cfg, key, value.c_str());
  };
  if (opts.seed >= 0) apply("runs.seed", std::to_string(opts.seed));
  if (opts.threads > 0) apply("runtime.threads", std::to_string(opts.threads));
  if (!opts.out_dir.empty()) apply("paths.out", opts.out_dir);
  if (st != STMRF_OK) {
    err = fail(st);
    stmrf_config_free(cfg);
    return nullptr;
  }
  err = 0;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-temporal land-cover mapping: IVM classification with "
               "spatio-temporal MRF regularization"};
  app.require_subcommand(1);

  CommonOpts synth_opts, classify_opts, regularize_opts, assess_opts;
  std::string mode = "st-mrf";

  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic scene");
  add_common(synth, synth_opts);
  CLI::App* classify =
      app.add_subcommand("classify", "Sample, train IVM, and predict per date");
  add_common(classify, classify_opts);
  CLI::App* regularize =
      app.add_subcommand("regularize", "Produce label maps for one method");
  add_common(regularize, regularize_opts);
  regularize->add_option("--mode", mode, "ivm, s-mrf, or st-mrf")
      ->check(CLI::IsMember({"ivm", "s-mrf", "st-mrf"}));
  CLI::App* assess =
      app.add_subcommand("assess", "Accuracy reports and area estimates");
  add_common(assess, assess_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : STMRF_ERR_CONFIG;
  }

  int err = 0;
  stmrf_config* cfg = nullptr;
  stmrf_status st = STMRF_OK;
  if (synth->parsed()) {
    cfg = load_config(synth_opts, err);
    if (cfg) st = stmrf_run_synth(cfg);
  } else if (classify->parsed()) {
    cfg = load_config(classify_opts, err);
    if (cfg) st = stmrf_run_classify(cfg);
  } else if (regularize->parsed()) {
    cfg = load_config(regularize_opts, err);
    if (cfg) st = stmrf_run_regularize(cfg, mode.c_str());
  } else if (assess->parsed()) {
    cfg = load_config(assess_opts, err);
    if (cfg) st = stmrf_run_assess(cfg);
  }
  if (!cfg) return err;
  stmrf_config_free(cfg);
  return st == STMRF_OK ? 0 : fail(st);
}
