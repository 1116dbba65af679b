#pragma once

#include <string>

#include "stmrf/config.hpp"

namespace stmrf {

enum class RegularizeMode { kIvm, kSMrf, kStMrf };

/// "ivm", "s-mrf" or "st-mrf"; anything else is a ConfigError.
RegularizeMode parse_regularize_mode(const std::string& mode);
const char* mode_name(RegularizeMode mode);

/// Stage (i)+(ii) surrogate: synthetic truth, rendered features and
/// reference polygons written into the output directory.
void cmd_synth(const PipelineConfig& cfg);

/// Per-run, per-date sampling, grid search, IVM training and prediction;
/// writes probability stacks, sampled points, and serialized models.
void cmd_classify(const PipelineConfig& cfg);

/// Label maps for one method: plain argmax, spatial-only MRF, or the full
/// spatio-temporal model, per run.
void cmd_regularize(const PipelineConfig& cfg, RegularizeMode mode);

/// Error matrices, accuracy reports with confidence intervals, multi-run
/// averages, burnt-area series, and difference maps.
void cmd_assess(const PipelineConfig& cfg);

}  // namespace stmrf
