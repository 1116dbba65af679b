#include "stmrf.h"

#include <exception>
#include <string>

#include "stmrf/config.hpp"
#include "stmrf/pipeline.hpp"
#include "stmrf/raster_io.hpp"

namespace {

thread_local std::string g_last_error;

stmrf_status note_error(const std::exception& e, stmrf_status code) {
  g_last_error = e.what();
  return code;
}

template <typename Fn>
stmrf_status guarded(Fn&& fn) {
  try {
    fn();
    return STMRF_OK;
  } catch (const stmrf::ConfigError& e) {
    return note_error(e, STMRF_ERR_CONFIG);
  } catch (const stmrf::DataError& e) {
    return note_error(e, STMRF_ERR_DATA);
  } catch (const stmrf::NumericError& e) {
    return note_error(e, STMRF_ERR_NUMERIC);
  } catch (const std::exception& e) {
    return note_error(e, STMRF_ERR_NUMERIC);
  }
}

}  // namespace

struct stmrf_config {
  stmrf::PipelineConfig cfg;
};

struct stmrf_raster {
  stmrf::RasterData data;
};

extern "C" {

const char* stmrf_version(void) { return "1.0.0"; }

const char* stmrf_last_error(void) { return g_last_error.c_str(); }

stmrf_status stmrf_config_load(const char* path, stmrf_config** out) {
  if (!path || !out) {
    g_last_error = "stmrf_config_load: null argument";
    return STMRF_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = new stmrf_config{stmrf::PipelineConfig::load(path)};
    *out = handle;
  });
}

stmrf_status stmrf_config_default(stmrf_config** out) {
  if (!out) {
    g_last_error = "stmrf_config_default: null argument";
    return STMRF_ERR_CONFIG;
  }
  *out = new stmrf_config{};
  return STMRF_OK;
}

stmrf_status stmrf_config_set(stmrf_config* cfg, const char* key,
                              const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "stmrf_config_set: null argument";
    return STMRF_ERR_CONFIG;
  }
  return guarded([&] { cfg->cfg.set(key, value); });
}

void stmrf_config_free(stmrf_config* cfg) { delete cfg; }

stmrf_status stmrf_run_synth(const stmrf_config* cfg) {
  if (!cfg) {
    g_last_error = "stmrf_run_synth: null config";
    return STMRF_ERR_CONFIG;
  }
  return guarded([&] { stmrf::cmd_synth(cfg->cfg); });
}

stmrf_status stmrf_run_classify(const stmrf_config* cfg) {
  if (!cfg) {
    g_last_error = "stmrf_run_classify: null config";
    return STMRF_ERR_CONFIG;
  }
  return guarded([&] { stmrf::cmd_classify(cfg->cfg); });
}

stmrf_status stmrf_run_regularize(const stmrf_config* cfg, const char* mode) {
  if (!cfg || !mode) {
    g_last_error = "stmrf_run_regularize: null argument";
    return STMRF_ERR_CONFIG;
  }
  return guarded([&] {
    stmrf::cmd_regularize(cfg->cfg, stmrf::parse_regularize_mode(mode));
  });
}

stmrf_status stmrf_run_assess(const stmrf_config* cfg) {
  if (!cfg) {
    g_last_error = "stmrf_run_assess: null config";
    return STMRF_ERR_CONFIG;
  }
  return guarded([&] { stmrf::cmd_assess(cfg->cfg); });
}

stmrf_status stmrf_raster_open(const char* path, stmrf_raster** out) {
  if (!path || !out) {
    g_last_error = "stmrf_raster_open: null argument";
    return STMRF_ERR_DATA;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = new stmrf_raster{stmrf::read_raster(path)};
    *out = handle;
  });
}

void stmrf_raster_close(stmrf_raster* raster) { delete raster; }

void stmrf_raster_dims(const stmrf_raster* raster, uint32_t* t, uint32_t* h,
                       uint32_t* w, uint32_t* c) {
  if (!raster) return;
  if (t) *t = static_cast<uint32_t>(raster->data.t);
  if (h) *h = static_cast<uint32_t>(raster->data.h);
  if (w) *w = static_cast<uint32_t>(raster->data.w);
  if (c) *c = static_cast<uint32_t>(raster->data.c);
}

int stmrf_raster_dtype(const stmrf_raster* raster) {
  return raster ? static_cast<int>(raster->data.dtype) : 0;
}

size_t stmrf_raster_size(const stmrf_raster* raster) {
  if (!raster) return 0;
  return static_cast<size_t>(raster->data.t) * raster->data.h *
         raster->data.w * raster->data.c;
}

stmrf_status stmrf_raster_read_f64(const stmrf_raster* raster, double* buf,
                                   size_t buf_len) {
  if (!raster || !buf) {
    g_last_error = "stmrf_raster_read_f64: null argument";
    return STMRF_ERR_DATA;
  }
  const size_t n = stmrf_raster_size(raster);
  if (buf_len < n) {
    g_last_error = "stmrf_raster_read_f64: buffer holds " +
                   std::to_string(buf_len) + " values, raster has " +
                   std::to_string(n);
    return STMRF_ERR_DATA;
  }
  if (raster->data.dtype == stmrf::RasterDtype::kU16) {
    for (size_t i = 0; i < n; ++i) buf[i] = raster->data.u16[i];
  } else {
    for (size_t i = 0; i < n; ++i) buf[i] = raster->data.f64[i];
  }
  return STMRF_OK;
}

}  // extern "C"
