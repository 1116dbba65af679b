/* C interface of the spatio-temporal MRF mapping library.
 *
 * All entry points return stmrf_status; anything but STMRF_OK left a
 * thread-local message retrievable through stmrf_last_error(). Handles are
 * opaque and must be released with their matching *_free/*_close call.
 */
#ifndef STMRF_H
#define STMRF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stmrf_status {
  STMRF_OK = 0,
  STMRF_ERR_CONFIG = 2, /* bad configuration file, key, or value */
  STMRF_ERR_DATA = 3,   /* missing or malformed inputs */
  STMRF_ERR_NUMERIC = 4 /* numerical failure during optimization */
} stmrf_status;

typedef struct stmrf_config stmrf_config;
typedef struct stmrf_raster stmrf_raster;

const char* stmrf_version(void);

/* Message of the most recent failure on this thread; never NULL. */
const char* stmrf_last_error(void);

/* ---- configuration ---------------------------------------------------- */

stmrf_status stmrf_config_load(const char* path, stmrf_config** out);
stmrf_status stmrf_config_default(stmrf_config** out);
/* Applies one "section.key" assignment on top of the loaded file. */
stmrf_status stmrf_config_set(stmrf_config* cfg, const char* key,
                              const char* value);
void stmrf_config_free(stmrf_config* cfg);

/* ---- pipeline stages --------------------------------------------------- */

stmrf_status stmrf_run_synth(const stmrf_config* cfg);
stmrf_status stmrf_run_classify(const stmrf_config* cfg);
/* mode: "ivm", "s-mrf", or "st-mrf". */
stmrf_status stmrf_run_regularize(const stmrf_config* cfg, const char* mode);
stmrf_status stmrf_run_assess(const stmrf_config* cfg);

/* ---- raster access ------------------------------------------------------
 * Readers for the flat STMR format so integrations need not parse it
 * themselves. Dtype codes: 1 = f32, 2 = f64, 3 = u16. */

stmrf_status stmrf_raster_open(const char* path, stmrf_raster** out);
void stmrf_raster_close(stmrf_raster* raster);
void stmrf_raster_dims(const stmrf_raster* raster, uint32_t* t, uint32_t* h,
                       uint32_t* w, uint32_t* c);
int stmrf_raster_dtype(const stmrf_raster* raster);
size_t stmrf_raster_size(const stmrf_raster* raster);
/* Copies the payload widened to double; buf must hold stmrf_raster_size
 * values. */
stmrf_status stmrf_raster_read_f64(const stmrf_raster* raster, double* buf,
                                   size_t buf_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* STMRF_H */
