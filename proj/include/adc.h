#ifndef ADC_H
#define ADC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. */
#define ADC_OK 0
#define ADC_USAGE_ERROR 1
#define ADC_DATA_ERROR 2
#define ADC_PRECONDITION_ERROR 3
#define ADC_INTERNAL_ERROR 4

/* An open dataset workspace. Thread-compatible: share one handle across
 * threads only for read operations. */
typedef struct adc_workspace adc_workspace;

const char* adc_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* adc_last_error(void);

/* Releases any buffer an adc_* call handed out through an out-parameter. */
void adc_free(char* buf);

/* Caps the worker pool; n <= 0 restores hardware concurrency. */
int adc_set_threads(int n);

int adc_workspace_open(const char* root, adc_workspace** out);
int adc_workspace_create(const char* root, const char* grid_json,
                         adc_workspace** out);
void adc_workspace_close(adc_workspace* ws);

/* Grid of the open workspace as a JSON object. */
int adc_grid_info(adc_workspace* ws, char** json_out);

/* Generates a complete synthetic dataset at root from a config document,
 * then opens it. The seed argument overrides the config's seed when >= 0. */
int adc_synth(const char* config_json, int64_t seed, const char* root,
              adc_workspace** out);

/* Ingests the products listed in a config document (band rasters are tiled
 * files). Returns a JSON report of ingested product ids. */
int adc_ingest(adc_workspace* ws, const char* config_json, char** report_out);

/* Rebuilds the label raster, optionally replacing the parcel set from a
 * feature-collection file first. Returns the number of labeled parcels. */
int adc_rasterize(adc_workspace* ws, const char* parcels_path,
                  int64_t* n_parcels_out);

/* Zonal statistics over [from, to) as CSV. The request document carries
 * statistic, period, bands, buffers and cloud settings. */
int adc_zonal_stats(adc_workspace* ws, const char* request_json,
                    const char* from_date, const char* to_date, char** csv_out);

/* Grouped-versus-serial wall-time benchmark on generated datasets. */
int adc_benchmark(const char* config_json, char** csv_out);

/* Per-parcel band time series through the preparation pipeline, as CSV. */
int adc_sits(adc_workspace* ws, int64_t parcel_id, const char* band,
             const char* pipeline_json, const char* from_date,
             const char* to_date, char** csv_out);

/* Feature space at pixel or parcel level from a spec document, as CSV. */
int adc_features(adc_workspace* ws, const char* spec_json, char** csv_out);

/* Predicate query; result table as CSV. */
int adc_query(adc_workspace* ws, const char* spec_json, char** csv_out);

/* Canned scenario (query1|query2|query3). Artifacts land under out_dir;
 * the written paths come back one per line. */
int adc_scenario(adc_workspace* ws, const char* name, const char* out_dir,
                 char** files_out);

/* Animation frames under out_dir per an animation spec document. */
int adc_animate(adc_workspace* ws, const char* spec_json, const char* out_dir,
                char** files_out);

/* Hex checksum of a file's contents (same digest the run manifests use). */
int adc_checksum_file(const char* path, char** hex_out);

#ifdef __cplusplus
}
#endif

#endif /* ADC_H */
