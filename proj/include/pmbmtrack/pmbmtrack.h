#ifndef PMBMTRACK_H
#define PMBMTRACK_H

/* C interface to the pmbmtrack multi-object tracking engine.
 *
 * All functions return a pmbmtrack_status; on any failure the per-thread
 * message from pmbmtrack_last_error() describes what went wrong. Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with pmbmtrack_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PMBMTRACK_API __declspec(dllexport)
#else
#define PMBMTRACK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pmbmtrack_status {
    PMBMTRACK_OK = 0,
    PMBMTRACK_INVALID_ARGUMENT = 1, /* bad parameter or configuration value */
    PMBMTRACK_PARSE_ERROR = 2,      /* malformed input file or JSON document */
    PMBMTRACK_IO_ERROR = 3,         /* file could not be read or written */
    PMBMTRACK_NUMERICAL_ERROR = 4,  /* degenerate linear algebra */
    PMBMTRACK_INFEASIBLE = 5,       /* no feasible assignment exists */
    PMBMTRACK_UNKNOWN = 6
} pmbmtrack_status;

/* Library version as "major.minor.patch". Storage is static; do not free. */
PMBMTRACK_API const char* pmbmtrack_version(void);

/* Message describing this thread's most recent failure ("" after success).
 * Storage is thread-local; valid until the next call on the same thread. */
PMBMTRACK_API const char* pmbmtrack_last_error(void);

PMBMTRACK_API void pmbmtrack_string_free(char* text);

/* ------------------------------------------------------------------ */
/* Batch pipeline                                                      */

typedef struct pmbmtrack_pipeline_stats {
    int64_t frames_processed;
    int64_t records_emitted;
    double mean_frame_seconds; /* filter work only, averaged over frames */
    int has_metrics;           /* 1 when ground truth was evaluated */
    /* Combined-over-classes CLEAR-MOT summary; valid when has_metrics. */
    double mota;
    double motp;
    int64_t false_positives;
    int64_t misses;
    int64_t id_switches;
    int64_t fragmentations;
    int64_t gt_count;
} pmbmtrack_pipeline_stats;

/* Track a detection file end to end and write track records to
 * output_path. Optional (nullable) arguments: config_path (flat JSON
 * key-value document; defaults otherwise), gt_path (enables evaluation),
 * report_path (writes the report table there and JSON at "<path>.json"),
 * poses_path (per-frame SE(2) ego poses applied at ingestion), stats, and
 * report_text (rendered report; free with pmbmtrack_string_free). */
PMBMTRACK_API pmbmtrack_status pmbmtrack_run_pipeline(
    const char* detections_path, const char* config_path, const char* output_path,
    const char* gt_path, const char* report_path, const char* poses_path,
    pmbmtrack_pipeline_stats* stats, char** report_text);

/* Generate a synthetic scenario. config_path is a flat JSON document
 * (nullable for defaults); detections and ground truth are written as
 * JSON-lines record files. Fully determined by the configured seed. */
PMBMTRACK_API pmbmtrack_status pmbmtrack_simulate(const char* config_path,
                                                  const char* out_detections_path,
                                                  const char* out_gt_path);

/* Evaluate a track file against ground truth. radii_json maps class name
 * to match radius in metres, e.g. {"vehicle": 2.0, "pedestrian": 1.0}.
 * Optional: report_path (writes table + JSON), stats (combined summary),
 * report_text (rendered table; free with pmbmtrack_string_free). */
PMBMTRACK_API pmbmtrack_status pmbmtrack_evaluate(const char* gt_path, const char* tracks_path,
                                                  const char* radii_json,
                                                  const char* report_path,
                                                  pmbmtrack_pipeline_stats* stats,
                                                  char** report_text);

/* ------------------------------------------------------------------ */
/* Streaming filter                                                    */

typedef struct pmbmtrack_filter pmbmtrack_filter_t;

typedef struct pmbmtrack_measurement {
    double x;     /* metres, global frame */
    double y;
    double score; /* detection confidence in [0, 1] */
} pmbmtrack_measurement;

typedef struct pmbmtrack_estimate {
    int64_t track_id;
    double x;
    double y;
    double vx;
    double vy;
    double existence;
} pmbmtrack_estimate;

/* Create a filter from the same flat JSON configuration document the
 * pipeline accepts (NULL or "" for defaults). */
PMBMTRACK_API pmbmtrack_status pmbmtrack_filter_create(const char* config_json,
                                                       pmbmtrack_filter_t** out_filter);

PMBMTRACK_API void pmbmtrack_filter_destroy(pmbmtrack_filter_t* filter);

/* Advance one frame: predict dt seconds, update with n measurements,
 * reduce, and stash the extracted estimates (readable until the next
 * step). n_estimates receives the number now available. */
PMBMTRACK_API pmbmtrack_status pmbmtrack_filter_step(pmbmtrack_filter_t* filter, double dt,
                                                     const pmbmtrack_measurement* measurements,
                                                     size_t n_measurements,
                                                     size_t* n_estimates);

/* Copy up to capacity stashed estimates; n_written receives the count. */
PMBMTRACK_API pmbmtrack_status pmbmtrack_filter_estimates(const pmbmtrack_filter_t* filter,
                                                          pmbmtrack_estimate* out,
                                                          size_t capacity, size_t* n_written);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PMBMTRACK_H */
