#ifndef DFF_H
#define DFF_H

/*
 * C API for the discriminative-feature-feedback simulator.
 *
 * All functions return a dff_status (DFF_OK on success); on failure,
 * dff_last_error() describes the problem for the calling thread. Objects
 * are opaque handles owned by the library; strings returned through char**
 * out-parameters are malloc'd by the library and must be released with
 * dff_string_free().
 *
 * Instances, configs, reports and transcripts are exchanged as JSON (one
 * JSON object per transcript line).
 */

#include <stdint.h>

#if defined(_WIN32)
#define DFF_API __declspec(dllexport)
#else
#define DFF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int dff_status;

enum {
  DFF_OK = 0,
  DFF_ERR_INVALID_ARGUMENT = 1,
  DFF_ERR_PARSE = 2,
  DFF_ERR_INFEASIBLE = 3,
  DFF_ERR_SIZE_LIMIT = 4,
  DFF_ERR_BUDGET_EXCEEDED = 5,
  DFF_ERR_PROTOCOL = 6,
  DFF_ERR_IO = 7,
  DFF_ERR_INTERNAL = 8
};

typedef struct dff_instance dff_instance;
typedef struct dff_result dff_result;

DFF_API const char* dff_version(void);

/* Message for the most recent failure on this thread. */
DFF_API const char* dff_last_error(void);

DFF_API void dff_string_free(char* str);
DFF_API void dff_instance_free(dff_instance* instance);
DFF_API void dff_result_free(dff_result* result);

/* ------------------------------------------------------------------ */
/* Instances                                                           */

DFF_API dff_status dff_instance_from_json(const char* json,
                                          dff_instance** out);
DFF_API dff_status dff_instance_to_json(const dff_instance* instance,
                                        char** out);

/* params: {"m","d","labels","k","s","examplesPerComponent","seed"} */
DFF_API dff_status dff_instance_generate(const char* params_json,
                                         dff_instance** out);

DFF_API dff_status dff_instance_hypercube(uint32_t d, dff_instance** out);

/* Validation report JSON: {"ok": bool, "violations": [...]} */
DFF_API dff_status dff_instance_validate(const dff_instance* instance,
                                         char** report_json);

/* Exception-free expansion of the instance's representation. */
DFF_API dff_status dff_instance_expand(const dff_instance* instance,
                                       dff_instance** out);

/* Smallest exception-free representation size using coordinate literals.
 * Writes the size to *out_size, or -1 when it exceeds max_size. */
DFF_API dff_status dff_instance_min_size(const dff_instance* instance,
                                         uint32_t max_size,
                                         uint64_t work_budget,
                                         int32_t* out_size);

/* The hidden-assignment hard instance plus its stream:
 * *stream_json gets {"order": [...]} with the init example first. */
DFF_API dff_status dff_instance_lower_bound(uint32_t m, uint64_t seed,
                                            dff_instance** out,
                                            char** stream_json);

/* ------------------------------------------------------------------ */
/* Trials and sweeps                                                   */

/* Runs one trial described by a config JSON object (sections: instance,
 * teacher, learner, stream). seed_override < 0 keeps the config's seed. */
DFF_API dff_status dff_trial_run(const char* config_json,
                                 int64_t seed_override, dff_result** out);

DFF_API dff_status dff_result_report_json(const dff_result* result,
                                          char** out);
DFF_API dff_status dff_result_transcript_jsonl(const dff_result* result,
                                               char** out);

/* Runs every (config, seed) trial and writes metrics.csv, aggregate.json
 * (and per-trial transcripts when requested by output.formats) under
 * out_dir. *summary_json gets the aggregate report. */
DFF_API dff_status dff_sweep_run(const char* config_json, const char* out_dir,
                                 char** summary_json);

/* Re-evaluates the closed-form mistake/rule bounds recorded in a trial
 * report JSON; *verdict_json gets per-bound pass/fail with margins. */
DFF_API dff_status dff_verify_bounds(const char* report_json,
                                     char** verdict_json);

#ifdef __cplusplus
}
#endif

#endif /* DFF_H */
