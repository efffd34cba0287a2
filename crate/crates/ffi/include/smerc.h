#ifndef SMERC_H
#define SMERC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SmercStatus {
  SMERC_STATUS_OK = 0,
  SMERC_STATUS_NULL_POINTER = 1,
  SMERC_STATUS_INVALID_UTF8 = 2,
  SMERC_STATUS_OUT_OF_RANGE = 3,
  SMERC_STATUS_IO = 4,
  SMERC_STATUS_PARSE = 5,
  SMERC_STATUS_CONFIG = 6,
  SMERC_STATUS_NO_LABELS = 7,
  SMERC_STATUS_NO_DECAY = 8,
  SMERC_STATUS_INSUFFICIENT_DATA = 9,
  SMERC_STATUS_INTERNAL = 10,
  SMERC_STATUS_PANIC = 11,
} SmercStatus;

// Clustering result handle.
typedef struct SmercClusterRun SmercClusterRun;

// Run configuration handle.
typedef struct SmercConfig SmercConfig;

// Loaded corpus handle.
typedef struct SmercCorpus SmercCorpus;

typedef struct SmercEvalResult {
  double precision;
  double recall;
  double f1;
  // NaN when no surviving cluster has a labeled member.
  double quality_mean;
  size_t clusters_linked;
  size_t clusters_total;
  size_t events_detected;
  size_t events_missed;
  bool precision_defined;
  bool recall_defined;
  bool f1_defined;
} SmercEvalResult;

typedef struct SmercDecayFit {
  double slope;
  double intercept;
  double r_squared;
  size_t buckets_used;
  size_t related_pairs;
  size_t unrelated_pairs;
  // `-1 / slope`, or NaN when `has_recommendation` is false.
  double recommended_t_p;
  bool has_recommendation;
} SmercDecayFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *smerc_version(void);

// Message for the last failed call on this thread, or NULL. Valid until
// the next library call on the same thread.
const char *smerc_last_error_message(void);

// New configuration holding the built-in defaults.
struct SmercConfig *smerc_config_new(void);

// Sets one configuration key from its text form, as in a config file.
// The whole configuration is validated before it is accepted.
//
// # Safety
// `config` must come from `smerc_config_new`; `key` and `value` must be
// NUL-terminated strings.
enum SmercStatus smerc_config_set(struct SmercConfig *config, const char *key, const char *value);

// # Safety
// `config` must come from `smerc_config_new` or be NULL.
void smerc_config_free(struct SmercConfig *config);

// Loads a JSON Lines corpus from `path`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SmercStatus smerc_corpus_load(const char *path, struct SmercCorpus **out);

// Parses a JSON Lines corpus held in memory.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum SmercStatus smerc_corpus_from_jsonl(const char *text, struct SmercCorpus **out);

// Number of tweets, or 0 for NULL.
//
// # Safety
// `corpus` must be a live corpus handle or NULL.
size_t smerc_corpus_len(const struct SmercCorpus *corpus);

// # Safety
// `corpus` must be a live corpus handle or NULL.
void smerc_corpus_free(struct SmercCorpus *corpus);

// Runs the full clustering pipeline. `config` may be NULL for defaults.
//
// # Safety
// Handles must be live; `out` must be a valid pointer.
enum SmercStatus smerc_cluster(const struct SmercCorpus *corpus,
                               const struct SmercConfig *config,
                               struct SmercClusterRun **out);

// Clusters surviving the cohesion filter.
//
// # Safety
// `run` must be a live handle or NULL.
size_t smerc_run_num_clusters(const struct SmercClusterRun *run);

// Clusters produced by affinity propagation before filtering.
//
// # Safety
// `run` must be a live handle or NULL.
size_t smerc_run_clusters_before(const struct SmercClusterRun *run);

// Member count of surviving cluster `k`, or 0 when out of range.
//
// # Safety
// `run` must be a live handle or NULL.
size_t smerc_run_cluster_size(const struct SmercClusterRun *run, size_t k);

// Average internal affinity of surviving cluster `k`, NaN when out of range.
//
// # Safety
// `run` must be a live handle or NULL.
double smerc_run_cluster_affinity(const struct SmercClusterRun *run, size_t k);

// Exemplar tweet id of cluster `k`, or NULL when out of range.
//
// # Safety
// `run` must be a live handle or NULL.
const char *smerc_run_cluster_exemplar_id(const struct SmercClusterRun *run, size_t k);

// Tweet id of member `j` of cluster `k`, or NULL when out of range.
//
// # Safety
// `run` must be a live handle or NULL.
const char *smerc_run_cluster_member_id(const struct SmercClusterRun *run, size_t k, size_t j);

// Writes `clusters.csv`, `summary.json` and `manifest.json` into `dir`.
//
// # Safety
// Handles must be live; `dir` must be a NUL-terminated string.
enum SmercStatus smerc_run_write_report(const struct SmercClusterRun *run,
                                        const struct SmercCorpus *corpus,
                                        const char *dir);

// Scores the run's surviving clusters against the corpus labels.
//
// # Safety
// Handles must be live; `out` must be a valid pointer.
enum SmercStatus smerc_run_evaluate(const struct SmercClusterRun *run,
                                    const struct SmercCorpus *corpus,
                                    struct SmercEvalResult *out);

// # Safety
// `run` must be a live handle or NULL.
void smerc_run_free(struct SmercClusterRun *run);

// Fits the log-linear relatedness decay of a labeled corpus. A flat or
// rising curve is not an error: `has_recommendation` is then false.
//
// # Safety
// Handles must be live (`config` may be NULL); `out` must be valid.
enum SmercStatus smerc_analyze_gaps(const struct SmercCorpus *corpus,
                                    const struct SmercConfig *config,
                                    struct SmercDecayFit *out);

// `T_p = -1 / slope`; fails with `NO_DECAY` unless the slope is negative.
//
// # Safety
// `out` must be a valid pointer.
enum SmercStatus smerc_calibrate_tp(double slope, double *out);

// Precision, recall and F1 from raw link counts.
//
// # Safety
// `out` must be a valid pointer.
enum SmercStatus smerc_precision_recall(size_t clusters_linked,
                                        size_t clusters_total,
                                        size_t events_detected,
                                        size_t events_missed,
                                        struct SmercEvalResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMERC_H */
