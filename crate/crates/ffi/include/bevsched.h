#ifndef BEVSCHED_H
#define BEVSCHED_H

#include <stdint.h>
#include <stddef.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_UTF8 = 2,
  BS_STATUS_CONFIG = 3,
  BS_STATUS_TOPOLOGY = 4,
  BS_STATUS_DIVERGENCE = 5,
  BS_STATUS_OUT_OF_RANGE = 6,
  BS_STATUS_INFEASIBLE = 7,
  BS_STATUS_ACCOUNTING = 8,
  BS_STATUS_IO = 9,
  BS_STATUS_SAMPLING = 10,
  BS_STATUS_PANIC = 11,
} BsStatus;

/**
 * Scenario configuration.
 */
typedef struct BsConfig BsConfig;

/**
 * Result of one scenario run.
 */
typedef struct BsRun BsRun;

/**
 * Headline figures of a run.
 */
typedef struct BsSummary {
  double rho;
  size_t front_size;
  double f1_selected;
  double f2_selected;
  double lf;
  double p2v;
  double pc;
  double carbon_revenue;
  double degradation_total;
  double v2g_kwh;
  double min_voltage;
  size_t participants;
  size_t rejected;
} BsSummary;

/**
 * Library version as a static NUL-terminated string.
 */
const char *bs_version(void);

/**
 * Copy the last error message of this thread into `buf`, truncated and
 * NUL-terminated. Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t bs_last_error(char *buf, size_t len);

/**
 * Built-in defaults. Free with [`bs_config_free`].
 */
struct BsConfig *bs_config_default(void);

/**
 * Parse a TOML configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BsStatus bs_config_from_toml(const char *toml, struct BsConfig **out);

/**
 * Load a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BsStatus bs_config_load(const char *path, struct BsConfig **out);

/**
 * Switch the flags to a named preset, "S1" to "S7".
 *
 * # Safety
 * `cfg` must come from this library; `name` must be NUL-terminated.
 */
enum BsStatus bs_config_set_scenario(struct BsConfig *cfg, const char *name);

/**
 * Set the master seed.
 *
 * # Safety
 * `cfg` must come from this library.
 */
enum BsStatus bs_config_set_seed(struct BsConfig *cfg, uint64_t seed);

/**
 * Set fleet size and optimizer budget. `workers` 0 means all cores.
 *
 * # Safety
 * `cfg` must come from this library.
 */
enum BsStatus bs_config_set_size(struct BsConfig *cfg,
                                 size_t n_bevs,
                                 size_t population,
                                 size_t generations,
                                 size_t workers);

/**
 * Hex digest of the configuration, NUL-terminated into `buf`.
 *
 * # Safety
 * `cfg` must come from this library and `buf` be valid for `len` bytes.
 */
enum BsStatus bs_config_digest(const struct BsConfig *cfg, char *buf, size_t len);

/**
 * # Safety
 * `cfg` must be null or come from this library and not be freed twice.
 */
void bs_config_free(struct BsConfig *cfg);

/**
 * Run a scenario in memory.
 *
 * # Safety
 * `cfg` must come from this library and `out` be a valid pointer.
 */
enum BsStatus bs_simulate(const struct BsConfig *cfg, struct BsRun **out);

/**
 * Run a scenario and write its artifacts to `out_dir`. `out` may be null.
 *
 * # Safety
 * `cfg` must come from this library; `out_dir` must be NUL-terminated.
 */
enum BsStatus bs_run_scenario(const struct BsConfig *cfg, const char *out_dir, struct BsRun **out);

/**
 * # Safety
 * `run` must come from this library and `out` be a valid pointer.
 */
enum BsStatus bs_run_summary(const struct BsRun *run, struct BsSummary *out);

/**
 * Objectives of front point `index`; points are ordered by `f1`.
 *
 * # Safety
 * `run` must come from this library; `f1` and `f2` must be valid pointers.
 */
enum BsStatus bs_run_front_point(const struct BsRun *run, size_t index, double *f1, double *f2);

/**
 * Lowest bus voltage at `hour` (0 to 23) under the selected schedule.
 *
 * # Safety
 * `run` must come from this library and `out` be a valid pointer.
 */
enum BsStatus bs_run_min_voltage(const struct BsRun *run, size_t hour, double *out);

/**
 * # Safety
 * `run` must be null or come from this library and not be freed twice.
 */
void bs_run_free(struct BsRun *run);

#endif  /* BEVSCHED_H */
