#ifndef PVTRACK_H
#define PVTRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Probe flag carried by a measurement.
 */
typedef enum PvtProbe {
  PVT_PROBE_NONE = 0,
  PVT_PROBE_OPEN_CIRCUIT = 1,
  PVT_PROBE_SHORT_CIRCUIT = 2,
} PvtProbe;

/**
 * Result code of every fallible call.
 */
typedef enum PvtStatus {
  PVT_STATUS_OK = 0,
  PVT_STATUS_NULL_POINTER = 1,
  PVT_STATUS_INVALID_ARGUMENT = 2,
  PVT_STATUS_NON_CONVERGENCE = 3,
  PVT_STATUS_NO_LIGHT = 4,
  PVT_STATUS_DUTY_OUT_OF_RANGE = 5,
  PVT_STATUS_TARGET_ABOVE_BUS = 6,
  PVT_STATUS_INVALID_K = 7,
  PVT_STATUS_CONFIG = 8,
  PVT_STATUS_SIMULATION = 9,
  PVT_STATUS_IO = 10,
  PVT_STATUS_INSUFFICIENT_SAMPLES = 11,
  PVT_STATUS_ZERO_FUNDAMENTAL = 12,
  PVT_STATUS_EMPTY_TRACE = 13,
  PVT_STATUS_ZERO_IDEAL = 14,
  PVT_STATUS_OUT_OF_RANGE = 15,
  PVT_STATUS_NOT_SETTLED = 16,
  PVT_STATUS_PANIC = 17,
} PvtStatus;

typedef struct PvtController PvtController;

typedef struct PvtPanel PvtPanel;

typedef struct PvtScenario PvtScenario;

typedef struct PvtTrace PvtTrace;

/**
 * Single-diode panel parameters.
 */
typedef struct PvtPanelParams {
  double voc_n;
  double isc_n;
  double kv;
  double ki;
  uint32_t n_series;
  double ideality;
  double r_s;
  double r_sh;
} PvtPanelParams;

/**
 * A point on the I-V curve.
 */
typedef struct PvtPoint {
  double v;
  double i;
  double p;
} PvtPoint;

/**
 * One row of a simulation trace. `mode` is a static NUL-terminated string,
 * empty when the controller reports none.
 */
typedef struct PvtRecord {
  double time;
  double g;
  double t;
  double duty;
  double v_pv;
  double i_pv;
  double p_pv;
  double p_ideal;
  const char *mode;
} PvtRecord;

/**
 * One sensed sample handed to a controller.
 */
typedef struct PvtMeasurement {
  double v_pv;
  double i_pv;
  double t;
  double time;
  enum PvtProbe probe;
} PvtMeasurement;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pvt_version(void);

/**
 * Message describing the last failure on this thread, or NULL if none.
 * Valid until the next failing call on the same thread.
 */
const char *pvt_last_error(void);

/**
 * Static name of a status code.
 */
const char *pvt_status_str(enum PvtStatus status);

/**
 * Parameters of the built-in synthetic reference panel.
 */
struct PvtPanelParams pvt_panel_params_reference(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PvtStatus pvt_panel_new(struct PvtPanelParams params, struct PvtPanel **out);

/**
 * # Safety
 * `panel` must be NULL or a handle from `pvt_panel_new` not yet freed.
 */
void pvt_panel_free(struct PvtPanel *panel);

/**
 * Panel current at terminal voltage `v` under irradiance `g` (W/m²) and cell
 * temperature `t` (°C).
 *
 * # Safety
 * `panel` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_panel_current(const struct PvtPanel *panel,
                                 double v,
                                 double g,
                                 double t,
                                 double *out);

/**
 * # Safety
 * `panel` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_panel_voc(const struct PvtPanel *panel, double g, double t, double *out);

/**
 * # Safety
 * `panel` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_panel_true_mpp(const struct PvtPanel *panel,
                                  double g,
                                  double t,
                                  struct PvtPoint *out);

/**
 * Load a scenario from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum PvtStatus pvt_scenario_load(const char *path, struct PvtScenario **out);

/**
 * Parse a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` writable.
 */
enum PvtStatus pvt_scenario_parse(const char *toml, struct PvtScenario **out);

/**
 * # Safety
 * `scenario` must be NULL or a live scenario handle.
 */
void pvt_scenario_free(struct PvtScenario *scenario);

/**
 * 64-bit content hash of the scenario.
 *
 * # Safety
 * `scenario` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_scenario_hash(const struct PvtScenario *scenario, uint64_t *out);

/**
 * Run the scenario. `controller` overrides the scenario's controller name
 * when non-NULL.
 *
 * # Safety
 * `scenario` must be a live handle, `controller` NULL or a NUL-terminated
 * string, and `out` writable.
 */
enum PvtStatus pvt_simulate(const struct PvtScenario *scenario,
                            const char *controller,
                            struct PvtTrace **out);

/**
 * # Safety
 * `trace` must be NULL or a live trace handle.
 */
void pvt_trace_free(struct PvtTrace *trace);

/**
 * Number of records; 0 for a NULL handle.
 *
 * # Safety
 * `trace` must be NULL or a live trace handle.
 */
size_t pvt_trace_len(const struct PvtTrace *trace);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_trace_record(const struct PvtTrace *trace, size_t index, struct PvtRecord *out);

/**
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_trace_efficiency(const struct PvtTrace *trace, double *out);

/**
 * Write the trace as CSV.
 *
 * # Safety
 * `trace` must be a live handle and `path` a NUL-terminated string.
 */
enum PvtStatus pvt_trace_write_csv(const struct PvtTrace *trace, const char *path);

/**
 * Build a controller from a scenario's settings. `name` overrides the
 * scenario's controller when non-NULL.
 *
 * # Safety
 * `scenario` must be a live handle, `name` NULL or a NUL-terminated string,
 * and `out` writable.
 */
enum PvtStatus pvt_controller_new(const struct PvtScenario *scenario,
                                  const char *name,
                                  struct PvtController **out);

/**
 * # Safety
 * `controller` must be NULL or a live controller handle.
 */
void pvt_controller_free(struct PvtController *controller);

/**
 * Current duty command; NaN for a NULL handle.
 *
 * # Safety
 * `controller` must be NULL or a live controller handle.
 */
double pvt_controller_duty(const struct PvtController *controller);

/**
 * Whether the controller wants the panel disconnected at `time` before the
 * next step, and which probe.
 *
 * # Safety
 * `controller` must be a live handle and `out` writable.
 */
enum PvtStatus pvt_controller_probe(struct PvtController *controller,
                                    double time,
                                    enum PvtProbe *out);

/**
 * Feed one measurement; writes the new duty command.
 *
 * # Safety
 * `controller` must be a live handle and `out_duty` writable.
 */
enum PvtStatus pvt_controller_step(struct PvtController *controller,
                                   struct PvtMeasurement m,
                                   double *out_duty);

/**
 * Total harmonic distortion in percent of `len` samples taken at `fs` Hz
 * with fundamental `f0` Hz, using harmonics 2..=`n_harmonics`.
 *
 * # Safety
 * `samples` must point to `len` readable doubles and `out` be writable.
 */
enum PvtStatus pvt_thd(const double *samples,
                       size_t len,
                       double fs,
                       double f0,
                       size_t n_harmonics,
                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PVTRACK_H */
