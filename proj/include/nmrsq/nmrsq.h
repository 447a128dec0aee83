#ifndef NMRSQ_NMRSQ_H
#define NMRSQ_NMRSQ_H

/*
 * C interface to the squeezing simulator. Handles are opaque; every call that
 * can fail returns an nmrsq_status and leaves a message for
 * nmrsq_last_error() on the calling thread. Strings returned by the library
 * are owned by the handle they came from and live until it is freed.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(NMRSQ_BUILDING_LIBRARY)
#define NMRSQ_API __attribute__((visibility("default")))
#else
#define NMRSQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nmrsq_status {
  NMRSQ_OK = 0,
  NMRSQ_ERR_CONFIG = 1,           /* bad config, flag or field name */
  NMRSQ_ERR_IO = 2,               /* unreadable input or unwritable output */
  NMRSQ_ERR_INVALID_ARGUMENT = 3, /* null handle, bad enum string, ... */
  NMRSQ_ERR_NUMERICAL = 4,        /* truncation, accuracy, domain */
  NMRSQ_ERR_INTERNAL = 5
} nmrsq_status;

typedef struct nmrsq_config nmrsq_config;
typedef struct nmrsq_result nmrsq_result;

NMRSQ_API const char* nmrsq_version(void);

/* Message of the last failed call on this thread; "" if none. */
NMRSQ_API const char* nmrsq_last_error(void);

/* CLI exit code for a status: 0 success, 1 configuration/usage, 2 numerical. */
NMRSQ_API int nmrsq_exit_code(nmrsq_status status);

/* ---- configuration ---------------------------------------------------- */

NMRSQ_API nmrsq_status nmrsq_config_load(const char* path, nmrsq_config** out);
NMRSQ_API nmrsq_status nmrsq_config_parse(const char* json_text, nmrsq_config** out);
/* units: "physical" (reference device) or "scaled" (desk-scale benchmark). */
NMRSQ_API nmrsq_status nmrsq_config_default(const char* units, nmrsq_config** out);
NMRSQ_API void nmrsq_config_free(nmrsq_config* config);

/* Replace one value by dotted path ("fig2.ratios", "noise.D") with a JSON
 * literal; the config is re-validated and its digest changes accordingly. */
NMRSQ_API nmrsq_status nmrsq_config_set(nmrsq_config* config, const char* path, const char* json_value);
NMRSQ_API nmrsq_status nmrsq_config_set_seed(nmrsq_config* config, uint64_t seed);
NMRSQ_API nmrsq_status nmrsq_config_digest(const nmrsq_config* config, const char** out);
NMRSQ_API nmrsq_status nmrsq_config_units(const nmrsq_config* config, const char** out);

/* ---- derived couplings -------------------------------------------------- */

/* Angular quantities in rad/s (or rad per scaled time unit). */
typedef struct nmrsq_couplings {
  double omega_a, omega_b;
  double lambda_a, lambda_b;
  double theta, sin_theta, cos_theta;
  double Omega, g_a, g_b;
  double Delta_a, Delta_b, delta;
  double kappa;
  double x0, p0;
} nmrsq_couplings;

NMRSQ_API nmrsq_status nmrsq_config_couplings(const nmrsq_config* config, nmrsq_couplings* out);

/* ---- squeezing laws ----------------------------------------------------- */

/* Noisy dx/x0 for r = D / (2 kappa beta); r = 0 is the ideal e^{-xi}. */
NMRSQ_API nmrsq_status nmrsq_predicted_dx(double xi, double r, double* out);

/* Minimum of the noisy dx/x0 curve on [0, xi_max]; interior is 0 when the
 * minimum sits on the grid boundary. */
NMRSQ_API nmrsq_status nmrsq_curve_minimum(double r, double xi_max, int points, double* xi_star, double* value,
                                           int* interior);

/* Numerical squeezed vacuum on `dim` NMR levels, phi = pi/2. */
NMRSQ_API nmrsq_status nmrsq_squeezed_vacuum_variances(double xi, int dim, double* dx_over_x0, double* dp_over_p0);

/* ---- commands ------------------------------------------------------------ */

/* Each command writes its files under out_dir. A failing verification or
 * --strict regime check is not an error: the call returns NMRSQ_OK and the
 * result carries exit code 2. */
NMRSQ_API nmrsq_status nmrsq_run_params(const nmrsq_config* config, const char* out_dir, int strict,
                                        nmrsq_result** out);
NMRSQ_API nmrsq_status nmrsq_run_verify(const nmrsq_config* config, const char* suite, const char* out_dir,
                                        const char* overlay_or_null, nmrsq_result** out);
NMRSQ_API nmrsq_status nmrsq_run_fig2(const nmrsq_config* config, const char* out_dir, nmrsq_result** out);
NMRSQ_API nmrsq_status nmrsq_run_evolve(const nmrsq_config* config, const char* out_dir, int strict,
                                        nmrsq_result** out);

typedef struct nmrsq_sweep_spec {
  const char* param;
  double from;
  double to;
  int steps;
  const char* const* emit; /* NULL: kappa_over_2pi_hz */
  size_t n_emit;
  const char* compensate; /* NULL: none */
} nmrsq_sweep_spec;

NMRSQ_API nmrsq_status nmrsq_run_sweep(const nmrsq_config* config, const nmrsq_sweep_spec* spec, const char* out_dir,
                                       nmrsq_result** out);

NMRSQ_API int nmrsq_result_exit_code(const nmrsq_result* result);
NMRSQ_API const char* nmrsq_result_report(const nmrsq_result* result); /* JSON text */
NMRSQ_API size_t nmrsq_result_file_count(const nmrsq_result* result);
NMRSQ_API const char* nmrsq_result_file(const nmrsq_result* result, size_t index);
NMRSQ_API void nmrsq_result_free(nmrsq_result* result);

#ifdef __cplusplus
}
#endif

#endif /* NMRSQ_NMRSQ_H */
