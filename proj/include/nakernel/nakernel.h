#ifndef NAKERNEL_NAKERNEL_H
#define NAKERNEL_NAKERNEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(NAKERNEL_BUILDING_LIBRARY)
#define NAK_API __attribute__((visibility("default")))
#else
#define NAK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nak_status {
  NAK_OK = 0,
  NAK_INVALID_ARGUMENT = 1,
  NAK_DIVERGENT_FUNCTIONAL = 2,
  NAK_DIVERGENT_DRIFT = 3,
  NAK_SINGULAR_KERNEL = 4,
  NAK_UNSUPPORTED_REGION = 5,
  NAK_DEGENERATE_GROUP = 6,
  NAK_FIT_FAILURE = 7,
  NAK_CONFIG_ERROR = 8,
  NAK_IO_ERROR = 9,
  NAK_INTERNAL_ERROR = 100
} nak_status;

/* Version string of the library (git describe at build time). */
NAK_API const char* nak_version(void);

/* Message of the last failing call on this thread; "" when none. */
NAK_API const char* nak_last_error(void);

NAK_API const char* nak_status_name(nak_status status);

/* ---- groups -------------------------------------------------------------- */

typedef struct nak_group nak_group;

/* Heisenberg group H_n with roots xi1 (on x), xi2 (on y) and xi1 + xi2 (on z),
   all of length `rank`; `alpha` is the drift. M = (y_1..y_n, z), V = x. */
NAK_API nak_status nak_heisenberg_create(int n, size_t rank, const double* xi1,
                                         const double* xi2, const double* alpha,
                                         nak_group** out);
NAK_API void nak_group_free(nak_group* group);

NAK_API nak_status nak_group_dims(const nak_group* group, size_t* m, size_t* n,
                                  size_t* rank, int* k_o);

/* (m1, v1)(m2, v2); outputs may not alias inputs. */
NAK_API nak_status nak_group_multiply(const nak_group* group, const double* m1,
                                      const double* v1, const double* m2,
                                      const double* v2, double* m_out,
                                      double* v_out);
NAK_API nak_status nak_group_inverse(const nak_group* group, const double* m,
                                     const double* v, double* m_out,
                                     double* v_out);

/* ---- exponents and closed forms ----------------------------------------- */

NAK_API nak_status nak_exponent_thcm(const nak_group* group, const double* rho,
                                     double* gamma_alpha, double* rho0_rho);
NAK_API nak_status nak_exponent_thpota(const nak_group* group, double q,
                                       double* out);
/* region: "both", "v_large" or "m_large" */
NAK_API nak_status nak_exponent_newupper(const nak_group* group,
                                         const double* rho, const char* region,
                                         double* out);

/* CDF of the centred Gaussian with variance 2. */
NAK_API double nak_phi_cdf(double x);

NAK_API nak_status nak_perpetuity_law(double d, size_t rank, const double* form,
                                      const double* alpha, double* shape,
                                      double* scale);

/* ---- Poisson kernel ------------------------------------------------------ */

typedef struct nak_estimate {
  double mean;
  double std_error;
  double median_of_means;
  double mom_std_error;
  size_t count;
  int converged;
} nak_estimate;

typedef struct nak_poisson_args {
  double horizon;
  size_t n_sigma;
  size_t n_eta;
  size_t steps_per_unit;
  uint64_t seed;
  unsigned workers;
} nak_poisson_args;

NAK_API nak_status nak_estimate_nu(const nak_group* group, const double* m,
                                   const double* v, const nak_poisson_args* args,
                                   nak_estimate* out);

/* ---- commands ------------------------------------------------------------ */

/* Name of command `index`, or NULL past the end. */
NAK_API const char* nak_command_name(size_t index);

typedef struct nak_run_options {
  int has_seed; /* nonzero: `seed` overrides the config */
  uint64_t seed;
  unsigned workers; /* 0 is treated as 1 */
} nak_run_options;

typedef struct nak_result nak_result;

/* Runs `command` on a config (TOML text) or on a previous JSON result record,
   whose embedded config and seed are replayed. */
NAK_API nak_status nak_run(const char* command, const char* config_text,
                           const nak_run_options* options, nak_result** out);

/* 0 when every check passed, 1 otherwise. */
NAK_API int nak_result_exit_code(const nak_result* result);
NAK_API const char* nak_result_csv(const nak_result* result);
NAK_API const char* nak_result_json(const nak_result* result);
/* Output directory named by the config ("out"). */
NAK_API const char* nak_result_out_dir(const nak_result* result);
NAK_API void nak_result_free(nak_result* result);

#ifdef __cplusplus
}
#endif

#endif
