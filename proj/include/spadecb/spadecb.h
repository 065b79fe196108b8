/* spadecb: Chernoff exponents for discriminating incoherent sources under
 * diffraction. Plain C interface over the C++ core.
 *
 * Every function returns an spcb_status. On failure spcb_last_error() holds a
 * message for the calling thread until its next API call. Handles are opaque
 * and owned by the caller; release them with the matching _free function. */
#ifndef SPADECB_H
#define SPADECB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPCB_BUILDING_LIBRARY)
#    define SPCB_API __declspec(dllexport)
#  else
#    define SPCB_API __declspec(dllimport)
#  endif
#else
#  define SPCB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spcb_status {
  SPCB_OK = 0,
  SPCB_ERR_DOMAIN = 1,
  SPCB_ERR_PRECONDITION = 2,
  SPCB_ERR_INVALID_SOURCE = 3,
  SPCB_ERR_PARSE = 4,
  SPCB_ERR_TRUNCATION = 5,
  SPCB_ERR_OPTIMIZER = 6,
  SPCB_ERR_IO = 7,
  SPCB_ERR_NULL_ARGUMENT = 8,
  SPCB_ERR_BUFFER_TOO_SMALL = 9,
  SPCB_ERR_INTERNAL = 10
} spcb_status;

typedef enum spcb_method {
  SPCB_METHOD_GENERAL = 0,
  SPCB_METHOD_FAINT = 1,
  SPCB_METHOD_COMMUTING = 2,
  SPCB_METHOD_SUBDIFF_QCB = 3,
  SPCB_METHOD_TRISPADE = 4,
  /* Request only: commuting fast path when the pair commutes, else general. */
  SPCB_METHOD_AUTO = 100
} spcb_method;

typedef struct spcb_cov spcb_cov;
typedef struct spcb_source spcb_source;

typedef struct spcb_result {
  double exponent;    /* nats per frame */
  double s_star;
  double theta0_star; /* valid when has_theta0 */
  int has_theta0;
  int method;         /* spcb_method */
  int multimodal;
} spcb_result;

typedef struct spcb_scenario {
  double v1x, v1y, v2x, v2y;
  double theta1, theta2;
  double i0;
  double chi;
} spcb_scenario;

typedef struct spcb_moments {
  double m10, m01, m20, m02, m11;
} spcb_moments;

typedef struct spcb_frame {
  double vx, vy, theta;
} spcb_frame;

SPCB_API const char* spcb_version(void);
SPCB_API const char* spcb_last_error(void);
SPCB_API const char* spcb_status_name(spcb_status status);
SPCB_API const char* spcb_method_name(int method);
/* Caps worker threads for sweeps and simulations; 0 restores the default. */
SPCB_API void spcb_set_max_threads(unsigned n);
/* Releases strings returned through char** out-parameters. */
SPCB_API void spcb_string_free(char* s);

/* ---- covariance matrices ---------------------------------------------- */

/* Generic-basis matrix from row-major entries. */
SPCB_API spcb_status spcb_cov_from_entries(const double* entries, size_t dim, spcb_cov** out);
SPCB_API spcb_status spcb_cov_load_csv(const char* path, spcb_cov** out);
SPCB_API spcb_status spcb_cov_parse_csv(const char* text, spcb_cov** out);
SPCB_API spcb_status spcb_cov_save_csv(const spcb_cov* cov, const char* path);
SPCB_API spcb_status spcb_cov_dim(const spcb_cov* cov, size_t* dim);
/* Copies dim*dim row-major entries into out. */
SPCB_API spcb_status spcb_cov_entries(const spcb_cov* cov, double* out, size_t capacity);
SPCB_API spcb_status spcb_cov_i0(const spcb_cov* cov, double* i0);
SPCB_API spcb_status spcb_cov_basis(const spcb_cov* cov, char** description);
SPCB_API spcb_status spcb_cov_is_valid(const spcb_cov* cov, int* valid);
/* Order-chi^2 6x6 Hermite-Gauss covariance. */
SPCB_API spcb_status spcb_cov_hg_chi2(const spcb_moments* mom, double i0, double chi, spcb_cov** out);
SPCB_API void spcb_cov_free(spcb_cov* cov);

/* ---- sources ------------------------------------------------------------ */

/* Key-value source description (kind, length, angle, sx, sy, arm_length,
 * arm_width, nx, ny, extent, extent_x, extent_y, intensity). */
SPCB_API spcb_status spcb_source_from_config_text(const char* text, spcb_source** out);
SPCB_API spcb_status spcb_source_load_config(const char* path, spcb_source** out);
/* CSV pixel dump with header x,y,intensity. */
SPCB_API spcb_status spcb_source_load_pixels(const char* path, spcb_source** out);
SPCB_API spcb_status spcb_source_total_intensity(const spcb_source* src, double* i0);
/* Moments of the normalised image with coordinates divided by scale. */
SPCB_API spcb_status spcb_source_moments(const spcb_source* src, double scale, int centre,
                                         spcb_moments* out);
SPCB_API spcb_status spcb_source_frame(const spcb_source* src, double scale, spcb_frame* out);
/* Exact Hermite-Gauss covariance for a Gaussian PSF of width sigma. */
SPCB_API spcb_status spcb_source_hg_cov(const spcb_source* src, double sigma, int max_order,
                                        spcb_cov** out);
/* Position-basis covariance on an nx-by-ny lattice covering +-5 sigma. */
SPCB_API spcb_status spcb_source_position_cov(const spcb_source* src, double sigma, int nx,
                                              int ny, spcb_cov** out);
SPCB_API void spcb_source_free(spcb_source* src);

/* ---- Chernoff exponents -------------------------------------------------- */

SPCB_API spcb_status spcb_qcb(const spcb_cov* a, const spcb_cov* b, int method, spcb_result* out);
SPCB_API spcb_status spcb_q_of_s(const spcb_cov* a, const spcb_cov* b, double s, double* q);
SPCB_API spcb_status spcb_commute_check(const spcb_cov* a, const spcb_cov* b, double tol, int* commutes);

/* ---- subdiffraction ---------------------------------------------------- */

SPCB_API spcb_status spcb_subdiff_qcb(const spcb_scenario* p, spcb_result* out);
SPCB_API spcb_status spcb_spade_exponent(const spcb_scenario* p, double theta0, spcb_result* out);
SPCB_API spcb_status spcb_spade_optimal(const spcb_scenario* p, spcb_result* out);
SPCB_API spcb_status spcb_gap(const spcb_scenario* p, double theta0, double* gap);
SPCB_API spcb_status spcb_oned_boundary_ratio(double dtheta, double* ratio);

/* ---- sweeps -------------------------------------------------------------- */

typedef struct spcb_sweep_grid {
  double theta0_min, theta0_max;
  int points;
  double i0, chi;
} spcb_sweep_grid;

typedef struct spcb_sweep_curve {
  const char* name;
  double v1x, v1y, v2x, v2y;
  double dtheta;
} spcb_sweep_curve;

typedef struct spcb_sweep_row {
  const char* curve;
  double dtheta;
  double v1x, v1y, v2x, v2y;
  double sweep_variable, xi_q, xi_spade, gap, s_star, theta0;
} spcb_sweep_row;

/* Return nonzero from the callback to stop early. */
typedef int (*spcb_sweep_callback)(const spcb_sweep_row* row, void* user);

SPCB_API void spcb_sweep_grid_default(spcb_sweep_grid* grid);
/* Column header of the sweep CSV, without a trailing newline. */
SPCB_API const char* spcb_sweep_csv_header(void);
/* preset is "fig2" or "fig3". */
SPCB_API spcb_status spcb_sweep_preset(const char* preset, const spcb_sweep_grid* grid,
                                       spcb_sweep_callback cb, void* user);
SPCB_API spcb_status spcb_sweep_custom(const spcb_sweep_curve* curves, size_t n_curves,
                                       const spcb_sweep_grid* grid, spcb_sweep_callback cb,
                                       void* user);

/* ---- Monte Carlo ---------------------------------------------------------- */

typedef enum spcb_sampling {
  SPCB_SAMPLING_CLOSED_FORM = 0,
  SPCB_SAMPLING_P_FUNCTION = 1
} spcb_sampling;

typedef struct spcb_sim_config {
  int trials;
  uint64_t seed;
  int sampling; /* spcb_sampling */
  int min_errors;
  int max_trials;
} spcb_sim_config;

SPCB_API void spcb_sim_config_default(spcb_sim_config* cfg);

typedef struct spcb_sim_summary {
  double slope, slope_stderr, ci_low, ci_high;
  double slope_prefactor_corrected;
  double xi_theory, xi_q, ratio;
  int warnings;
} spcb_sim_summary;

/* Runs the error-exponent estimate; csv (optional) receives the result table
 * with its '#' header lines. */
SPCB_API spcb_status spcb_simulate(const spcb_scenario* p, double theta0,
                                   const spcb_sim_config* cfg, const int* n_list, size_t n,
                                   spcb_sim_summary* out, char** csv);

/* ---- truncated-Fock oracle ------------------------------------------------ */

typedef struct spcb_oracle_row {
  int id;
  double a1, b1, a2, b2, angle;
  int cutoff;
  double fock, gaussian, deviation;
} spcb_oracle_row;

SPCB_API spcb_status spcb_oracle_family_size(size_t* n);
/* Evaluates the preregistered family. cutoff <= 0 chooses it automatically;
 * strict = 0 allows cutoffs with a tail above 1e-12. perturbation is added to
 * the Gaussian value (negative control). */
SPCB_API spcb_status spcb_oracle_check(int cutoff, int strict, int s_points, double perturbation,
                                       spcb_oracle_row* rows, size_t capacity, size_t* n_rows);
SPCB_API spcb_status spcb_oracle_goldens_csv(int cutoff, int s_points, char** csv);

#ifdef __cplusplus
}
#endif

#endif
