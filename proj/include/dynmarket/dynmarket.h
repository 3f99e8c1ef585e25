#ifndef DYNMARKET_DYNMARKET_H
#define DYNMARKET_DYNMARKET_H

#include <stddef.h>
#include <stdint.h>

#if defined(DYNMARKET_BUILDING_LIBRARY)
#define DM_API __attribute__((visibility("default")))
#else
#define DM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dm_status {
  DM_OK = 0,
  DM_ERR_INVALID_ARGUMENT = 1,
  DM_ERR_DIMENSION = 2,
  DM_ERR_INVALID_MARKET = 3,
  DM_ERR_LINEAR_UTILITY = 4,
  DM_ERR_DEGENERATE_DEMAND = 5,
  DM_ERR_NONCONVERGENCE = 6,
  DM_ERR_STEP_FAILURE = 7,
  DM_ERR_WRONG_CHANNEL = 8,
  DM_ERR_SUPPORT = 9,
  DM_ERR_MASS = 10,
  DM_ERR_SCHEMA = 11,
  DM_ERR_IO = 12,
  DM_ERR_NULL = 13,      /* a required pointer argument was NULL */
  DM_ERR_INTERNAL = 14
} dm_status;

/* Message of the last failing call on this thread; "" after a success. */
DM_API const char* dm_last_error(void);
DM_API const char* dm_status_name(dm_status status);
DM_API const char* dm_version(void);

/* ---- markets ---------------------------------------------------------- */

typedef struct dm_market dm_market;

/* coefficients is row-major, buyers x goods. The arrays are copied. */
DM_API dm_status dm_market_create(size_t buyers, size_t goods, const double* budgets, const double* supplies,
                                  const double* rho, const double* coefficients, dm_market** out);
DM_API void dm_market_destroy(dm_market* market);
DM_API dm_status dm_market_shape(const dm_market* market, size_t* buyers, size_t* goods);

/* quantities (buyers x goods, row-major) and excess (goods) may each be NULL. */
DM_API dm_status dm_demand(const dm_market* market, const double* prices, double* quantities, double* excess);
DM_API dm_status dm_misspending(const dm_market* market, const double* prices, double* out);
/* Psi(p), not normalised by its minimum. */
DM_API dm_status dm_cpf_potential(const dm_market* market, const double* prices, double* out);
/* prices_out has goods entries; bids_out (buyers x goods) and psi_star may be NULL. */
DM_API dm_status dm_equilibrium(const dm_market* market, double tolerance, double* prices_out, double* bids_out,
                                double* psi_star);

DM_API dm_status dm_step_ms(const dm_market* market, const double* prices, double lambda, double* out);
DM_API dm_status dm_step_cpf(const dm_market* market, const double* prices, double lambda, double* out);
/* bids and out are buyers x goods, row-major; out may alias bids. */
DM_API dm_status dm_prd_step(const dm_market* market, const double* bids, double* out);

/* ---- bounds and oracles ----------------------------------------------- */

DM_API dm_status dm_kl_divergence(const double* x, const double* y, size_t len, double* out);
/* beta_out (n entries) may be NULL. */
DM_API dm_status dm_extremize_shares(const double* alpha, const double* beta, size_t n, double mu, double* beta_out,
                                     double* value);
DM_API dm_status dm_meta_bound(double phi0, double delta, const double* deltas, size_t rounds, double* out);
DM_API dm_status dm_gd_tracking_bound(double phi0, double delta, const double* shifts, size_t rounds, double* out);
DM_API dm_status dm_second_eigenvalue(const double* diffusivity, size_t n, double* out);

/* ---- experiments -------------------------------------------------------- */

typedef struct dm_summary {
  int dominated;        /* 1 when every round stayed within its bound */
  size_t violations;
  size_t rounds;
  double final_potential;
  double final_bound;
} dm_summary;

/* Loads a JSON config, runs it and writes the trace CSV and report JSON into
   out_dir. Config problems return DM_ERR_SCHEMA (or DM_ERR_IO when the file
   cannot be read); summary may be NULL. */
DM_API dm_status dm_simulate(const char* config_path, const char* out_dir, dm_summary* summary);
/* Same, with the config given as text. */
DM_API dm_status dm_simulate_json(const char* config_json, const char* out_dir, dm_summary* summary);

/* JSON schema for configs; static storage. */
DM_API const char* dm_config_schema(void);

typedef void (*dm_criterion_callback)(int id, const char* title, int passed, const char* detail, double seconds,
                                      void* context);

/* Runs a suite (invariants, domination, oracles, all). Unknown names return
   DM_ERR_SCHEMA. failures may be NULL. */
DM_API dm_status dm_verify(const char* suite, uint64_t seed, dm_criterion_callback callback, void* context,
                           int* failures);
DM_API uint64_t dm_default_seed(void);

#ifdef __cplusplus
}
#endif

#endif
