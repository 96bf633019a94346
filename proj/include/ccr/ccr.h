/* ccroute public C API: communication-constrained routing and traffic
 * control for autonomous vehicles over a road network.
 *
 * All functions return a ccr_status; CCR_OK is 0. On failure a detailed
 * message is available from ccr_last_error() (thread-local). Output strings
 * are allocated by the library and must be released with ccr_string_free().
 */
#ifndef CCR_H_
#define CCR_H_

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ccr_status {
  CCR_OK = 0,
  CCR_ERROR_INVALID_ARGUMENT = 1,
  CCR_ERROR_PARSE = 2,
  CCR_ERROR_CONFIG = 3,
  CCR_ERROR_NO_ROUTE = 4,
  CCR_ERROR_SOURCE_UNCOVERED = 5,
  CCR_ERROR_DESTINATION_UNCOVERED = 6,
  CCR_ERROR_INFEASIBLE = 7,
  CCR_ERROR_IO = 8,
  CCR_ERROR_INTERNAL = 9
} ccr_status;

/* Opaque scenario handle: a parsed and validated configuration document. */
typedef struct ccr_scenario ccr_scenario;

const char* ccr_version(void);
const char* ccr_status_name(ccr_status status);

/* Message for the most recent failure on this thread; never NULL. */
const char* ccr_last_error(void);

/* Constructors. `overrides_json` may be NULL for a bare preset. */
ccr_status ccr_scenario_from_json(const char* json_text, ccr_scenario** out);
ccr_status ccr_scenario_from_file(const char* path, ccr_scenario** out);
ccr_status ccr_scenario_from_preset(const char* name, const char* overrides_json,
                                    ccr_scenario** out);
void ccr_scenario_free(ccr_scenario* scenario);

ccr_status ccr_scenario_set_seed(ccr_scenario* scenario, unsigned long long seed);
ccr_status ccr_scenario_set_gamma(ccr_scenario* scenario, double gamma_mbps);
/* FNV-1a hash of the canonical config document (16 hex chars). */
ccr_status ccr_scenario_hash(const ccr_scenario* scenario, char** out);

/* Computes every gamma-rate cell for a fresh seeded ESM and returns
 * {"cells": [...], "summary": {...}} as JSON. */
ccr_status ccr_compute_cells(const ccr_scenario* scenario, char** json_out);

/* scheme: "two-layer" | "greedy" | "greedy-cc" | "shortest-time".
 * gamma_mbps < 0 uses the scenario's configured gamma.
 * format: "json" or "csv". */
ccr_status ccr_route(const ccr_scenario* scenario, const char* scheme, int src, int dst,
                     double gamma_mbps, const char* format, char** out);

/* Runs the Monte-Carlo batch and writes fig4_duration_cdf.csv,
 * fig5_pc_cdf.csv and summary.json into out_dir. Returns the summary JSON. */
ccr_status ccr_montecarlo(const ccr_scenario* scenario, const char* out_dir, char** summary_out);

/* axis: "gamma" | "bs_count" | "fc" | "alpha" | "lambda_m_t_m".
 * Writes the matching figure CSV (fig6..fig10) into out_dir. */
ccr_status ccr_sweep(const ccr_scenario* scenario, const char* axis, const char* out_dir,
                     char** summary_out);

/* Balances spectrum across the scenario's road/cell incidence and reports
 * the allocation, per-road flows and the gain over an equal split. */
ccr_status ccr_balance(const ccr_scenario* scenario, char** report_json_out);

void ccr_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* CCR_H_ */
