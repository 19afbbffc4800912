/* Closed-loop nanosheet-FET design engine: C interface.
 *
 * Conventions:
 *   - Inputs and outputs are UTF-8 JSON strings unless noted. Output strings
 *     are heap-allocated; release them with nsopt_string_free().
 *   - Every function returns NSOPT_OK on success. On failure the return code
 *     classifies the problem and nsopt_last_error() carries the message for
 *     the calling thread (valid until the next failing call on that thread).
 *   - NULL is accepted wherever a parameter is documented as optional.
 */
#ifndef NSOPT_H
#define NSOPT_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nsopt_status {
    NSOPT_OK = 0,
    NSOPT_ERR_INVALID_ARGUMENT = 1, /* NULL pointer or unusable flag value */
    NSOPT_ERR_PARSE = 2,            /* malformed JSON or log file */
    NSOPT_ERR_VALIDATION = 3,       /* values violate a documented invariant */
    NSOPT_ERR_CONFIG = 4,           /* unusable configuration */
    NSOPT_ERR_IO = 5,               /* filesystem failure */
    NSOPT_ERR_AGENT = 6,            /* proposal or transport failure */
    NSOPT_ERR_INTERNAL = 7
} nsopt_status;

/* Library semantic version, static storage. */
const char* nsopt_version(void);

/* Message for the most recent failure on this thread; "" when none. */
const char* nsopt_last_error(void);

/* Releases a string returned through an out-parameter. NULL is a no-op. */
void nsopt_string_free(char* s);

/* ------------------------------------------------------------------------
 * Design parameters
 * --------------------------------------------------------------------- */

/* Checks a design against a search space (NULL space = shipped default).
 * Validation verdicts are data, not errors: returns NSOPT_OK with
 * {"in_bounds": bool, "violations": [{field, message, value, lower, upper}]}.
 */
nsopt_status nsopt_validate_params(const char* params_json, const char* space_json,
                                   char** report_json_out);

/* Projects a design into the space and repairs structural invariants.
 * Fails with NSOPT_ERR_VALIDATION when no valid point can be reached. */
nsopt_status nsopt_clamp_params(const char* params_json, const char* space_json,
                                char** params_json_out);

/* ------------------------------------------------------------------------
 * Command-file generation and parsing
 * --------------------------------------------------------------------- */

/* mesh: "coarse", "default" or "fine". */
nsopt_status nsopt_generate_sde(const char* params_json, const char* mesh, char** deck_out);

/* sweep_json optional (default: transfer sweep up to the design's vdd);
 * models: "dd" or "dd-quantum". */
nsopt_status nsopt_generate_sdevice(const char* params_json, const char* sweep_json,
                                    const char* models, char** deck_out);

/* kind: "sde" or "sdevice". Returns {"params": {...}, "diagnostics": [...]};
 * malformed decks still return NSOPT_OK with the problems listed. */
nsopt_status nsopt_parse_deck(const char* deck_text, const char* kind, char** info_json_out);

/* Expands design variants and assembles query/deck records.
 * config: {"base": params, "space"?: space, "strategy": {"kind": "grid",
 * "axes": [{"field", "levels"}...]} | {"kind": "lhs", "samples", "seed"},
 * "sweeps"?: [sweep...], "templates"?: [string...], "seed"?: int,
 * "mesh"?: tag, "models"?: tag}.
 * Returns {"record_count", "skipped": [...], "jsonl": "..."} where jsonl
 * holds one {"query", "sde", "sdevice", "metadata"} document per line. */
nsopt_status nsopt_build_corpus(const char* config_json, char** result_json_out);

/* ------------------------------------------------------------------------
 * Simulation and metric extraction
 * --------------------------------------------------------------------- */

/* One built-in solver evaluation (transfer sweep). sweep_json optional as
 * above. Returns {"converged": true, "result": {...}} with the full result
 * document, or {"converged": false, "diagnostic": "..."}. */
nsopt_status nsopt_simulate(const char* params_json, const char* sweep_json,
                            char** outcome_json_out);

/* Figures of merit from a current-voltage table:
 * iv_json = {"vd", "temperature"?, "points": [[vg, id], ...]}; off-current
 * is read at vg = 0 and on-current at vg = vd. targets_json optional
 * (shipped targets). Returns the metric document with pass/fail verdicts. */
nsopt_status nsopt_extract_metrics(const char* iv_json, const char* targets_json,
                                   char** metrics_json_out);

/* ------------------------------------------------------------------------
 * Optimization runs
 * --------------------------------------------------------------------- */

typedef struct nsopt_run nsopt_run;

/* Binds a run directory to a run config (see the config.json reference in
 * the README). Nothing touches the disk until nsopt_run_execute. */
nsopt_status nsopt_run_open(const char* run_dir, const char* config_json, nsopt_run** run_out);

/* Reopens a run directory from its stored config.json. replay != 0 serves
 * recorded model traffic from transcript.jsonl instead of going over HTTP. */
nsopt_status nsopt_run_resume(const char* run_dir, int replay, nsopt_run** run_out);

/* Runs the loop to completion (resuming any existing trajectory) and
 * returns the final report document. Safe to call on a finished run: the
 * stored report comes back unchanged. */
nsopt_status nsopt_run_execute(nsopt_run* run, char** report_json_out);

/* Releases the handle. NULL is a no-op. */
void nsopt_run_close(nsopt_run* run);

/* ------------------------------------------------------------------------
 * Plots
 * --------------------------------------------------------------------- */

/* Renders trajectory CSV/SVG plus, when available, the transfer curve and
 * band profiles of one iteration (-1 = best recorded). out_dir NULL or ""
 * defaults to <run_dir>/plots. Returns {"written": [paths...]}. */
nsopt_status nsopt_plot_run(const char* run_dir, const char* out_dir, int iteration,
                            char** files_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NSOPT_H */
