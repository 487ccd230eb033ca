/* rieszpot: potential-type operators on discretized quasi-metric measure
 * spaces, behind a C interface with opaque handles.
 *
 * Conventions:
 *   - All inputs and outputs are UTF-8 JSON text unless noted.
 *   - Functions return RZP_OK or an error code; rzp_last_error() holds a
 *     thread-local description of the most recent failure.
 *   - Strings returned through char** are heap-allocated; release them
 *     with rzp_string_free().
 *   - A measure handle borrows its space handle, and pointers returned by
 *     rzp_glued_space/rzp_glued_measure borrow the glued handle: keep the
 *     owner alive for as long as the borrower is used.
 */
#ifndef RIESZPOT_H
#define RIESZPOT_H

#include <stddef.h>

#if defined(_WIN32)
#define RZP_API __declspec(dllexport)
#else
#define RZP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rzp_status {
    RZP_OK = 0,
    RZP_ERR_PARSE = 1,            /* malformed JSON or spec text */
    RZP_ERR_PRECONDITION = 2,     /* valid input, contract violated */
    RZP_ERR_HYPOTHESIS = 3,       /* theorem-study gates not met */
    RZP_ERR_INVALID_ARGUMENT = 4, /* null handle or pointer misuse */
    RZP_ERR_INTERNAL = 5
} rzp_status;

typedef struct rzp_space rzp_space;
typedef struct rzp_measure rzp_measure;
typedef struct rzp_glued rzp_glued;

RZP_API const char* rzp_last_error(void);
RZP_API void rzp_string_free(char* s);

/* worker threads for the O(N^2)/O(N^3) scans; 0 restores the hardware
 * default. Results are bit-identical for every setting. */
RZP_API void rzp_set_threads(int n);
RZP_API int rzp_threads(void);

/* spec kinds: grid1d | grid2d | cantor | explicit | snowflake */
RZP_API rzp_status rzp_space_build(const char* spec_json, rzp_space** out);
RZP_API rzp_status rzp_space_load(const char* space_json, rzp_space** out);
RZP_API rzp_status rzp_space_save(const rzp_space* s, char** json_out);
/* {n, k1, k1_estimated, r0, doubling_number?} */
RZP_API rzp_status rzp_space_info(const rzp_space* s, int with_doubling_number, char** json_out);
RZP_API size_t rzp_space_size(const rzp_space* s);
RZP_API void rzp_space_free(rzp_space* s);

/* measure_json: weight array aligned with node order, {"weights": [...]},
 * or a generator {"kind": "uniform-mass"|"quadrature", ...} */
RZP_API rzp_status rzp_measure_load(const rzp_space* s, const char* measure_json, rzp_measure** out);
RZP_API void rzp_measure_free(rzp_measure* m);

/* upper-doubling check of the measure against a dominating-function spec
 * ("power:K=2,n=1", "ball-measure", ...); reports
 * {holds, best_constant, witness:{node, radius}, samples} */
RZP_API rzp_status rzp_measure_check(const rzp_space* s, const rzp_measure* m, const char* lambda_spec,
                                     char** report_json);

/* glue spec: {"component1": spec, "component2": spec, "offset2": [..],
 * "x0": [..], "gamma1": g1, "gamma2": g2} */
RZP_API rzp_status rzp_glued_build(const char* glue_spec_json, rzp_glued** out);
RZP_API rzp_status rzp_glued_load(const char* bundle_json, rzp_glued** out);
RZP_API rzp_status rzp_glued_save(const rzp_glued* g, char** json_out);
/* two-sided ball-mass estimates: fits (K3, c), checks every regime */
RZP_API rzp_status rzp_glued_verify_balls(const rzp_glued* g, char** report_json);
RZP_API const rzp_space* rzp_glued_space(const rzp_glued* g);
RZP_API const rzp_measure* rzp_glued_measure(const rzp_glued* g);
RZP_API void rzp_glued_free(rzp_glued* g);

/* kernel spec: "general:alpha=..,lambda=.." | "dimpower:alpha=..,Q=.." |
 * "oneminus:gamma=.." | "measurepower:gamma=.." | "jalpha:alpha=.." |
 * "vardim:alpha=.." (vardim and fitted lambdas need the glue handle).
 * f_json: value array; out: value array. */
RZP_API rzp_status rzp_op_apply(const rzp_space* s, const rzp_measure* m, const rzp_glued* glue_or_null,
                                const char* kernel_spec, const char* f_json, char** out_json);

/* exponent spec: number | per-node array | "hls:p=..,alpha=..[,n=..]";
 * out: {"modular": .., "norm": ..} */
RZP_API rzp_status rzp_norm_eval(const rzp_space* s, const rzp_measure* m, const rzp_glued* glue_or_null,
                                 const char* exponent_spec, const char* f_json, char** out_json);

/* kind: hls | hedberg | necessity | maximal. csv_out may be NULL. */
RZP_API rzp_status rzp_verify_run(const char* kind, const char* config_json, char** report_json, char** csv_out);

/* resolves and echoes a run plan without computing anything */
RZP_API rzp_status rzp_plan(const char* subcommand, const char* request_json, char** plan_json);

#ifdef __cplusplus
}
#endif

#endif /* RIESZPOT_H */
