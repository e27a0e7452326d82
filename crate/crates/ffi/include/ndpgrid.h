/* C ABI for the ndpgrid routing library.
 *
 * Maintained by hand against crates/ffi/src/lib.rs; keep both in sync.
 *
 * Conventions:
 *   - Functions returning int use the NDP_* codes below; 0 means success.
 *   - Handles are opaque and single-threaded; release instances with
 *     ndp_instance_free, routings with ndp_routing_free.
 *   - Strings returned by the emit functions are NUL-terminated UTF-8 and
 *     must be released with ndp_string_free.
 *   - ndp_last_error_message() describes the most recent failure on the
 *     calling thread and stays valid until the next failing call.
 */

#ifndef NDPGRID_H
#define NDPGRID_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define NDP_OK 0
#define NDP_ERR_INVALID_ARGUMENT 1
#define NDP_ERR_PARSE 2
#define NDP_ERR_SOLVE 3
#define NDP_ERR_VERIFY 4
#define NDP_ERR_BUDGET 5

typedef struct NdpInstance NdpInstance;
typedef struct NdpRouting NdpRouting;

const char *ndp_last_error_message(void);

/* Instances ------------------------------------------------------------- */

/* Parse the `ndpgrid v1` text format. */
int ndp_instance_parse(const char *text, NdpInstance **out);

/* Generate an instance. kind: 0 random (side, k, far_margin, seed),
 * 1 spaced (side, k, seed), 2 hard (level = k). */
int ndp_instance_generate(int kind, uint32_t side, uint64_t k,
                          uint64_t far_margin, uint64_t seed,
                          NdpInstance **out);

void ndp_instance_free(NdpInstance *inst);
uint32_t ndp_instance_side(const NdpInstance *inst);
uint64_t ndp_instance_pair_count(const NdpInstance *inst);

/* Emit the instance text; release with ndp_string_free. */
char *ndp_instance_emit(const NdpInstance *inst);

/* Solving ---------------------------------------------------------------- */

/* Route the instance with the desk-scale defaults; `trials` bounds the
 * rounding repetitions per branch (use 12 when unsure). */
int ndp_solve(const NdpInstance *inst, uint64_t seed, uint64_t trials,
              NdpRouting **out);

/* Routings --------------------------------------------------------------- */

void ndp_routing_free(NdpRouting *routing);

/* NDP_OK when the routing is a valid solution of the instance. */
int ndp_routing_verify(const NdpInstance *inst, const NdpRouting *routing);

uint64_t ndp_routing_len(const NdpRouting *routing);

/* Pair index served by the i-th path; UINT64_MAX when out of range. */
uint64_t ndp_routing_pair_index(const NdpRouting *routing, uint64_t i);

uint64_t ndp_routing_path_len(const NdpRouting *routing, uint64_t i);

/* Fetch the j-th vertex (1-indexed row/col) of the i-th path. */
int ndp_routing_path_vertex(const NdpRouting *routing, uint64_t i, uint64_t j,
                            uint32_t *row, uint32_t *col);

/* Emit the `routing v1` text; release with ndp_string_free. */
char *ndp_routing_emit(const NdpRouting *routing);

/* Parse the `routing v1` text format. */
int ndp_routing_parse(const char *text, NdpRouting **out);

/* Strings ---------------------------------------------------------------- */

void ndp_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* NDPGRID_H */
