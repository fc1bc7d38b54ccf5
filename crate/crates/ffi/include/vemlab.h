#ifndef VEMLAB_H
#define VEMLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum VemStatus {
  VEM_STATUS_OK = 0,
  VEM_STATUS_NULL_POINTER = 1,
  VEM_STATUS_INVALID_ARGUMENT = 2,
  VEM_STATUS_IO = 3,
  VEM_STATUS_PARSE = 4,
  VEM_STATUS_INVALID_MESH = 5,
  VEM_STATUS_SOLVER_FAILURE = 6,
  VEM_STATUS_PANIC = 7,
} VemStatus;

// Opaque polygonal mesh.
typedef struct VemMesh VemMesh;

// Opaque discrete solution of the built-in problem on one mesh.
typedef struct VemSolution VemSolution;

// Relative errors against the exact solution of the built-in problem.
typedef struct VemErrors {
  double l2_rel;
  double h1_rel;
  // At the fixed point of interest (0.781, 0.766).
  double point_rel;
} VemErrors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a successful call.
// The pointer stays valid until the next vemlab call on the same thread.
const char *vem_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *vem_version(void);

// Generates a mesh of the unit square.
//
// `family` is one of "square", "concave", "lloyd0", "lloyd100". `cells` is the cell count
// for the Voronoi families and the square count for the others.
//
// # Safety
// `family` must be a NUL-terminated string and `out` a valid pointer.
enum VemStatus vem_mesh_generate(const char *family,
                                 uintptr_t cells,
                                 uint64_t seed,
                                 struct VemMesh **out);

// Loads a JSON mesh file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum VemStatus vem_mesh_load(const char *path, struct VemMesh **out);

// Saves a mesh as JSON.
//
// # Safety
// `mesh` must come from this library and `path` be a NUL-terminated string.
enum VemStatus vem_mesh_save(const struct VemMesh *mesh, const char *path);

// Releases a mesh. Null is ignored.
//
// # Safety
// `mesh` must come from this library and not be used afterwards.
void vem_mesh_free(struct VemMesh *mesh);

// # Safety
// `mesh` must come from this library and `out` be a valid pointer.
enum VemStatus vem_mesh_num_cells(const struct VemMesh *mesh, uintptr_t *out);

// # Safety
// `mesh` must come from this library and `out` be a valid pointer.
enum VemStatus vem_mesh_num_vertices(const struct VemMesh *mesh, uintptr_t *out);

// Copies vertex coordinates as interleaved `x0, y0, x1, y1, ...` into `xy`, which must hold
// `len >= 2 * num_vertices` doubles.
//
// # Safety
// `mesh` must come from this library and `xy` point to `len` writable doubles.
enum VemStatus vem_mesh_vertices(const struct VemMesh *mesh, double *xy, uintptr_t len);

// Solves the built-in convection-diffusion-reaction problem on `mesh` with degree `k` (1..4).
//
// `mode` is "standard" or "grad_pinabla"; null selects "standard". Errors are measured with
// the gradient representative matching the mode.
//
// # Safety
// `mesh` must come from this library, `mode` be null or a NUL-terminated string, and `out`
// a valid pointer.
enum VemStatus vem_solve_builtin(const struct VemMesh *mesh,
                                 uint32_t k,
                                 const char *mode,
                                 struct VemSolution **out);

// # Safety
// `sol` must come from this library and `out` be a valid pointer.
enum VemStatus vem_solution_num_dofs(const struct VemSolution *sol, uintptr_t *out);

// # Safety
// `sol` must come from this library and `out` be a valid pointer.
enum VemStatus vem_solution_errors(const struct VemSolution *sol, struct VemErrors *out);

// Value of the projected discrete solution at `(x, y)`.
//
// # Safety
// `sol` must come from this library and `out` be a valid pointer.
enum VemStatus vem_solution_eval(const struct VemSolution *sol, double x, double y, double *out);

// Releases a solution. Null is ignored.
//
// # Safety
// `sol` must come from this library and not be used afterwards.
void vem_solution_free(struct VemSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VEMLAB_H */
