//! C interface to vemlab.
//!
//! Meshes and solutions are opaque handles owned by the caller and released with the matching
//! `*_free` function. Every fallible call returns a [`VemStatus`]; on failure a description is
//! available from [`vem_last_error_message`] on the same thread. Panics never cross the
//! boundary and are reported as `VEM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use vemlab::harness::{builtin_problem, solution_errors, solve_problem, POINT_OF_INTEREST};
use vemlab::mesh::{load_mesh, save_mesh, PolyMesh};
use vemlab::meshgen::{generate, Family, GeneratorSpec};
use vemlab::post::{project_solution, GradientRepresentative, ProjectedSolution};
use vemlab::vem::Mode;
use vemlab::{Point, VemError};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidMesh = 5,
    SolverFailure = 6,
    Panic = 7,
}

/// Opaque polygonal mesh.
pub struct VemMesh {
    mesh: PolyMesh,
}

/// Opaque discrete solution of the built-in problem on one mesh.
pub struct VemSolution {
    mesh: PolyMesh,
    proj: ProjectedSolution,
    n_dofs: usize,
    errors: VemErrors,
}

/// Relative errors against the exact solution of the built-in problem.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VemErrors {
    pub l2_rel: f64,
    pub h1_rel: f64,
    /// At the fixed point of interest (0.781, 0.766).
    pub point_rel: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(VemStatus, String);

impl From<VemError> for Failure {
    fn from(e: VemError) -> Self {
        let status = match &e {
            VemError::Io { .. } => VemStatus::Io,
            VemError::Parse(_) => VemStatus::Parse,
            VemError::Orientation { .. }
            | VemError::NonManifoldEdge { .. }
            | VemError::InvalidCell { .. }
            | VemError::DegenerateCell { .. }
            | VemError::Triangulation(_)
            | VemError::Generation(_) => VemStatus::InvalidMesh,
            VemError::InvalidArgument(_) | VemError::PointOutside { .. } => VemStatus::InvalidArgument,
            VemError::Singular(_) => VemStatus::SolverFailure,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            VemStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            VemStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(VemStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(VemStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null after a successful call.
/// The pointer stays valid until the next vemlab call on the same thread.
#[no_mangle]
pub extern "C" fn vem_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates a mesh of the unit square.
///
/// `family` is one of "square", "concave", "lloyd0", "lloyd100". `cells` is the cell count
/// for the Voronoi families and the square count for the others.
///
/// # Safety
/// `family` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_generate(
    family: *const c_char,
    cells: usize,
    seed: u64,
    out: *mut *mut VemMesh,
) -> VemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let family: Family = str_arg(family, "family")?.parse()?;
        let mesh = generate(&GeneratorSpec::new(family, cells, seed))?;
        write_out(out, Box::into_raw(Box::new(VemMesh { mesh })), "out")
    })
}

/// Loads a JSON mesh file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_load(path: *const c_char, out: *mut *mut VemMesh) -> VemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = PathBuf::from(str_arg(path, "path")?);
        let mesh = load_mesh(&path)?;
        write_out(out, Box::into_raw(Box::new(VemMesh { mesh })), "out")
    })
}

/// Saves a mesh as JSON.
///
/// # Safety
/// `mesh` must come from this library and `path` be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_save(mesh: *const VemMesh, path: *const c_char) -> VemStatus {
    guard(|| {
        let mesh = deref(mesh, "mesh")?;
        save_mesh(&mesh.mesh, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Releases a mesh. Null is ignored.
///
/// # Safety
/// `mesh` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_free(mesh: *mut VemMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_num_cells(mesh: *const VemMesh, out: *mut usize) -> VemStatus {
    guard(|| write_out(out, deref(mesh, "mesh")?.mesh.num_cells(), "out"))
}

/// # Safety
/// `mesh` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_num_vertices(mesh: *const VemMesh, out: *mut usize) -> VemStatus {
    guard(|| write_out(out, deref(mesh, "mesh")?.mesh.num_vertices(), "out"))
}

/// Copies vertex coordinates as interleaved `x0, y0, x1, y1, ...` into `xy`, which must hold
/// `len >= 2 * num_vertices` doubles.
///
/// # Safety
/// `mesh` must come from this library and `xy` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vem_mesh_vertices(mesh: *const VemMesh, xy: *mut f64, len: usize) -> VemStatus {
    guard(|| {
        let mesh = &deref(mesh, "mesh")?.mesh;
        if xy.is_null() {
            return Err(null("xy"));
        }
        let need = 2 * mesh.num_vertices();
        if len < need {
            return Err(invalid(format!("buffer holds {len} doubles, {need} needed")));
        }
        let buf = std::slice::from_raw_parts_mut(xy, need);
        for (chunk, p) in buf.chunks_exact_mut(2).zip(mesh.vertices()) {
            chunk[0] = p.x;
            chunk[1] = p.y;
        }
        Ok(())
    })
}

/// Solves the built-in convection-diffusion-reaction problem on `mesh` with degree `k` (1..4).
///
/// `mode` is "standard" or "grad_pinabla"; null selects "standard". Errors are measured with
/// the gradient representative matching the mode.
///
/// # Safety
/// `mesh` must come from this library, `mode` be null or a NUL-terminated string, and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_solve_builtin(
    mesh: *const VemMesh,
    k: u32,
    mode: *const c_char,
    out: *mut *mut VemSolution,
) -> VemStatus {
    guard(|| {
        let mesh = &deref(mesh, "mesh")?.mesh;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode: Mode = if mode.is_null() { Mode::Standard } else { str_arg(mode, "mode")?.parse()? };
        if !(1..=4).contains(&k) {
            return Err(invalid(format!("k must be in 1..=4, got {k}")));
        }
        let gradient = match mode {
            Mode::Standard => GradientRepresentative::L2Projection,
            Mode::GradPiNabla => GradientRepresentative::GradPiNabla,
        };
        let problem = builtin_problem();
        let sol = solve_problem(mesh, &problem.coefficients, &*problem.exact, k as usize, mode, 2)?;
        let proj = project_solution(&sol.disc, &sol.dofs);
        let rec = solution_errors(mesh, &problem, &sol, &proj, gradient, POINT_OF_INTEREST)?;
        let handle = VemSolution {
            mesh: mesh.clone(),
            proj,
            n_dofs: rec.dofs,
            errors: VemErrors {
                l2_rel: rec.err_l2_rel,
                h1_rel: rec.err_h1_rel,
                point_rel: rec.err_point_rel,
            },
        };
        write_out(out, Box::into_raw(Box::new(handle)), "out")
    })
}

/// # Safety
/// `sol` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_solution_num_dofs(sol: *const VemSolution, out: *mut usize) -> VemStatus {
    guard(|| write_out(out, deref(sol, "solution")?.n_dofs, "out"))
}

/// # Safety
/// `sol` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_solution_errors(sol: *const VemSolution, out: *mut VemErrors) -> VemStatus {
    guard(|| write_out(out, deref(sol, "solution")?.errors, "out"))
}

/// Value of the projected discrete solution at `(x, y)`.
///
/// # Safety
/// `sol` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vem_solution_eval(sol: *const VemSolution, x: f64, y: f64, out: *mut f64) -> VemStatus {
    guard(|| {
        let sol = deref(sol, "solution")?;
        let p = Point::new(x, y);
        let cell = sol.mesh.locate(p).ok_or(VemError::PointOutside { x, y })?;
        write_out(out, sol.proj.value(cell, p), "out")
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `sol` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vem_solution_free(sol: *mut VemSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
