//! C ABI over the `plateau` solver.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_solve`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`PlateauStatus`]; on failure the message is kept per thread and
//! read back with [`plateau_last_error_message`]. Panics never unwind into C:
//! they are reported as [`PlateauStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use plateau::barrier::{hausdorff_to_cap, solve_plateau, FrozenSet, PlateauOptions, RunStatus};
use plateau::convex::{hausdorff_distance, ConvexBody};
use plateau::geom::{from_slice, Point};
use plateau::ma::{exact_solution, solve_dirichlet, GraphSolution, ProblemFile, SolveOptions};
use plateau::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateauStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Solver = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Convex body in the plane or in space.
pub struct PlateauBody(ConvexBody);

/// Dirichlet solution on its grid, with the closed-form error when known.
pub struct PlateauSolution {
    sol: GraphSolution,
    sup_error: f64,
}

/// Finished Plateau run.
pub struct PlateauRun(plateau::barrier::PlateauRun);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: PlateauStatus, msg: impl Into<String>) -> PlateauStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> PlateauStatus {
    let status = match e {
        Error::Parse(_) => PlateauStatus::Parse,
        Error::Domain(_) => PlateauStatus::InvalidArgument,
        _ => PlateauStatus::Solver,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`PlateauStatus::Panic`].
fn guard(f: impl FnOnce() -> PlateauStatus) -> PlateauStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PlateauStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(PlateauStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, PlateauStatus> {
    if p.is_null() {
        return Err(fail(PlateauStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PlateauStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn point(dim: usize, p: *const f64) -> Point {
    from_slice(slice::from_raw_parts(p, dim)).expect("dimension 2 or 3")
}

fn body_dim_ok(dim: usize) -> Result<(), PlateauStatus> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(fail(PlateauStatus::InvalidArgument, format!("dimension must be 2 or 3, got {dim}")))
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn plateau_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated)
/// and returns the buffer size it needs, or 0 when there is no error. Passing
/// a null `buf` or a short `len` only queries the size.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn plateau_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len >= bytes.len() {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
            }
            bytes.len()
        }
    })
}

/// Convex hull of `count` points with `dim` coordinates each, stored row by row.
///
/// # Safety
/// `coords` must hold `dim * count` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_from_points(
    dim: usize,
    coords: *const f64,
    count: usize,
    out: *mut *mut PlateauBody,
) -> PlateauStatus {
    guard(|| {
        non_null!(coords, out);
        if let Err(s) = body_dim_ok(dim) {
            return s;
        }
        let raw = slice::from_raw_parts(coords, dim * count);
        let pts: Vec<Point> = raw.chunks_exact(dim).map(|c| from_slice(c).expect("dimension checked")).collect();
        match ConvexBody::from_points(dim, &pts) {
            Ok(b) => {
                *out = Box::into_raw(Box::new(PlateauBody(b)));
                PlateauStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Geodesic polyhedron inscribed in the ball (`dim = 3`, `detail` = subdivision
/// level) or regular polygon inscribed in the disk (`dim = 2`, `detail` = vertices).
///
/// # Safety
/// `center` must hold `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_ball(
    dim: usize,
    center: *const f64,
    radius: f64,
    detail: u32,
    out: *mut *mut PlateauBody,
) -> PlateauStatus {
    guard(|| {
        non_null!(center, out);
        if let Err(s) = body_dim_ok(dim) {
            return s;
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return fail(PlateauStatus::InvalidArgument, "radius must be positive");
        }
        let c = point(dim, center);
        let body = if dim == 3 {
            if detail > 7 {
                return fail(PlateauStatus::InvalidArgument, "subdivision level must be at most 7");
            }
            ConvexBody::ball(c, radius, detail)
        } else {
            if detail < 3 {
                return fail(PlateauStatus::InvalidArgument, "a polygon needs at least 3 vertices");
            }
            ConvexBody::disk(c, radius, detail as usize)
        };
        *out = Box::into_raw(Box::new(PlateauBody(body)));
        PlateauStatus::Ok
    })
}

/// Releases a body; null is ignored.
///
/// # Safety
/// `body` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_free(body: *mut PlateauBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// # Safety
/// `body` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_dim(body: *const PlateauBody) -> usize {
    if body.is_null() {
        0
    } else {
        (*body).0.dim()
    }
}

/// Area (plane) or volume (space).
///
/// # Safety
/// `body` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_volume(body: *const PlateauBody, out: *mut f64) -> PlateauStatus {
    guard(|| {
        non_null!(body, out);
        *out = (*body).0.volume();
        PlateauStatus::Ok
    })
}

/// Signed distance (negative inside).
///
/// # Safety
/// `x` must hold as many values as the body's dimension; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_signed_distance(body: *const PlateauBody, x: *const f64, out: *mut f64) -> PlateauStatus {
    guard(|| {
        non_null!(body, x, out);
        let b = &(*body).0;
        *out = b.signed_distance(&point(b.dim(), x));
        PlateauStatus::Ok
    })
}

/// Nearest point of the body to `x` (x itself when inside).
///
/// # Safety
/// `x` and `out` must hold as many values as the body's dimension.
#[no_mangle]
pub unsafe extern "C" fn plateau_body_project(body: *const PlateauBody, x: *const f64, out: *mut f64) -> PlateauStatus {
    guard(|| {
        non_null!(body, x, out);
        let b = &(*body).0;
        let (_, p) = b.distance_and_project(&point(b.dim(), x));
        ptr::copy_nonoverlapping(p.as_ptr(), out, b.dim());
        PlateauStatus::Ok
    })
}

/// Hausdorff distance between two bodies (sum of the directed distances).
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_hausdorff(a: *const PlateauBody, b: *const PlateauBody, out: *mut f64) -> PlateauStatus {
    guard(|| {
        non_null!(a, b, out);
        match hausdorff_distance(&(*a).0, &(*b).0) {
            Ok(d) => {
                *out = d;
                PlateauStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Solves a Dirichlet problem given as TOML text. Relative barrier files
/// resolve against `base_dir` (null means the working directory).
///
/// # Safety
/// `toml` must be a NUL-terminated string, `base_dir` null or one; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_solve_toml(toml: *const c_char, base_dir: *const c_char, out: *mut *mut PlateauSolution) -> PlateauStatus {
    guard(|| {
        non_null!(out);
        let text = match c_str(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let base = if base_dir.is_null() {
            "."
        } else {
            match c_str(base_dir, "base_dir") {
                Ok(b) => b,
                Err(s) => return s,
            }
        };
        let prob = match ProblemFile::parse(text).and_then(|f| f.build(Path::new(base))) {
            Ok(p) => p,
            Err(e) => return from_core(e),
        };
        match solve_dirichlet(&prob, &SolveOptions::default()) {
            Ok(sol) => {
                let sup_error = exact_solution(&prob).map_or(f64::NAN, |f| sol.sup_error(&f));
                *out = Box::into_raw(Box::new(PlateauSolution { sol, sup_error }));
                PlateauStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Number of interior grid nodes.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plateau_solution_len(sol: *const PlateauSolution) -> usize {
    if sol.is_null() {
        0
    } else {
        (*sol).sol.grid.len()
    }
}

/// Copies node coordinates (`2 * len` values: x, y per node; y = 0 for
/// intervals) and values (`len` values). Either output may be null.
///
/// # Safety
/// `xy` must hold `2 * len` and `values` `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn plateau_solution_copy(sol: *const PlateauSolution, xy: *mut f64, values: *mut f64, len: usize) -> PlateauStatus {
    guard(|| {
        non_null!(sol);
        let s = &(*sol).sol;
        if len < s.grid.len() {
            return fail(PlateauStatus::BufferTooSmall, format!("need {} nodes, got room for {len}", s.grid.len()));
        }
        for (k, x) in s.grid.nodes.iter().enumerate() {
            if !xy.is_null() {
                *xy.add(2 * k) = x.x;
                *xy.add(2 * k + 1) = x.y;
            }
            if !values.is_null() {
                *values.add(k) = s.values[k];
            }
        }
        PlateauStatus::Ok
    })
}

/// Sup-norm error against the closed form, NaN when none is known.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plateau_solution_sup_error(sol: *const PlateauSolution) -> f64 {
    if sol.is_null() {
        f64::NAN
    } else {
        (*sol).sup_error
    }
}

/// Final residual of the discrete equation.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plateau_solution_residual(sol: *const PlateauSolution) -> f64 {
    if sol.is_null() {
        f64::NAN
    } else {
        (*sol).sol.diagnostics.residual
    }
}

/// # Safety
/// `sol` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn plateau_solution_free(sol: *mut PlateauSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Outcome of a Plateau run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateauRunStatus {
    Converged = 0,
    HausdorffStalled = 1,
    NoAdmissibleSite = 2,
    MaxIterations = 3,
}

/// Volume-minimising run on `body` (which is left untouched) with the frozen
/// set `⟨p, normal⟩ ≤ offset` held within `frozen_tol`, target curvature `k`
/// and at most `max_iters` excisions.
///
/// # Safety
/// `normal` must hold as many values as the body's dimension; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_new(
    body: *const PlateauBody,
    normal: *const f64,
    offset: f64,
    frozen_tol: f64,
    k: f64,
    max_iters: usize,
    out: *mut *mut PlateauRun,
) -> PlateauStatus {
    guard(|| {
        non_null!(body, normal, out);
        let b = (*body).0.clone();
        let frozen = match FrozenSet::half_space(point(b.dim(), normal), offset, frozen_tol) {
            Ok(f) => f,
            Err(e) => return from_core(e),
        };
        let opts = PlateauOptions { max_iters, ..PlateauOptions::default() };
        match solve_plateau(b, frozen, k, &opts) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(PlateauRun(run)));
                PlateauStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `run` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_status(run: *const PlateauRun, out: *mut PlateauRunStatus) -> PlateauStatus {
    guard(|| {
        non_null!(run, out);
        *out = match (*run).0.status {
            RunStatus::Converged => PlateauRunStatus::Converged,
            RunStatus::HausdorffStalled => PlateauRunStatus::HausdorffStalled,
            RunStatus::NoAdmissibleSite => PlateauRunStatus::NoAdmissibleSite,
            RunStatus::MaxIterations => PlateauRunStatus::MaxIterations,
        };
        PlateauStatus::Ok
    })
}

/// Number of recorded volumes (initial body plus one per excision).
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_volume_count(run: *const PlateauRun) -> usize {
    if run.is_null() {
        0
    } else {
        (*run).0.state.volumes().len()
    }
}

/// Copies the volume sequence.
///
/// # Safety
/// `out` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_volumes(run: *const PlateauRun, out: *mut f64, len: usize) -> PlateauStatus {
    guard(|| {
        non_null!(run, out);
        let v = (*run).0.state.volumes();
        if len < v.len() {
            return fail(PlateauStatus::BufferTooSmall, format!("need {} values, got room for {len}", v.len()));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        PlateauStatus::Ok
    })
}

/// Hausdorff distance of the free surface to the spherical cap of curvature
/// `k` spanning the round equator of radius `radius` at height 0.
///
/// # Safety
/// `run` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_cap_distance(run: *const PlateauRun, radius: f64, out: *mut f64) -> PlateauStatus {
    guard(|| {
        non_null!(run, out);
        *out = hausdorff_to_cap(&(*run).0.state, radius);
        PlateauStatus::Ok
    })
}

/// Copy of the final body as a new handle.
///
/// # Safety
/// `run` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_body(run: *const PlateauRun, out: *mut *mut PlateauBody) -> PlateauStatus {
    guard(|| {
        non_null!(run, out);
        *out = Box::into_raw(Box::new(PlateauBody((*run).0.state.body.clone())));
        PlateauStatus::Ok
    })
}

/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn plateau_run_free(run: *mut PlateauRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Runs the command line with `argc` arguments (the program name excluded)
/// and returns its exit code.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn plateau_cli_run(argc: usize, argv: *const *const c_char) -> i32 {
    let args: Option<Vec<String>> = if argc == 0 {
        Some(Vec::new())
    } else if argv.is_null() {
        None
    } else {
        slice::from_raw_parts(argv, argc).iter().map(|&a| c_str(a, "argv").ok().map(str::to_owned)).collect()
    };
    let Some(args) = args else {
        set_error("invalid argv");
        return plateau::cli::EXIT_PARSE;
    };
    catch_unwind(|| plateau::cli::run(std::iter::once("plateau".to_string()).chain(args))).unwrap_or(plateau::cli::EXIT_SOLVER)
}
