//! C interface to the fpddp solver.
//!
//! Problems and results are opaque handles created and released by this
//! library. Every fallible function returns an [`FpddpErrorCode`]; the
//! message of the last failure on the calling thread is available from
//! [`fpddp_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fpddp::baselines::{solve_dms, solve_dss, DmsSettings};
use fpddp::problems::{instantiate_by_name, ProblemInstance, ProblemParams};
use fpddp::{solve, Error, SolveResult, SolveStatus, SolverSettings};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpddpErrorCode {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    UnknownSolver = 4,
    SolverError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpddpStatus {
    Feasible = 0,
    Stationary = 1,
    MaxIter = 2,
    RegFailure = 3,
}

/// Solver selector for [`fpddp_solve`].
pub const FPDDP_SOLVER_FPDDP: i32 = 0;
pub const FPDDP_SOLVER_DSS: i32 = 1;
pub const FPDDP_SOLVER_DMS: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpddpSettings {
    pub armijo: f64,
    pub min_step: f64,
    pub feasibility_tol: f64,
    pub stationarity_tol: f64,
    pub mu_min: f64,
    pub mu_init: f64,
    pub mu_factor: f64,
    pub max_iter: u32,
    pub max_reg_restarts: u32,
}

impl From<FpddpSettings> for SolverSettings {
    fn from(s: FpddpSettings) -> Self {
        SolverSettings {
            armijo: s.armijo,
            min_step: s.min_step,
            feasibility_tol: s.feasibility_tol,
            stationarity_tol: s.stationarity_tol,
            mu_min: s.mu_min,
            mu_init: s.mu_init,
            mu_factor: s.mu_factor,
            max_iter: s.max_iter as usize,
            max_reg_restarts: s.max_reg_restarts as usize,
        }
    }
}

/// Opaque problem handle.
pub struct FpddpProblem {
    instance: ProblemInstance,
}

/// Opaque result handle.
pub struct FpddpResult {
    result: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(code: FpddpErrorCode, msg: impl Into<String>) -> FpddpErrorCode {
    set_error(msg.into());
    code
}

fn from_error(e: Error) -> FpddpErrorCode {
    let code = match e {
        Error::UnknownProblem(_) => FpddpErrorCode::UnknownProblem,
        Error::UnknownSolver(_) => FpddpErrorCode::UnknownSolver,
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => {
            FpddpErrorCode::InvalidArgument
        }
        _ => FpddpErrorCode::SolverError,
    };
    fail(code, e.to_string())
}

fn guarded(f: impl FnOnce() -> FpddpErrorCode) -> FpddpErrorCode {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => fail(FpddpErrorCode::Panic, "internal panic"),
    }
}

/// Message of the last failure on this thread, empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fpddp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn fpddp_settings_default() -> FpddpSettings {
    let d = SolverSettings::default();
    FpddpSettings {
        armijo: d.armijo,
        min_step: d.min_step,
        feasibility_tol: d.feasibility_tol,
        stationarity_tol: d.stationarity_tol,
        mu_min: d.mu_min,
        mu_init: d.mu_init,
        mu_factor: d.mu_factor,
        max_iter: d.max_iter as u32,
        max_reg_restarts: d.max_reg_restarts as u32,
    }
}

/// Creates a registered problem with its default initial guess.
/// `obstacle` is the cart pendulum obstacle position; pass NaN for the
/// default or for problems without one.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpddp_problem_new(
    name: *const c_char,
    obstacle: f64,
    out: *mut *mut FpddpProblem,
) -> FpddpErrorCode {
    guarded(|| {
        if name.is_null() || out.is_null() {
            return fail(FpddpErrorCode::NullPointer, "null argument");
        }
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            return fail(FpddpErrorCode::InvalidArgument, "problem name is not UTF-8");
        };
        let params = ProblemParams {
            obstacle: if obstacle.is_nan() {
                None
            } else {
                Some(obstacle)
            },
        };
        match instantiate_by_name(name, params) {
            Ok(instance) => {
                *out = Box::into_raw(Box::new(FpddpProblem { instance }));
                FpddpErrorCode::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `problem` must come from [`fpddp_problem_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fpddp_problem_free(problem: *mut FpddpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fpddp_problem_dims(
    problem: *const FpddpProblem,
    state_dim: *mut usize,
    control_dim: *mut usize,
    horizon: *mut usize,
) -> FpddpErrorCode {
    guarded(|| {
        if problem.is_null() || state_dim.is_null() || control_dim.is_null() || horizon.is_null() {
            return fail(FpddpErrorCode::NullPointer, "null argument");
        }
        let model = &(*problem).instance.model;
        *state_dim = model.state_dim();
        *control_dim = model.control_dim();
        *horizon = model.horizon();
        FpddpErrorCode::Ok
    })
}

/// Solves from the problem's default initial guess.
///
/// `solver` is one of the `FPDDP_SOLVER_*` values; `sigma` is the penalty
/// weight and only read for `FPDDP_SOLVER_DMS`. A null `settings` uses the
/// defaults.
///
/// # Safety
/// `problem` must be a live handle, `settings` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fpddp_solve(
    problem: *const FpddpProblem,
    solver: i32,
    sigma: f64,
    settings: *const FpddpSettings,
    out: *mut *mut FpddpResult,
) -> FpddpErrorCode {
    guarded(|| {
        if problem.is_null() || out.is_null() {
            return fail(FpddpErrorCode::NullPointer, "null argument");
        }
        let instance = &(*problem).instance;
        let settings: SolverSettings = if settings.is_null() {
            SolverSettings::default()
        } else {
            (*settings).into()
        };
        let model = instance.model.as_ref();
        let result = match solver {
            FPDDP_SOLVER_FPDDP => solve(model, &instance.guess, &settings),
            FPDDP_SOLVER_DSS => solve_dss(model, &instance.guess, &settings),
            FPDDP_SOLVER_DMS => solve_dms(
                model,
                &instance.guess,
                &DmsSettings {
                    sigma,
                    solver: settings,
                },
            ),
            other => {
                return fail(
                    FpddpErrorCode::UnknownSolver,
                    format!("unknown solver {other}"),
                )
            }
        };
        match result {
            Ok(result) => {
                *out = Box::into_raw(Box::new(FpddpResult { result }));
                FpddpErrorCode::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `result` must come from [`fpddp_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fpddp_result_free(result: *mut FpddpResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Summary numbers of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpddpSummary {
    pub status: FpddpStatus,
    pub iterations: u32,
    pub hessian_evals: u32,
    pub objective: f64,
    pub kkt: f64,
    pub defect: f64,
}

/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fpddp_result_summary(
    result: *const FpddpResult,
    out: *mut FpddpSummary,
) -> FpddpErrorCode {
    guarded(|| {
        if result.is_null() || out.is_null() {
            return fail(FpddpErrorCode::NullPointer, "null argument");
        }
        let r = &(*result).result;
        *out = FpddpSummary {
            status: match r.status {
                SolveStatus::Feasible => FpddpStatus::Feasible,
                SolveStatus::Stationary => FpddpStatus::Stationary,
                SolveStatus::MaxIter => FpddpStatus::MaxIter,
                SolveStatus::RegFailure => FpddpStatus::RegFailure,
            },
            iterations: r.iterations as u32,
            hessian_evals: r.hessian_evals as u32,
            objective: r.objective,
            kkt: r.kkt,
            defect: r.defect,
        };
        FpddpErrorCode::Ok
    })
}

unsafe fn copy_rows<'a>(
    rows: impl ExactSizeIterator<Item = &'a [f64]>,
    width: usize,
    buffer: *mut f64,
    len: usize,
) -> FpddpErrorCode {
    let needed = rows.len() * width;
    if len < needed {
        return fail(
            FpddpErrorCode::BufferTooSmall,
            format!("buffer holds {len} values, need {needed}"),
        );
    }
    if needed > 0 && buffer.is_null() {
        return fail(FpddpErrorCode::NullPointer, "null buffer");
    }
    for (i, row) in rows.enumerate() {
        ptr::copy_nonoverlapping(row.as_ptr(), buffer.add(i * width), width);
    }
    FpddpErrorCode::Ok
}

/// Copies the `(horizon + 1) × state_dim` states, row by row, into `buffer`.
///
/// # Safety
/// `result` must be a live handle and `buffer` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fpddp_result_states(
    result: *const FpddpResult,
    buffer: *mut f64,
    len: usize,
) -> FpddpErrorCode {
    guarded(|| {
        if result.is_null() {
            return fail(FpddpErrorCode::NullPointer, "null argument");
        }
        let t = &(*result).result.trajectory;
        let width = t.states[0].len();
        copy_rows(t.states.iter().map(|x| x.as_slice()), width, buffer, len)
    })
}

/// Copies the `horizon × control_dim` controls, row by row, into `buffer`.
///
/// # Safety
/// `result` must be a live handle and `buffer` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn fpddp_result_controls(
    result: *const FpddpResult,
    buffer: *mut f64,
    len: usize,
) -> FpddpErrorCode {
    guarded(|| {
        if result.is_null() {
            return fail(FpddpErrorCode::NullPointer, "null argument");
        }
        let t = &(*result).result.trajectory;
        let width = t.controls.first().map_or(0, |u| u.len());
        copy_rows(t.controls.iter().map(|u| u.as_slice()), width, buffer, len)
    })
}
