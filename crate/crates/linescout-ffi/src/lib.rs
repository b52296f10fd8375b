//! C ABI for the linescout library.
//!
//! Conventions: every function returns an [`LsStatus`] code (or a plain
//! value where failure is impossible), objects cross the boundary as opaque
//! handles freed by their matching `_free` function, and the last error
//! message is kept in thread-local storage readable via
//! [`ls_last_error_message`]. The header is generated by cbindgen into
//! `include/linescout.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use linescout::control_det::{run_det, DetRun};
use linescout::control_stoch::{run_stoch, StochConfig, StochRun};
use linescout::estimator::{
    bisector_estimate, estimation_error, max_margin_estimate, polygon_center_estimate, Estimate,
};
use linescout::geometry::{intercept_interval, slope_set};
use linescout::world::Scenario;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    ControllerStuck = 4,
    BeliefCollapse = 5,
    Io = 6,
    Estimator = 7,
    Internal = 8,
}

/// Estimator selector for result queries.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum LsEstimator {
    Bisector = 0,
    MaxMargin = 1,
    PolygonCenter = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque scenario handle.
pub struct LsScenario(Scenario);

/// Opaque result of a deterministic (noiseless) run.
pub struct LsDetRun {
    scenario: Scenario,
    run: DetRun,
}

/// Opaque result of a stochastic (noisy) run.
pub struct LsStochRun {
    scenario: Scenario,
    run: StochRun,
}

unsafe fn c_str<'a>(ptr: *const c_char) -> Result<&'a str, LsStatus> {
    if ptr.is_null() {
        set_error("null string");
        return Err(LsStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        LsStatus::InvalidArgument
    })
}

fn put<T>(out: *mut *mut T, value: T) -> LsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return LsStatus::NullPointer;
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    LsStatus::Ok
}

/// Load a scenario from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_file(
    path: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    let path = match c_str(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match Scenario::from_file(Path::new(path), &[]) {
        Ok(s) => put(out, LsScenario(s)),
        Err(e) => {
            set_error(&e.to_string());
            LsStatus::Validation
        }
    }
}

/// Parse a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    let text = match c_str(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match Scenario::from_toml_str(text) {
        Ok(s) => put(out, LsScenario(s)),
        Err(e) => {
            set_error(&e.to_string());
            LsStatus::Validation
        }
    }
}

/// Built-in noiseless default scenario.
#[no_mangle]
pub extern "C" fn ls_scenario_builtin_det(out: *mut *mut LsScenario) -> LsStatus {
    put(out, LsScenario(Scenario::builtin_det()))
}

/// Built-in noisy default scenario (keep probability 0.7).
#[no_mangle]
pub extern "C" fn ls_scenario_builtin_stoch(out: *mut *mut LsScenario) -> LsStatus {
    put(out, LsScenario(Scenario::builtin_stoch()))
}

/// Replace the scenario seed.
///
/// # Safety
/// `scenario` must be a live handle from a `ls_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_set_seed(scenario: *mut LsScenario, seed: u64) -> LsStatus {
    let Some(s) = scenario.as_mut() else {
        set_error("null scenario");
        return LsStatus::NullPointer;
    };
    s.0.seed = seed;
    LsStatus::Ok
}

/// Replace the horizon (number of control steps).
///
/// # Safety
/// `scenario` must be a live handle from a `ls_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_set_horizon(
    scenario: *mut LsScenario,
    horizon: usize,
) -> LsStatus {
    let Some(s) = scenario.as_mut() else {
        set_error("null scenario");
        return LsStatus::NullPointer;
    };
    s.0.horizon = horizon;
    LsStatus::Ok
}

/// # Safety
/// `scenario` must come from a `ls_scenario_*` constructor and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_free(scenario: *mut LsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Execute the noiseless sampling loop.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_run_det(
    scenario: *const LsScenario,
    out: *mut *mut LsDetRun,
) -> LsStatus {
    let Some(s) = scenario.as_ref() else {
        set_error("null scenario");
        return LsStatus::NullPointer;
    };
    match run_det(&s.0) {
        Ok(run) => put(
            out,
            LsDetRun {
                scenario: s.0.clone(),
                run,
            },
        ),
        Err(e) => {
            set_error(&e.to_string());
            LsStatus::ControllerStuck
        }
    }
}

/// Number of trajectory rows (horizon + 1).
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_det_run_len(run: *const LsDetRun) -> usize {
    run.as_ref().map_or(0, |r| r.run.trajectory.len())
}

/// Read one trajectory row.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null to skip fields.
#[no_mangle]
pub unsafe extern "C" fn ls_det_run_state(
    run: *const LsDetRun,
    index: usize,
    x: *mut f64,
    z: *mut f64,
    theta: *mut f64,
    observed: *mut i32,
) -> LsStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return LsStatus::NullPointer;
    };
    let Some(tp) = r.run.trajectory.get(index) else {
        set_error("trajectory index out of range");
        return LsStatus::InvalidArgument;
    };
    if !x.is_null() {
        *x = tp.state.x;
    }
    if !z.is_null() {
        *z = tp.state.z;
    }
    if !theta.is_null() {
        *theta = tp.state.theta;
    }
    if !observed.is_null() {
        *observed = tp.observed as i32;
    }
    LsStatus::Ok
}

fn det_estimate(r: &LsDetRun, which: LsEstimator) -> Result<Estimate, String> {
    match which {
        LsEstimator::Bisector => {
            bisector_estimate(&r.run.dataset, r.scenario.min_pair_separation())
                .map_err(|e| e.to_string())
        }
        LsEstimator::MaxMargin => max_margin_estimate(&r.run.dataset)
            .map(|(e, _)| e)
            .map_err(|e| e.to_string()),
        LsEstimator::PolygonCenter => {
            polygon_center_estimate(&r.run.polygon).map_err(|e| e.to_string())
        }
    }
}

/// Line estimate from a finished run, with errors against the hidden truth.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null to skip fields.
#[no_mangle]
pub unsafe extern "C" fn ls_det_run_estimate(
    run: *const LsDetRun,
    which: LsEstimator,
    rho: *mut f64,
    c: *mut f64,
    dtheta: *mut f64,
    dc: *mut f64,
) -> LsStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return LsStatus::NullPointer;
    };
    match det_estimate(r, which) {
        Ok(e) => {
            let (dt, dcm) = estimation_error(&e, &r.scenario.classifier);
            if !rho.is_null() {
                *rho = e.rho;
            }
            if !c.is_null() {
                *c = e.c;
            }
            if !dtheta.is_null() {
                *dtheta = dt;
            }
            if !dc.is_null() {
                *dc = dcm;
            }
            LsStatus::Ok
        }
        Err(msg) => {
            set_error(&msg);
            LsStatus::Estimator
        }
    }
}

/// Slope bounds (radians) of the final version space.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null to skip fields.
#[no_mangle]
pub unsafe extern "C" fn ls_det_run_slope_bounds(
    run: *const LsDetRun,
    theta_lo: *mut f64,
    theta_hi: *mut f64,
) -> LsStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return LsStatus::NullPointer;
    };
    let Some(hull) = slope_set(&r.run.polygon).hull() else {
        set_error("empty version space");
        return LsStatus::Internal;
    };
    if !theta_lo.is_null() {
        *theta_lo = hull.lo;
    }
    if !theta_hi.is_null() {
        *theta_hi = hull.hi;
    }
    LsStatus::Ok
}

/// Intercept bounds (meters) of the final version space.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null to skip fields.
#[no_mangle]
pub unsafe extern "C" fn ls_det_run_intercept_bounds(
    run: *const LsDetRun,
    c_lo: *mut f64,
    c_hi: *mut f64,
) -> LsStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return LsStatus::NullPointer;
    };
    let Some(iv) = intercept_interval(&r.run.polygon) else {
        set_error("empty version space");
        return LsStatus::Internal;
    };
    if !c_lo.is_null() {
        *c_lo = iv.lo;
    }
    if !c_hi.is_null() {
        *c_hi = iv.hi;
    }
    LsStatus::Ok
}

/// # Safety
/// `run` must come from [`ls_run_det`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_det_run_free(run: *mut LsDetRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Execute the noisy sampling loop with the given hypothesis weight floor
/// (pass a negative value for the default 0.05).
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_run_stoch(
    scenario: *const LsScenario,
    weight_floor: f64,
    out: *mut *mut LsStochRun,
) -> LsStatus {
    let Some(s) = scenario.as_ref() else {
        set_error("null scenario");
        return LsStatus::NullPointer;
    };
    let cfg = if weight_floor < 0.0 {
        StochConfig::default()
    } else {
        match StochConfig::new(weight_floor) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return LsStatus::InvalidArgument;
            }
        }
    };
    match run_stoch(&s.0, &cfg) {
        Ok(run) => put(
            out,
            LsStochRun {
                scenario: s.0.clone(),
                run,
            },
        ),
        Err(e) => {
            use linescout::control_stoch::StochError;
            let status = match &e {
                StochError::Belief(_) => LsStatus::BeliefCollapse,
                StochError::MissingNoise | StochError::Scenario(_) => LsStatus::Validation,
                StochError::Control(_) => LsStatus::ControllerStuck,
            };
            set_error(&e.to_string());
            status
        }
    }
}

/// Number of surviving hypotheses.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_stoch_run_hypothesis_count(run: *const LsStochRun) -> usize {
    run.as_ref().map_or(0, |r| r.run.belief.hypotheses.len())
}

/// Maximum-posterior report: slope interval (radians), intercept interval
/// and posterior probability.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null to skip fields.
#[no_mangle]
pub unsafe extern "C" fn ls_stoch_run_map_report(
    run: *const LsStochRun,
    theta_lo: *mut f64,
    theta_hi: *mut f64,
    c_lo: *mut f64,
    c_hi: *mut f64,
    probability: *mut f64,
) -> LsStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return LsStatus::NullPointer;
    };
    let (Some(slope), Some(ic)) = (&r.run.report.slope, &r.run.report.intercept) else {
        set_error("report has empty intervals");
        return LsStatus::Internal;
    };
    if !theta_lo.is_null() {
        *theta_lo = slope.lo;
    }
    if !theta_hi.is_null() {
        *theta_hi = slope.hi;
    }
    if !c_lo.is_null() {
        *c_lo = ic.lo;
    }
    if !c_hi.is_null() {
        *c_hi = ic.hi;
    }
    if !probability.is_null() {
        *probability = r.run.report.probability;
    }
    LsStatus::Ok
}

/// Credible parameter bounds at the given level, with the attained
/// cumulative probability and whether the hidden truth is covered.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null to skip fields.
#[no_mangle]
pub unsafe extern "C" fn ls_stoch_run_credible(
    run: *const LsStochRun,
    level: f64,
    theta_lo: *mut f64,
    theta_hi: *mut f64,
    c_lo: *mut f64,
    c_hi: *mut f64,
    attained: *mut f64,
    covers_truth: *mut bool,
) -> LsStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return LsStatus::NullPointer;
    };
    if !(level > 0.0 && level <= 1.0) {
        set_error("level must lie in (0, 1]");
        return LsStatus::InvalidArgument;
    }
    let cs = r.run.belief.credible_sets(level);
    let (Some(hull), Some(ic)) = (cs.slopes.hull(), cs.intercept) else {
        set_error("credible set is empty");
        return LsStatus::Internal;
    };
    if !theta_lo.is_null() {
        *theta_lo = hull.lo;
    }
    if !theta_hi.is_null() {
        *theta_hi = hull.hi;
    }
    if !c_lo.is_null() {
        *c_lo = ic.lo;
    }
    if !c_hi.is_null() {
        *c_hi = ic.hi;
    }
    if !attained.is_null() {
        *attained = cs.attained;
    }
    if !covers_truth.is_null() {
        *covers_truth = cs.slopes.contains(r.scenario.classifier.theta())
            && ic.contains(r.scenario.classifier.c);
    }
    LsStatus::Ok
}

/// # Safety
/// `run` must come from [`ls_run_stoch`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_stoch_run_free(run: *mut LsStochRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
