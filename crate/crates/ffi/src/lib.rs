//! C interface.
//!
//! Every call returns a [`SysriskStatus`]; results go through out-pointers.
//! Objects are opaque and must be released with their `_free` function.
//! The message of the last failure on the calling thread is available from
//! [`sysrisk_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sysrisk::analytic::{clearing_limit, thresholds};
use sysrisk::harness::output::emit_trajectory_csv;
use sysrisk::harness::presets;
use sysrisk::odeflow::{FlowField, OdeState};
use sysrisk::replicator::{run_simulation, SimConfig, Trajectory};
use sysrisk::{DynamicsParams, Error, MarketParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SysriskStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    Io = 4,
    Panic = 5,
}

/// Market parameters.
pub struct SysriskMarket(MarketParams);

/// Replicator dynamics parameters.
pub struct SysriskDynamics(DynamicsParams);

/// One simulated run.
pub struct SysriskTrajectory(Trajectory);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SysriskThresholds {
    pub default_onset: f64,
    pub systemic_onset: f64,
    pub switch_point: f64,
    pub outside_theory: bool,
}

/// Population state after a number of rounds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SysriskRound {
    pub round: u64,
    pub n: u64,
    pub n1: u64,
    pub eps: f64,
    pub psi: f64,
    pub default_frac: f64,
    pub departures: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> SysriskStatus {
    match err {
        Error::InvalidParameter { .. } | Error::OutOfDomain { .. } | Error::Config(_) => {
            SysriskStatus::InvalidArgument
        }
        Error::Degenerate(_) | Error::StepRejected { .. } => SysriskStatus::NumericalFailure,
        Error::Io(_) | Error::Json(_) => SysriskStatus::Io,
    }
}

/// Runs `f`, recording the failure message and turning panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (SysriskStatus, String)>) -> SysriskStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SysriskStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SysriskStatus::Panic
        }
    }
}

fn lib<T>(r: sysrisk::Result<T>) -> Result<T, (SysriskStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (SysriskStatus, String) {
    (SysriskStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (SysriskStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (SysriskStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, (SysriskStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SysriskStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sysrisk_status_message(status: SysriskStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SysriskStatus::Ok => c"ok",
        SysriskStatus::NullPointer => c"null pointer argument",
        SysriskStatus::InvalidArgument => c"invalid argument",
        SysriskStatus::NumericalFailure => c"numerical failure",
        SysriskStatus::Io => c"i/o error",
        SysriskStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message of the last failed call on this thread (empty if none). The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sysrisk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out_market` must be a valid pointer to writable storage for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sysrisk_market_new(
    wealth: f64,
    senior_debt: f64,
    interbank_fraction: f64,
    up_probability: f64,
    up_rate: f64,
    down_rate: f64,
    safe_rate: f64,
    borrow_rate: f64,
    link_probability: f64,
    out_market: *mut *mut SysriskMarket,
) -> SysriskStatus {
    guard(|| {
        let slot = out(out_market, "out_market")?;
        let m = lib(MarketParams::new(
            wealth,
            senior_debt,
            interbank_fraction,
            up_probability,
            up_rate,
            down_rate,
            safe_rate,
            borrow_rate,
            link_probability,
        ))?;
        *slot = Box::into_raw(Box::new(SysriskMarket(m)));
        Ok(())
    })
}

/// Builds the market and dynamics of a preset row (`"t2-r1"`, `"t4-r3-stay"`, ...).
/// Either out-pointer may be null if that half is not wanted.
///
/// # Safety
/// `id` must be a NUL-terminated string; non-null out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_preset(
    id: *const c_char,
    out_market: *mut *mut SysriskMarket,
    out_dynamics: *mut *mut SysriskDynamics,
) -> SysriskStatus {
    guard(|| {
        let id = text(id, "id")?;
        let row = presets::find_row(id)
            .ok_or_else(|| (SysriskStatus::InvalidArgument, format!("unknown preset `{id}`")))?;
        if let Some(slot) = out_market.as_mut() {
            *slot = Box::into_raw(Box::new(SysriskMarket(row.market)));
        }
        if let Some(slot) = out_dynamics.as_mut() {
            *slot = Box::into_raw(Box::new(SysriskDynamics(row.dynamics)));
        }
        Ok(())
    })
}

/// # Safety
/// `market` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_market_free(market: *mut SysriskMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Dynamics with count bounds of twice the rounded-up mean; departures are
/// on when `mean_departure_cap > 0`.
///
/// # Safety
/// `out_dynamics` must be a valid pointer to writable storage for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sysrisk_dynamics_new(
    mean_arrivals: f64,
    mean_switch_attempts: f64,
    mean_departure_cap: f64,
    arrival_accuracy: f64,
    switch_accuracy: f64,
    initial_population: u64,
    initial_fraction: f64,
    rounds: u64,
    out_dynamics: *mut *mut SysriskDynamics,
) -> SysriskStatus {
    guard(|| {
        let slot = out(out_dynamics, "out_dynamics")?;
        let d = lib(DynamicsParams::new(
            mean_arrivals,
            mean_switch_attempts,
            mean_departure_cap,
            arrival_accuracy,
            switch_accuracy,
            initial_population,
            initial_fraction,
            rounds,
        ))?;
        *slot = Box::into_raw(Box::new(SysriskDynamics(d)));
        Ok(())
    })
}

/// # Safety
/// `dynamics` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_dynamics_free(dynamics: *mut SysriskDynamics) {
    if !dynamics.is_null() {
        drop(Box::from_raw(dynamics));
    }
}

/// # Safety
/// `market` must be a live handle and `out_thresholds` writable.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_thresholds(
    market: *const SysriskMarket,
    out_thresholds: *mut SysriskThresholds,
) -> SysriskStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let slot = out(out_thresholds, "out_thresholds")?;
        let th = lib(thresholds(&m.0))?;
        *slot = SysriskThresholds {
            default_onset: th.default_onset,
            systemic_onset: th.systemic_onset,
            switch_point: th.switch_point,
            outside_theory: th.outside_theory,
        };
        Ok(())
    })
}

/// Large-network mean payment and default probability of a risky agent.
///
/// # Safety
/// `market` must be a live handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_clearing_limit(
    market: *const SysriskMarket,
    eps: f64,
    out_mean_payment: *mut f64,
    out_default_probability: *mut f64,
) -> SysriskStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let x = out(out_mean_payment, "out_mean_payment")?;
        let pd = out(out_default_probability, "out_default_probability")?;
        let lim = lib(clearing_limit(&m.0, eps))?;
        *x = lim.x_bar;
        *pd = lim.p_d;
        Ok(())
    })
}

/// Exact flow state at time `t` from `(eps0, psi0)`, departures as configured.
///
/// # Safety
/// Handles must be live; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_flow_at(
    market: *const SysriskMarket,
    dynamics: *const SysriskDynamics,
    eps0: f64,
    psi0: f64,
    t: f64,
    out_eps: *mut f64,
    out_psi: *mut f64,
) -> SysriskStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let d = deref(dynamics, "dynamics")?;
        let e = out(out_eps, "out_eps")?;
        let p = out(out_psi, "out_psi")?;
        let flow = lib(FlowField::new(&m.0, &d.0))?;
        let s = lib(flow.advance(OdeState { t: 0.0, eps: eps0, psi: psi0 }, t))?;
        *e = s.eps;
        *p = s.psi;
        Ok(())
    })
}

/// Runs the agent-based process with default options.
///
/// # Safety
/// Handles must be live; `out_trajectory` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_simulate(
    market: *const SysriskMarket,
    dynamics: *const SysriskDynamics,
    seed: u64,
    out_trajectory: *mut *mut SysriskTrajectory,
) -> SysriskStatus {
    guard(|| {
        let m = deref(market, "market")?;
        let d = deref(dynamics, "dynamics")?;
        let slot = out(out_trajectory, "out_trajectory")?;
        let t = lib(run_simulation(&SimConfig::new(m.0, d.0), seed))?;
        *slot = Box::into_raw(Box::new(SysriskTrajectory(t)));
        Ok(())
    })
}

/// Number of recorded rounds (0 for a null handle).
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_trajectory_len(trajectory: *const SysriskTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.records.len())
}

/// # Safety
/// `trajectory` must be a live handle and `out_round` writable.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_trajectory_round(
    trajectory: *const SysriskTrajectory,
    index: usize,
    out_round: *mut SysriskRound,
) -> SysriskStatus {
    guard(|| {
        let t = deref(trajectory, "trajectory")?;
        let slot = out(out_round, "out_round")?;
        let r = t.0.records.get(index).ok_or_else(|| {
            (
                SysriskStatus::InvalidArgument,
                format!("round index {index} out of range ({} rounds)", t.0.records.len()),
            )
        })?;
        *slot = SysriskRound {
            round: r.round,
            n: r.n as u64,
            n1: r.n1 as u64,
            eps: r.eps,
            psi: r.psi,
            default_frac: r.default_frac,
            departures: r.departures,
        };
        Ok(())
    })
}

/// Writes the run in the CLI's trajectory CSV format.
///
/// # Safety
/// `trajectory` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_trajectory_write_csv(
    trajectory: *const SysriskTrajectory,
    path: *const c_char,
) -> SysriskStatus {
    guard(|| {
        let t = deref(trajectory, "trajectory")?;
        let path = text(path, "path")?;
        lib(emit_trajectory_csv(&t.0, Path::new(path)))
    })
}

/// # Safety
/// `trajectory` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sysrisk_trajectory_free(trajectory: *mut SysriskTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}
