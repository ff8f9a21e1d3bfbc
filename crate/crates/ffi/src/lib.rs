//! C interface to the cagecurrent simulator.
//!
//! A `CcSimulation` is built from TOML configuration text and owned by the
//! caller until `cc_simulation_free`. Every fallible function returns a
//! `CcStatus`; on failure the message is available from `cc_last_error`
//! on the calling thread. Panics are caught at the boundary and reported
//! as `CC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cagecurrent::beam;
use cagecurrent::cli::scan::{Offset, Record, RunPlan};
use cagecurrent::cli::RunConfig;
use cagecurrent::dynamics::ExcitationState;
use cagecurrent::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Parameter = 4,
    Numerical = 5,
    Io = 6,
    OutOfRange = 7,
    /// A point query was made before `cc_simulation_excite`.
    NotExcited = 8,
    Panic = 9,
}

/// Observables at one scan point. `rho_ratio` is NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CcRecord {
    pub charge: i32,
    pub omega_ev: f64,
    pub rho_ratio: f64,
    pub rho0_nm: f64,
    pub mz_au: f64,
    pub mz_mub: f64,
    pub b_center_ut: f64,
    pub transverse_moment_au: f64,
    pub validity: f64,
    pub j_rho: f64,
    pub j_phi: f64,
    pub j_z: f64,
    /// 1 when at least one matrix element survives cancellation.
    pub coupled: u8,
}

/// Opaque simulation handle.
pub struct CcSimulation {
    plan: RunPlan,
    records: Vec<Record>,
    excitation: Option<ExcitationState>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(error: &Error) -> CcStatus {
    match error {
        Error::Config(_) | Error::Parse { .. } | Error::Normalization { .. } => CcStatus::Config,
        Error::Parameter { .. } | Error::InvalidDegree { .. } | Error::Range { .. } | Error::UndefinedForZeroCharge => {
            CcStatus::Parameter
        }
        Error::SingularOrigin | Error::StepSize { .. } | Error::Convergence(_) => CcStatus::Numerical,
        Error::Io(_) => CcStatus::Io,
    }
}

/// Runs `body`, converting errors and panics to a status.
fn guard(body: impl FnOnce() -> Result<(), (CcStatus, String)>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            CcStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&text);
            CcStatus::Panic
        }
    }
}

fn core<T>(r: cagecurrent::Result<T>) -> Result<T, (CcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (CcStatus, String)> {
    if p.is_null() {
        Err((CcStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

fn offset_of(rho0_nm: f64, rho_ratio: f64) -> Offset {
    if rho_ratio.is_nan() {
        Offset::Nm(rho0_nm)
    } else {
        Offset::Ratio(rho_ratio)
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a simulation from TOML text. An empty string selects the defaults.
///
/// # Safety
/// `config_toml` must be a valid NUL-terminated string and `out` a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cc_simulation_new(config_toml: *const c_char, out: *mut *mut CcSimulation) -> CcStatus {
    guard(|| {
        non_null(config_toml, "config_toml")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|e| (CcStatus::InvalidUtf8, e.to_string()))?;
        let config = core(RunConfig::from_toml(text))?;
        let plan = core(RunPlan::new(&config))?;
        *out = Box::into_raw(Box::new(CcSimulation {
            plan,
            records: Vec::new(),
            excitation: None,
        }));
        Ok(())
    })
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `sim` must come from `cc_simulation_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cc_simulation_free(sim: *mut CcSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Evaluates every configured scan point and stores the records.
///
/// # Safety
/// `sim` must be a live handle; `count` may be null.
#[no_mangle]
pub unsafe extern "C" fn cc_simulation_evaluate(sim: *mut CcSimulation, count: *mut usize) -> CcStatus {
    guard(|| {
        non_null(sim, "sim")?;
        let sim = &mut *sim;
        sim.records = core(sim.plan.evaluate())?;
        if !count.is_null() {
            *count = sim.records.len();
        }
        Ok(())
    })
}

/// Copies record `index` from the last evaluation.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cc_simulation_record(sim: *const CcSimulation, index: usize, out: *mut CcRecord) -> CcStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        let sim = &*sim;
        let r = sim.records.get(index).ok_or_else(|| {
            (
                CcStatus::OutOfRange,
                format!("record {index} requested, {} available", sim.records.len()),
            )
        })?;
        *out = CcRecord {
            charge: r.charge,
            omega_ev: r.omega_ev,
            rho_ratio: r.rho_ratio.unwrap_or(f64::NAN),
            rho0_nm: r.rho0_nm,
            mz_au: r.mz_au,
            mz_mub: r.mz_mub,
            b_center_ut: r.b_center_ut,
            transverse_moment_au: r.transverse_moment_au,
            validity: r.validity,
            j_rho: r.norms.rho,
            j_phi: r.norms.phi,
            j_z: r.norms.z,
            coupled: r.coupled as u8,
        };
        Ok(())
    })
}

/// Computes and keeps the post-pulse state for one beam placement, for
/// later point queries. The axis is placed at `rho_ratio * rho_max` unless
/// `rho_ratio` is NaN, in which case `rho0_nm` is used.
///
/// # Safety
/// `sim` must be a live handle; `validity` may be null.
#[no_mangle]
pub unsafe extern "C" fn cc_simulation_excite(
    sim: *mut CcSimulation,
    charge: i32,
    omega_ev: f64,
    rho0_nm: f64,
    rho_ratio: f64,
    validity: *mut f64,
) -> CcStatus {
    guard(|| {
        non_null(sim, "sim")?;
        let sim = &mut *sim;
        if !(omega_ev.is_finite() && omega_ev > 0.0) {
            return Err((CcStatus::Parameter, format!("omega_ev must be positive, got {omega_ev}")));
        }
        let omega = cagecurrent::numerics::PhysicalConstants::default().ev_to_hartree(omega_ev);
        let pulse = core(sim.plan.pulse(charge, offset_of(rho0_nm, rho_ratio), omega))?;
        let ts = core(sim.plan.model.transition_set(&pulse))?;
        let ex = core(sim.plan.model.excite(&ts, &pulse))?;
        if !validity.is_null() {
            *validity = ex.validity;
        }
        sim.excitation = Some(ex);
        Ok(())
    })
}

/// DC current density (a.u., configured sign convention) at a point in
/// bohr, for the state from the last `cc_simulation_excite`.
///
/// # Safety
/// `sim` must be a live handle, `point` must hold 3 doubles and `out` room
/// for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn cc_simulation_current(sim: *const CcSimulation, point: *const f64, out: *mut f64) -> CcStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(point, "point")?;
        non_null(out, "out")?;
        let sim = &*sim;
        let ex = sim
            .excitation
            .as_ref()
            .ok_or((CcStatus::NotExcited, "no excitation; call cc_simulation_excite first".to_string()))?;
        let p = std::slice::from_raw_parts(point, 3);
        let j = core(sim.plan.model.evaluator(ex).at([p[0], p[1], p[2]]))?;
        let sign = sim.plan.config().numerics.convention.sign();
        let out = std::slice::from_raw_parts_mut(out, 3);
        for (o, v) in out.iter_mut().zip(j) {
            *o = sign * v;
        }
        Ok(())
    })
}

/// Radius of peak beam intensity, in the units of `waist`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_rho_max(charge: i32, waist: f64, out: *mut f64) -> CcStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = core(beam::rho_max(charge, waist))?;
        Ok(())
    })
}

/// Envelope width parameter (a.u.) for an intensity FWHM in femtoseconds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_delta_from_fwhm(fwhm_fs: f64, out: *mut f64) -> CcStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(fwhm_fs.is_finite() && fwhm_fs > 0.0) {
            return Err((CcStatus::Parameter, format!("fwhm_fs must be positive, got {fwhm_fs}")));
        }
        *out = beam::delta_from_fwhm(fwhm_fs);
        Ok(())
    })
}

/// Vector-potential amplitude (a.u.) for an intensity in W/cm^2 at photon
/// energy `omega` (hartree).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_a0_from_intensity(intensity_w_cm2: f64, omega: f64, out: *mut f64) -> CcStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(intensity_w_cm2 >= 0.0 && omega > 0.0) {
            return Err((
                CcStatus::Parameter,
                format!("need intensity >= 0 and omega > 0, got {intensity_w_cm2}, {omega}"),
            ));
        }
        *out = beam::a0_from_intensity(intensity_w_cm2, omega);
        Ok(())
    })
}
