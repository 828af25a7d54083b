//! C ABI over `afmi-core`.
//!
//! Every entry point returns an [`AfmiStatus`]; on failure the message is
//! available from [`afmi_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use afmi_core::bifurcation::{
    locate_homoclinic, locate_hopf, locate_saddle_node, locate_transcritical,
};
use afmi_core::equilibria::{all_equilibria, EquilibriumKind};
use afmi_core::integrate::{integrate, AttractorId, IntegratorSettings, Termination, Trajectory};
use afmi_core::manifolds::ManifoldSettings;
use afmi_core::model::{ModelParams, State};
use afmi_core::stability::StabilityClass;
use afmi_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfmiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    BufferTooSmall = 4,
    Precondition = 5,
    NoBracket = 6,
    Numerical = 7,
    Indeterminate = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfmiEquilibriumKind {
    Trivial = 0,
    PredatorFree = 1,
    PreyFree = 2,
    InteriorLow = 3,
    InteriorHigh = 4,
    InteriorCollided = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfmiStability {
    StableNode = 0,
    StableFocus = 1,
    UnstableNode = 2,
    UnstableFocus = 3,
    Saddle = 4,
    NonHyperbolic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfmiBifurcation {
    Transcritical = 0,
    SaddleNode = 1,
    Hopf = 2,
    Homoclinic = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfmiTermination {
    Converged = 0,
    Escaped = 1,
    BudgetExhausted = 2,
    ReachedAxis = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfmiEquilibrium {
    pub kind: AfmiEquilibriumKind,
    pub x: f64,
    pub y: f64,
    pub eig_re: [f64; 2],
    pub eig_im: [f64; 2],
    pub stability: AfmiStability,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfmiEvent {
    pub kind: AfmiBifurcation,
    pub xi_star: f64,
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Opaque model handle.
pub struct AfmiModel {
    params: ModelParams,
}

/// Opaque trajectory handle.
pub struct AfmiTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AfmiStatus {
    match e {
        Error::InvalidParameter { .. } => AfmiStatus::InvalidParameter,
        Error::Domain { .. } => AfmiStatus::Domain,
        Error::Precondition(_) | Error::Infeasible(_) | Error::StaleEquilibrium { .. } => {
            AfmiStatus::Precondition
        }
        Error::Bracket { .. } => AfmiStatus::NoBracket,
        Error::Indeterminate { .. } => AfmiStatus::Indeterminate,
        Error::Singular { .. } | Error::Stiffness { .. } | Error::NoReturn(_) => {
            AfmiStatus::Numerical
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), (AfmiStatus, String)>) -> AfmiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfmiStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            AfmiStatus::Panic
        }
    }
}

fn core<T>(r: afmi_core::Result<T>) -> Result<T, (AfmiStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AfmiStatus, String) {
    (AfmiStatus::NullPointer, format!("null pointer: {what}"))
}

fn kind_c(k: EquilibriumKind) -> AfmiEquilibriumKind {
    match k {
        EquilibriumKind::Trivial => AfmiEquilibriumKind::Trivial,
        EquilibriumKind::PredatorFree => AfmiEquilibriumKind::PredatorFree,
        EquilibriumKind::PreyFree => AfmiEquilibriumKind::PreyFree,
        EquilibriumKind::InteriorLow => AfmiEquilibriumKind::InteriorLow,
        EquilibriumKind::InteriorHigh => AfmiEquilibriumKind::InteriorHigh,
        EquilibriumKind::InteriorCollided => AfmiEquilibriumKind::InteriorCollided,
    }
}

fn stability_c(s: StabilityClass) -> AfmiStability {
    match s {
        StabilityClass::StableNode => AfmiStability::StableNode,
        StabilityClass::StableFocus => AfmiStability::StableFocus,
        StabilityClass::UnstableNode => AfmiStability::UnstableNode,
        StabilityClass::UnstableFocus => AfmiStability::UnstableFocus,
        StabilityClass::Saddle => AfmiStability::Saddle,
        StabilityClass::NonHyperbolic => AfmiStability::NonHyperbolic,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn afmi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn afmi_model_new(
    alpha: f64,
    beta: f64,
    delta: f64,
    epsilon: f64,
    xi: f64,
    k: f64,
    out: *mut *mut AfmiModel,
) -> AfmiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = core(ModelParams::new(alpha, beta, delta, epsilon, xi, k))?;
        *out = Box::into_raw(Box::new(AfmiModel { params }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `afmi_model_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn afmi_model_free(model: *mut AfmiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn afmi_model_set_xi(model: *mut AfmiModel, xi: f64) -> AfmiStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        m.params = core(m.params.with_xi(xi))?;
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `out` valid for two doubles.
#[no_mangle]
pub unsafe extern "C" fn afmi_model_rhs(
    model: *const AfmiModel,
    x: f64,
    y: f64,
    out: *mut f64,
) -> AfmiStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = core(afmi_core::model::vector_field(&m.params, State::new(x, y)))?;
        ptr::copy_nonoverlapping(f.as_ptr(), out, 2);
        Ok(())
    })
}

/// Writes up to `cap` equilibria to `buf` and their total number to
/// `count`. Returns `BufferTooSmall` when `cap` is short; `count` is still
/// set. `buf` may be null when `cap` is 0.
///
/// # Safety
/// `buf` must be valid for `cap` elements, `count` for one.
#[no_mangle]
pub unsafe extern "C" fn afmi_equilibria(
    model: *const AfmiModel,
    buf: *mut AfmiEquilibrium,
    cap: usize,
    count: *mut usize,
) -> AfmiStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        let eqs = all_equilibria(&m.params);
        *count = eqs.len();
        if cap < eqs.len() {
            return Err((
                AfmiStatus::BufferTooSmall,
                format!("need room for {} equilibria, got {cap}", eqs.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (i, e) in eqs.iter().enumerate() {
            *buf.add(i) = AfmiEquilibrium {
                kind: kind_c(e.kind),
                x: e.location.x,
                y: e.location.y,
                eig_re: [e.eigenvalues[0].re, e.eigenvalues[1].re],
                eig_im: [e.eigenvalues[0].im, e.eigenvalues[1].im],
                stability: stability_c(e.stability),
            };
        }
        Ok(())
    })
}

/// Integrates from `(x0, y0)` with default settings; `max_time <= 0` keeps
/// the default horizon.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn afmi_simulate(
    model: *const AfmiModel,
    x0: f64,
    y0: f64,
    max_time: f64,
    out: *mut *mut AfmiTrajectory,
) -> AfmiStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut s = IntegratorSettings::default();
        if max_time > 0.0 {
            s.max_time = max_time;
        }
        let s0 = core(State::new(x0, y0).checked())?;
        let inner = core(integrate(&m.params, s0, &s))?;
        *out = Box::into_raw(Box::new(AfmiTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `traj` must come from `afmi_simulate` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn afmi_trajectory_free(traj: *mut AfmiTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn afmi_trajectory_len(traj: *const AfmiTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.samples.len())
}

/// # Safety
/// `traj` must be a live handle; `t`, `x`, `y` valid for one double each.
#[no_mangle]
pub unsafe extern "C" fn afmi_trajectory_sample(
    traj: *const AfmiTrajectory,
    index: usize,
    t: *mut f64,
    x: *mut f64,
    y: *mut f64,
) -> AfmiStatus {
    guard(|| {
        let tr = traj.as_ref().ok_or_else(|| null("traj"))?;
        if t.is_null() || x.is_null() || y.is_null() {
            return Err(null("output"));
        }
        let s = tr.inner.samples.get(index).ok_or_else(|| {
            (
                AfmiStatus::BufferTooSmall,
                format!(
                    "sample {index} out of range ({} samples)",
                    tr.inner.samples.len()
                ),
            )
        })?;
        *t = s.t;
        *x = s.state.x;
        *y = s.state.y;
        Ok(())
    })
}

/// How the integration stopped. For `Converged`, `prey_free` is set to 1
/// when the limit is the prey-free equilibrium and 0 otherwise.
///
/// # Safety
/// `traj` must be a live handle; `termination` and `prey_free` valid.
#[no_mangle]
pub unsafe extern "C" fn afmi_trajectory_termination(
    traj: *const AfmiTrajectory,
    termination: *mut AfmiTermination,
    prey_free: *mut i32,
) -> AfmiStatus {
    guard(|| {
        let tr = traj.as_ref().ok_or_else(|| null("traj"))?;
        if termination.is_null() || prey_free.is_null() {
            return Err(null("output"));
        }
        let (term, pf) = match tr.inner.termination {
            Termination::ConvergedTo(a) => {
                (AfmiTermination::Converged, a == AttractorId::PreyFreeEq)
            }
            Termination::Escaped => (AfmiTermination::Escaped, false),
            Termination::BudgetExhausted => (AfmiTermination::BudgetExhausted, false),
            Termination::ReachedAxis => (AfmiTermination::ReachedAxis, false),
        };
        *termination = term;
        *prey_free = pf as i32;
        Ok(())
    })
}

/// Locates a bifurcation in xi with the other parameters of `model`.
/// The bracket is ignored for `Transcritical`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one event.
#[no_mangle]
pub unsafe extern "C" fn afmi_locate(
    model: *const AfmiModel,
    kind: AfmiBifurcation,
    lo: f64,
    hi: f64,
    out: *mut AfmiEvent,
) -> AfmiStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ev = core(match kind {
            AfmiBifurcation::Transcritical => locate_transcritical(&m.params),
            AfmiBifurcation::SaddleNode => locate_saddle_node(&m.params, (lo, hi)),
            AfmiBifurcation::Hopf => locate_hopf(&m.params, (lo, hi)),
            AfmiBifurcation::Homoclinic => {
                locate_homoclinic(&m.params, (lo, hi), &ManifoldSettings::default())
            }
        })?;
        *out = AfmiEvent {
            kind,
            xi_star: ev.xi_star,
            x: ev.location.x,
            y: ev.location.y,
            residual: ev.residual,
        };
        Ok(())
    })
}
