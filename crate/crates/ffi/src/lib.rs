//! C interface. Objects cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free`. Every fallible call
//! returns a [`KfStatus`]; the message of the last failure on the calling
//! thread is available from [`kf_last_error`].
//!
//! Handles passed in must be live (not yet freed) and output pointers
//! valid for the writes described on each function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kerr_floquet::classical::{self, Trajectory};
use kerr_floquet::fock::FockOperator;
use kerr_floquet::lindblad::{self, LindbladModel, MPRConvention, ScanOptions};
use kerr_floquet::{kb, vanvleck, BasisChoice, Error, SystemParams};

pub const KF_BASIS_SYSTEM_PHOTONS: i32 = 0;
pub const KF_BASIS_PUMP_PHOTONS: i32 = 1;

pub const KF_MODEL_EXACT: i32 = 0;
pub const KF_MODEL_EFFECTIVE_1A: i32 = 1;
pub const KF_MODEL_EFFECTIVE_1B: i32 = 2;
pub const KF_MODEL_EFFECTIVE_2B: i32 = 3;

pub const KF_CONVENTION_STANDARD: i32 = 0;
pub const KF_CONVENTION_DEGENERACY: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    NonConvergence = 4,
    Truncation = 5,
    NotBracketed = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Other = 10,
}

/// Physical parameters of the driven oscillator.
pub struct KfParams(SystemParams);

/// Sampled classical trajectory.
pub struct KfTrajectory(Trajectory);

/// Dense complex matrix on a truncated Fock space.
pub struct KfOperator(FockOperator);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KfRwaCoefficients {
    pub delta_c: f64,
    pub u_c: f64,
    pub f_c: f64,
    pub omega_c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KfSteadyState {
    pub u: f64,
    pub v: f64,
    pub amplitude: f64,
    /// 1 when linearly stable.
    pub stable: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> KfStatus {
    match e {
        Error::InvalidParameter(_) | Error::NonHermitian(_) | Error::Unsupported(_) => KfStatus::InvalidParameter,
        Error::DimensionMismatch { .. } => KfStatus::DimensionMismatch,
        Error::NonConvergence { .. } => KfStatus::NonConvergence,
        Error::Truncation(_) => KfStatus::Truncation,
        Error::NotBracketed(_) => KfStatus::NotBracketed,
        Error::Numerical(_) | Error::InvariantViolation(_) | Error::DegenerateSteadyState { .. } => {
            KfStatus::Numerical
        }
        _ => KfStatus::Other,
    }
}

enum Fault {
    Null,
    Lib(Error),
    Small(usize),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        Fault::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fault>) -> KfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KfStatus::Ok,
        Ok(Err(Fault::Null)) => {
            set_error("null pointer argument".into());
            KfStatus::NullPointer
        }
        Ok(Err(Fault::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fault::Small(need))) => {
            set_error(format!("buffer too small, need {need} elements"));
            KfStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            KfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fault> {
    p.as_ref().ok_or(Fault::Null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fault> {
    p.as_mut().ok_or(Fault::Null)
}

fn basis_of(code: i32, p: &SystemParams) -> Result<BasisChoice, Fault> {
    match code {
        KF_BASIS_SYSTEM_PHOTONS => Ok(BasisChoice::system_photons(p)),
        KF_BASIS_PUMP_PHOTONS => Ok(BasisChoice::pump_photons(p)),
        _ => Err(Error::InvalidParameter(format!("unknown basis code {code}")).into()),
    }
}

fn boxed<T>(slot: *mut *mut T, value: T) -> Result<(), Fault> {
    let slot = unsafe { out(slot)? };
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `cap` bytes. Returns the full message length, 0 when no
/// error has occurred.
///
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn kf_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Lab-frame parameters; `gamma = 0` and `hbar = 1` until set.
#[no_mangle]
pub unsafe extern "C" fn kf_params_new(
    m: f64,
    omega0: f64,
    alpha: f64,
    force: f64,
    omega: f64,
    params: *mut *mut KfParams,
) -> KfStatus {
    guard(|| {
        let p = SystemParams::new(m, omega0, alpha, force, omega);
        p.validate()?;
        boxed(params, KfParams(p))
    })
}

/// Parameters from the system-photon Kerr shift `u_a`, pump strength
/// `f_a` and detuning `delta_a = omega - omega0`.
#[no_mangle]
pub unsafe extern "C" fn kf_params_from_a_basis(
    m: f64,
    omega0: f64,
    hbar: f64,
    u_a: f64,
    f_a: f64,
    delta_a: f64,
    params: *mut *mut KfParams,
) -> KfStatus {
    guard(|| {
        let p = SystemParams::from_a_basis(m, omega0, hbar, u_a, f_a, delta_a);
        p.validate()?;
        boxed(params, KfParams(p))
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_params_set_gamma(params: *mut KfParams, gamma: f64) -> KfStatus {
    guard(|| {
        let h = out(params)?;
        let p = h.0.with_gamma(gamma);
        p.validate()?;
        h.0 = p;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_params_set_hbar(params: *mut KfParams, hbar: f64) -> KfStatus {
    guard(|| {
        let h = out(params)?;
        let p = h.0.with_hbar(hbar);
        p.validate()?;
        h.0 = p;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_params_set_omega(params: *mut KfParams, omega: f64) -> KfStatus {
    guard(|| {
        let h = out(params)?;
        let p = h.0.with_omega(omega);
        p.validate()?;
        h.0 = p;
        Ok(())
    })
}

/// Writes `[m, omega0, alpha, force, omega, gamma, hbar]`.
///
/// `params` must be a live handle and `values` valid for 7 writes.
#[no_mangle]
pub unsafe extern "C" fn kf_params_get(params: *const KfParams, values: *mut f64) -> KfStatus {
    guard(|| {
        let p = deref(params)?.0;
        if values.is_null() {
            return Err(Fault::Null);
        }
        let v = [p.m, p.omega0, p.alpha, p.force, p.omega, p.gamma, p.hbar];
        ptr::copy_nonoverlapping(v.as_ptr(), values, v.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_params_free(params: *mut KfParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Rotating-frame coefficients in one of the two oscillator bases.
#[no_mangle]
pub unsafe extern "C" fn kf_rwa_coefficients(
    params: *const KfParams,
    basis: i32,
    coeffs: *mut KfRwaCoefficients,
) -> KfStatus {
    guard(|| {
        let p = &deref(params)?.0;
        let k = kerr_floquet::params::compute_rwa_coefficients(p, &basis_of(basis, p)?)?;
        *out(coeffs)? = KfRwaCoefficients {
            delta_c: k.delta_c,
            u_c: k.u_c,
            f_c: k.f_c,
            omega_c: k.omega_c,
        };
        Ok(())
    })
}

/// Fixed points of the averaged slow flow in ascending amplitude. Writes
/// at most `cap` entries and the total count to `count`; fails with
/// `BufferTooSmall` when `cap` is short.
///
/// `params` must be a live handle, `states` valid for `cap` writes and
/// `count` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kf_kb_steady_states(
    params: *const KfParams,
    states: *mut KfSteadyState,
    cap: usize,
    count: *mut usize,
) -> KfStatus {
    guard(|| {
        let p = &deref(params)?.0;
        let count = out(count)?;
        let roots = kb::steady_states(p)?;
        *count = roots.len();
        if roots.len() > cap {
            return Err(Fault::Small(roots.len()));
        }
        if states.is_null() && !roots.is_empty() {
            return Err(Fault::Null);
        }
        for (i, r) in roots.iter().enumerate() {
            *states.add(i) = KfSteadyState {
                u: r.state.u,
                v: r.state.v,
                amplitude: r.state.amplitude(),
                stable: r.stable as i32,
            };
        }
        Ok(())
    })
}

/// Integrates the lab-frame equations from `(x0, p0)` at `t = 0` to `t1`,
/// sampled `samples_per_period` times per drive period.
#[no_mangle]
pub unsafe extern "C" fn kf_integrate(
    params: *const KfParams,
    x0: f64,
    p0: f64,
    t1: f64,
    tol: f64,
    samples_per_period: usize,
    traj: *mut *mut KfTrajectory,
) -> KfStatus {
    guard(|| {
        let p = &deref(params)?.0;
        let t = classical::integrate_sampled((x0, p0), 0.0, t1, p, tol, samples_per_period)?;
        boxed(traj, KfTrajectory(t))
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_trajectory_len(traj: *const KfTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copies samples into caller buffers of length `cap`; any of `t`, `x`,
/// `p` may be null to skip it.
///
/// `traj` must be a live handle and each non-null buffer valid for `cap`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn kf_trajectory_copy(
    traj: *const KfTrajectory,
    t: *mut f64,
    x: *mut f64,
    p: *mut f64,
    cap: usize,
) -> KfStatus {
    guard(|| {
        let tr = &deref(traj)?.0;
        if cap < tr.len() {
            return Err(Fault::Small(tr.len()));
        }
        for (src, dst) in [(&tr.t, t), (&tr.x, x), (&tr.p, p)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
            }
        }
        Ok(())
    })
}

/// Amplitude of the `omega` component over the last `n_periods` periods.
#[no_mangle]
pub unsafe extern "C" fn kf_lockin_amplitude(
    traj: *const KfTrajectory,
    omega: f64,
    n_periods: usize,
    amplitude: *mut f64,
) -> KfStatus {
    guard(|| {
        let r = classical::lockin_amplitude(&deref(traj)?.0, omega, n_periods)?;
        *out(amplitude)? = r.amplitude;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_trajectory_free(traj: *mut KfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Effective Hamiltonian of order 1 or 2 on `dim` number states.
#[no_mangle]
pub unsafe extern "C" fn kf_effective_hamiltonian(
    params: *const KfParams,
    basis: i32,
    order: u32,
    dim: usize,
    op: *mut *mut KfOperator,
) -> KfStatus {
    guard(|| {
        let p = &deref(params)?.0;
        let fc = vanvleck::fourier_components(p, &basis_of(basis, p)?, dim)?;
        let eff = vanvleck::effective_hamiltonian(&fc, order, p.hbar, p.omega)?;
        boxed(op, KfOperator(eff.matrix))
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_operator_dim(op: *const KfOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// `op` must be a live handle and `re`, `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_operator_get(
    op: *const KfOperator,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> KfStatus {
    guard(|| {
        let o = &deref(op)?.0;
        let n = o.dim();
        if row >= n || col >= n {
            return Err(Error::DimensionMismatch { expected: n, got: row.max(col) + 1 }.into());
        }
        let z = o.get(row, col);
        *out(re)? = z.re;
        *out(im)? = z.im;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kf_operator_free(op: *mut KfOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Stationary period-averaged photon number with loss rate `kappa` on
/// `dim` number states.
#[no_mangle]
pub unsafe extern "C" fn kf_stationary_photon_number(
    params: *const KfParams,
    model: i32,
    kappa: f64,
    dim: usize,
    n_avg: *mut f64,
) -> KfStatus {
    guard(|| {
        let p = &deref(params)?.0;
        let model = match model {
            KF_MODEL_EXACT => LindbladModel::ExactRotated,
            KF_MODEL_EFFECTIVE_1A => LindbladModel::EffectiveOrder1A,
            KF_MODEL_EFFECTIVE_1B => LindbladModel::EffectiveOrder1B,
            KF_MODEL_EFFECTIVE_2B => LindbladModel::EffectiveOrder2B,
            _ => return Err(Error::InvalidParameter(format!("unknown model code {model}")).into()),
        };
        let run = lindblad::run_point(p, model, kappa, dim, &ScanOptions::for_dim(dim))?;
        *out(n_avg)? = run.n_avg;
        Ok(())
    })
}

/// Detuning `omega - omega0` of the `n`-th multiphoton resonance.
#[no_mangle]
pub unsafe extern "C" fn kf_mpr_predicted(
    params: *const KfParams,
    basis: i32,
    n: u32,
    convention: i32,
    delta_a: *mut f64,
) -> KfStatus {
    guard(|| {
        let p = &deref(params)?.0;
        let convention = match convention {
            KF_CONVENTION_STANDARD => MPRConvention::Standard,
            KF_CONVENTION_DEGENERACY => MPRConvention::DiagonalDegeneracy,
            _ => return Err(Error::InvalidParameter(format!("unknown convention code {convention}")).into()),
        };
        *out(delta_a)? = lindblad::mpr_predicted(p, &basis_of(basis, p)?, n, convention)?.delta_a;
        Ok(())
    })
}
