//! C ABI over the `qsl` library.
//!
//! Every function returns a [`QslStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read
//! with [`qsl_last_error`]. States are opaque handles created by
//! `qsl_state_new` or `qsl_state_random` and released with
//! `qsl_state_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qsl::qsim::{first_passage, ml_bound, mt_bound, sample_random_state, QuantumState};
use qsl::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QslStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument is outside its domain.
    Domain = 2,
    /// A root solve or case analysis failed.
    Numerical = 3,
    InvalidState = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QslStatus {
    match err {
        Error::Domain { .. } => QslStatus::Domain,
        Error::State(_) => QslStatus::InvalidState,
        Error::Root(_)
        | Error::Case { .. }
        | Error::Degenerate
        | Error::EqualityViolation { .. } => QslStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), QslStatus> + UnwindSafe) -> QslStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => QslStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            QslStatus::Panic
        }
    }
}

fn lib<T>(r: qsl::Result<T>) -> Result<T, QslStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null_error(what: &str) -> QslStatus {
    set_error(format!("{what} is null"));
    QslStatus::NullPointer
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), QslStatus> {
    if out.is_null() {
        return Err(null_error(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// # Safety
/// `state` must be null or a live handle from this library.
unsafe fn state_ref<'a>(state: *const QslState) -> Result<&'a QuantumState, QslStatus> {
    if state.is_null() {
        return Err(null_error("state"));
    }
    Ok(unsafe { &(*state).inner })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length
/// in bytes, or 0 when there is no message.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qsl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be null or valid for a write of a `double`.
unsafe fn scalar(out: *mut f64, f: impl FnOnce() -> qsl::Result<f64> + UnwindSafe) -> QslStatus {
    guard(move || {
        let v = lib(f())?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Speed-limit coefficient `alpha(delta)`.
///
/// # Safety
/// `out` must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_alpha(delta: f64, out: *mut f64) -> QslStatus {
    unsafe { scalar(out, move || qsl::bounds::alpha(delta)) }
}

/// Mandelstam-Tamm numerator `arccos(sqrt(delta))`.
///
/// # Safety
/// `out` must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_mt_alpha(delta: f64, out: *mut f64) -> QslStatus {
    unsafe { scalar(out, move || qsl::bounds::mt_alpha(delta)) }
}

/// Minimax lower bound with an outer grid of `n_theta` points.
///
/// # Safety
/// `out` must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_lower_bound(delta: f64, n_theta: usize, out: *mut f64) -> QslStatus {
    unsafe { scalar(out, move || qsl::bounds::lower_bound(delta, n_theta)) }
}

/// Two-level upper bound.
///
/// # Safety
/// `out` must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_upper_bound(delta: f64, out: *mut f64) -> QslStatus {
    unsafe { scalar(out, move || qsl::bounds::upper_bound(delta)) }
}

/// Slope `a(q)` of the tangent line with parameter `q >= 0`.
///
/// # Safety
/// `out` must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_a_of_q(q: f64, out: *mut f64) -> QslStatus {
    unsafe { scalar(out, move || qsl::tangent_family::a_of_q(q)) }
}

/// Tangency abscissa `y(q)`.
///
/// # Safety
/// `out` must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_y_of_q(q: f64, out: *mut f64) -> QslStatus {
    unsafe { scalar(out, move || qsl::tangent_family::y_of_q(q)) }
}

/// The tangency constants `y_minus` and `y_plus`.
///
/// # Safety
/// Both pointers must be null or valid for a write of a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsl_y_bounds(y_minus: *mut f64, y_plus: *mut f64) -> QslStatus {
    guard(move || {
        if y_minus.is_null() || y_plus.is_null() {
            return Err(null_error("output pointer"));
        }
        let yb = qsl::rootfind::y_bounds();
        unsafe {
            y_minus.write(yb.y_minus);
            y_plus.write(yb.y_plus);
        }
        Ok(())
    })
}

/// Opaque pure state: energies with complex amplitudes.
pub struct QslState {
    inner: QuantumState,
}

fn into_handle(state: QuantumState, out: *mut *mut QslState) -> Result<(), QslStatus> {
    let handle = Box::into_raw(Box::new(QslState { inner: state }));
    // SAFETY: callers check `out` for null before building the state.
    unsafe { out.write(handle) };
    Ok(())
}

/// Builds a state from `n` levels. With `normalize` false the amplitudes
/// must already have unit norm.
///
/// # Safety
/// `energies`, `re` and `im` must each be valid for `n` reads; `out` must
/// be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_new(
    energies: *const f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    normalize: bool,
    out: *mut *mut QslState,
) -> QslStatus {
    guard(move || {
        if energies.is_null() || re.is_null() || im.is_null() || out.is_null() {
            return Err(null_error("argument"));
        }
        let (e, re, im) = unsafe {
            (
                std::slice::from_raw_parts(energies, n),
                std::slice::from_raw_parts(re, n),
                std::slice::from_raw_parts(im, n),
            )
        };
        let levels = e
            .iter()
            .zip(re.iter().zip(im))
            .map(|(&e, (&r, &i))| (e, Complex64::new(r, i)));
        let state = lib(if normalize {
            QuantumState::normalized(levels)
        } else {
            QuantumState::new(levels)
        })?;
        into_handle(state, out)
    })
}

/// Random state of dimension `d` with energies in `[0, e_max]`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_random(
    d: usize,
    e_max: f64,
    seed: u64,
    out: *mut *mut QslState,
) -> QslStatus {
    guard(move || {
        if out.is_null() {
            return Err(null_error("out"));
        }
        into_handle(lib(sample_random_state(d, e_max, seed))?, out)
    })
}

/// Releases a state. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_free(state: *mut QslState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Number of levels carrying amplitude.
///
/// # Safety
/// `state` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_dimension(state: *const QslState, out: *mut usize) -> QslStatus {
    guard(move || {
        let s = unsafe { state_ref(state) }?;
        unsafe { write_out(out, s.dimension(), "out") }
    })
}

/// # Safety
/// `state` must be null or a live handle; `out` null or valid for a write.
unsafe fn state_scalar(
    state: *const QslState,
    out: *mut f64,
    f: impl FnOnce(&QuantumState) -> qsl::Result<f64> + UnwindSafe,
) -> QslStatus {
    guard(move || {
        let s = unsafe { state_ref(state) }?;
        let v = lib(f(s))?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Fidelity with the initial state after time `t >= 0`.
///
/// # Safety
/// `state` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_fidelity(
    state: *const QslState,
    t: f64,
    out: *mut f64,
) -> QslStatus {
    unsafe {
        state_scalar(state, out, move |s| {
            if t >= 0.0 {
                Ok(s.fidelity(t))
            } else {
                Err(Error::Domain {
                    what: "t",
                    value: t,
                    expected: "t >= 0",
                })
            }
        })
    }
}

/// Energy dispersion.
///
/// # Safety
/// `state` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_dispersion(state: *const QslState, out: *mut f64) -> QslStatus {
    unsafe { state_scalar(state, out, move |s| Ok(s.dispersion())) }
}

/// Mean energy above the lowest occupied level.
///
/// # Safety
/// `state` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_mean_excess_energy(
    state: *const QslState,
    out: *mut f64,
) -> QslStatus {
    unsafe { state_scalar(state, out, move |s| Ok(s.mean_excess_energy())) }
}

/// Margolus-Levitin type bound; `INFINITY` without excess energy.
///
/// # Safety
/// `state` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_ml_bound(
    state: *const QslState,
    delta: f64,
    out: *mut f64,
) -> QslStatus {
    unsafe { state_scalar(state, out, move |s| ml_bound(s, delta)) }
}

/// Mandelstam-Tamm bound; `INFINITY` without dispersion.
///
/// # Safety
/// `state` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_mt_bound(
    state: *const QslState,
    delta: f64,
    out: *mut f64,
) -> QslStatus {
    unsafe { state_scalar(state, out, move |s| mt_bound(s, delta)) }
}

/// First time the fidelity falls to `delta` within `horizon`, scanned on
/// `n_grid` points. `found` is set to false when there is no crossing;
/// `achieved` then holds the lowest fidelity seen.
///
/// # Safety
/// `state` must be a live handle; the out pointers must be valid writes.
#[no_mangle]
pub unsafe extern "C" fn qsl_state_first_passage(
    state: *const QslState,
    delta: f64,
    horizon: f64,
    n_grid: usize,
    found: *mut bool,
    t_star: *mut f64,
    achieved: *mut f64,
) -> QslStatus {
    guard(move || {
        let s = unsafe { state_ref(state) }?;
        if found.is_null() || t_star.is_null() || achieved.is_null() {
            return Err(null_error("output pointer"));
        }
        let r = lib(first_passage(s, delta, horizon, n_grid))?;
        unsafe {
            found.write(r.t_star.is_some());
            t_star.write(r.t_star.unwrap_or(f64::NAN));
            achieved.write(r.achieved_fidelity);
        }
        Ok(())
    })
}
