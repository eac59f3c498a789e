//! C ABI over the echolab engines.
//!
//! Every fallible call returns an `EcholabStatus`; on failure the message is kept
//! per thread and can be read with `echolab_last_error`. Handles are opaque and
//! must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use echolab::dynamics::{apply, benettin_lyapunov, ClassicalMap, Floquet, KickedRotatorFloquet, KickedTopFloquet};
use echolab::echoes::{displacement_echo, loschmidt, prepared_echo, DisplacementSpec};
use echolab::qstate::{gaussian_torus, spin_coherent, Basis, StateVector, TorusGrid, WavepacketSpec};
use echolab::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EcholabStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Basis = 3,
    DimGuard = 4,
    Incommensurate = 5,
    Eigen = 6,
    Fit = 7,
    MissingAmplitude = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for EcholabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => Self::Domain,
            Error::Basis(_) => Self::Basis,
            Error::DimGuard { .. } => Self::DimGuard,
            Error::Incommensurate(_) => Self::Incommensurate,
            Error::Eigen => Self::Eigen,
            Error::Fit(_) => Self::Fit,
            Error::MissingAmplitude => Self::MissingAmplitude,
            Error::Io(_) => Self::Io,
        }
    }
}

/// A Floquet engine: kicked rotator or kicked top.
pub struct EcholabEngine {
    inner: Box<dyn Floquet>,
}

/// A normalized pure state.
pub struct EcholabState {
    inner: StateVector,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: EcholabStatus, msg: impl Into<String>) -> EcholabStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), EcholabStatus>) -> EcholabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            EcholabStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(EcholabStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: echolab::Result<T>) -> Result<T, EcholabStatus> {
    r.map_err(|e| fail((&e).into(), format!("{}: {e}", e.code())))
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, EcholabStatus> {
    // SAFETY: the caller promises `p` is null or a live handle from this library
    unsafe { p.as_ref() }.ok_or_else(|| fail(EcholabStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, EcholabStatus> {
    // SAFETY: as above, and the handle is not aliased for the duration of the call
    unsafe { p.as_mut() }.ok_or_else(|| fail(EcholabStatus::NullPointer, format!("{what} is null")))
}

fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], EcholabStatus> {
    if p.is_null() {
        return Err(fail(EcholabStatus::NullPointer, "output buffer is null"));
    }
    if len < need {
        return Err(fail(EcholabStatus::BufferTooSmall, format!("buffer holds {len} values, {need} needed")));
    }
    // SAFETY: the caller provides at least `len` writable doubles
    Ok(unsafe { std::slice::from_raw_parts_mut(p, need) })
}

fn put<T>(out: *mut *mut T, value: T) -> Result<(), EcholabStatus> {
    if out.is_null() {
        return Err(fail(EcholabStatus::NullPointer, "output handle pointer is null"));
    }
    // SAFETY: `out` is a valid place for one pointer
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn echolab_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn echolab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Kicked rotator on an even grid of `n` sites with kick strength `k`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn echolab_rotator_new(n: usize, k: f64, out: *mut *mut EcholabEngine) -> EcholabStatus {
    guard(|| {
        let g = lib(TorusGrid::new(n))?;
        let e = lib(KickedRotatorFloquet::new(g, k))?;
        put(out, EcholabEngine { inner: Box::new(e) })
    })
}

/// Kicked top of spin `s` (a positive half-integer), torsion `k` and x-rotation `phi`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn echolab_top_new(s: f64, k: f64, phi: f64, out: *mut *mut EcholabEngine) -> EcholabStatus {
    guard(|| {
        let e = lib(KickedTopFloquet::new(s, k, phi))?;
        put(out, EcholabEngine { inner: Box::new(e) })
    })
}

/// # Safety
/// `engine` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn echolab_engine_free(engine: *mut EcholabEngine) {
    if !engine.is_null() {
        // SAFETY: created by Box::into_raw in this library and not freed before
        drop(unsafe { Box::from_raw(engine) });
    }
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn echolab_engine_dim(engine: *const EcholabEngine) -> usize {
    // SAFETY: null or a live handle
    unsafe { engine.as_ref() }.map_or(0, |e| e.inner.dim())
}

/// Coherent packet on a grid of `n` sites centered at (x0, p0) ∈ [0, 2π)².
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn echolab_state_torus_coherent(n: usize, x0: f64, p0: f64, out: *mut *mut EcholabState) -> EcholabStatus {
    guard(|| {
        let g = lib(TorusGrid::new(n))?;
        let spec = lib(WavepacketSpec::coherent(&g, x0, p0))?;
        put(out, EcholabState { inner: lib(gaussian_torus(&g, &spec))? })
    })
}

/// Spin coherent state pointing at polar angle `theta` and azimuth `phi`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn echolab_state_spin_coherent(s: f64, theta: f64, phi: f64, out: *mut *mut EcholabState) -> EcholabStatus {
    guard(|| put(out, EcholabState { inner: lib(spin_coherent(s, theta, phi))? }))
}

/// State with the given amplitudes in the basis of `engine`; the vector is normalized.
///
/// # Safety
/// `re` and `im` must each point to `len` readable doubles; handles as for every other call.
#[no_mangle]
pub unsafe extern "C" fn echolab_state_from_amplitudes(
    engine: *const EcholabEngine,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut EcholabState,
) -> EcholabStatus {
    guard(|| {
        let e = non_null(engine, "engine")?;
        if re.is_null() || im.is_null() {
            return Err(fail(EcholabStatus::NullPointer, "amplitude buffer is null"));
        }
        // SAFETY: the caller provides `len` readable doubles in each buffer
        let (re, im) = unsafe { (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len)) };
        let amps = re.iter().zip(im).map(|(a, b)| echolab::C64::new(*a, *b)).collect();
        let basis: Basis = e.inner.basis();
        put(out, EcholabState { inner: lib(StateVector::new(amps, basis))? })
    })
}

/// # Safety
/// `state` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn echolab_state_free(state: *mut EcholabState) {
    if !state.is_null() {
        // SAFETY: created by Box::into_raw in this library and not freed before
        drop(unsafe { Box::from_raw(state) });
    }
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn echolab_state_dim(state: *const EcholabState) -> usize {
    // SAFETY: null or a live handle
    unsafe { state.as_ref() }.map_or(0, |s| s.inner.dim())
}

/// Copies the amplitudes into `re` and `im`, each holding at least `len` values.
///
/// # Safety
/// `re` and `im` must each hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn echolab_state_amplitudes(state: *const EcholabState, re: *mut f64, im: *mut f64, len: usize) -> EcholabStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let d = s.inner.dim();
        let re = out_slice(re, len, d)?;
        let im = out_slice(im, len, d)?;
        for (i, z) in s.inner.amplitudes().iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// Advances `state` in place by `n` periods of `engine`.
///
/// # Safety
/// Both handles must be null or live, and `state` must not be used concurrently.
#[no_mangle]
pub unsafe extern "C" fn echolab_engine_evolve(engine: *const EcholabEngine, state: *mut EcholabState, n: usize) -> EcholabStatus {
    guard(|| {
        let e = non_null(engine, "engine")?;
        let s = non_null_mut(state, "state")?;
        s.inner = lib(apply(e.inner.as_ref(), &s.inner, n))?;
        Ok(())
    })
}

/// Loschmidt echo M(t), t = 0..=n_max, written to `out` (at least n_max + 1 values).
/// `t_prep` > 0 first evolves the state with `f0` for that many periods.
///
/// # Safety
/// `out` must hold `len` writable doubles; handles must be null or live.
#[no_mangle]
pub unsafe extern "C" fn echolab_loschmidt(
    state: *const EcholabState,
    f0: *const EcholabEngine,
    f: *const EcholabEngine,
    t_prep: usize,
    n_max: usize,
    out: *mut f64,
    len: usize,
) -> EcholabStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let (f0, f) = (non_null(f0, "f0")?, non_null(f, "f")?);
        let buf = out_slice(out, len, n_max + 1)?;
        let series = lib(if t_prep == 0 {
            loschmidt(&s.inner, f0.inner.as_ref(), f.inner.as_ref(), n_max)
        } else {
            prepared_echo(&s.inner, f0.inner.as_ref(), f.inner.as_ref(), t_prep, n_max)
        })?;
        buf.copy_from_slice(&series.values);
        Ok(())
    })
}

/// Momentum (`spatial` = 0) or spatial (`spatial` ≠ 0) displacement echo by `m` lattice units.
///
/// # Safety
/// `out` must hold `len` writable doubles; handles must be null or live.
#[no_mangle]
pub unsafe extern "C" fn echolab_displacement_echo(
    state: *const EcholabState,
    f0: *const EcholabEngine,
    m: f64,
    spatial: i32,
    n_max: usize,
    out: *mut f64,
    len: usize,
) -> EcholabStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let f0 = non_null(f0, "f0")?;
        let buf = out_slice(out, len, n_max + 1)?;
        let spec = if spatial != 0 { DisplacementSpec::spatial(m) } else { DisplacementSpec::momentum(m) };
        let series = lib(displacement_echo(&s.inner, f0.inner.as_ref(), &spec, n_max))?;
        buf.copy_from_slice(&series.values);
        Ok(())
    })
}

/// Benettin exponent of the standard map (`top` = 0) or the classical top (`top` ≠ 0).
///
/// # Safety
/// `lambda` and `stderr_out` must be null or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn echolab_lyapunov(
    top: i32,
    k: f64,
    n_init: usize,
    n_steps: usize,
    seed: u64,
    lambda: *mut f64,
    stderr_out: *mut f64,
) -> EcholabStatus {
    guard(|| {
        if lambda.is_null() || stderr_out.is_null() {
            return Err(fail(EcholabStatus::NullPointer, "output pointer is null"));
        }
        let map = if top != 0 { ClassicalMap::Top } else { ClassicalMap::Standard };
        let est = lib(benettin_lyapunov(map, k, n_init, n_steps, seed))?;
        // SAFETY: both checked non-null above
        unsafe {
            *lambda = est.lambda;
            *stderr_out = est.stderr;
        }
        Ok(())
    })
}
