//! C interface to `xychain`.
//!
//! A chain is created once per `(N, γ, λ)` and returned as an opaque
//! pointer; every observable is then read through it. Functions return an
//! [`XyStatus`] and write results through out-pointers. After a failure,
//! [`xy_last_error`] describes what went wrong on the calling thread.
//!
//! Site indices are 0-based. Pauli axes are passed as [`XyAxis`] values.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xychain::entanglement::{entropy_spaced_with, PurityTable};
use xychain::noise::{quasimomentum_from, separability_threshold, zero_mode_noise_with};
use xychain::{engine, majorana_covariance, Axis, Error, MajoranaCovariance, ModelParams, PauliString, Sector};

/// Result codes. The numeric values of the error codes match the exit
/// codes of the `xychain` command-line tool where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XyStatus {
    Ok = 0,
    /// Invalid parameters or arguments.
    InvalidArgument = 2,
    /// A numerical-integrity check failed.
    Numerical = 3,
    /// A null pointer was passed where a valid one is required.
    NullPointer = 5,
    /// An output buffer is too small.
    BufferTooSmall = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XyAxis {
    X = 1,
    Y = 2,
    Z = 3,
}

impl From<XyAxis> for Axis {
    fn from(a: XyAxis) -> Self {
        match a {
            XyAxis::X => Axis::X,
            XyAxis::Y => Axis::Y,
            XyAxis::Z => Axis::Z,
        }
    }
}

/// Ground state of one chain. Opaque to C.
pub struct XyChain {
    params: ModelParams,
    cov: MajoranaCovariance,
    purities: Option<PurityTable>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> XyStatus {
    match e {
        Error::InvalidParams(_) | Error::Config(_) | Error::SizeGuard(_) | Error::Io { .. } => {
            XyStatus::InvalidArgument
        }
        Error::DegenerateMode { .. } | Error::Numerical(_) | Error::OracleMismatch(_) => XyStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (XyStatus, String)>) -> XyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XyStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            XyStatus::Internal
        }
    }
}

fn lib<T>(r: xychain::Result<T>) -> Result<T, (XyStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (XyStatus, String) {
    (XyStatus::NullPointer, format!("{what} is null"))
}

unsafe fn chain_ref<'a>(chain: *const XyChain) -> Result<&'a XyChain, (XyStatus, String)> {
    // SAFETY: the caller passes a pointer obtained from `xy_chain_new`.
    unsafe { chain.as_ref() }.ok_or_else(|| null("chain"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (XyStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: non-null and, per the caller's contract, writable.
    unsafe { out.write(value) };
    Ok(())
}

/// Solves the chain and stores a new handle in `*out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn xy_chain_new(n: usize, gamma: f64, lambda: f64, out: *mut *mut XyChain) -> XyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = lib(ModelParams::new(n, gamma, lambda))?;
        let cov = lib(majorana_covariance(&params))?;
        let chain = Box::new(XyChain {
            params,
            cov,
            purities: None,
        });
        unsafe { write(out, Box::into_raw(chain)) }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `chain` must come from `xy_chain_new` and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn xy_chain_free(chain: *mut XyChain) {
    if !chain.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(chain) });
    }
}

/// Number of sites.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xy_chain_sites(chain: *const XyChain, out: *mut usize) -> XyStatus {
    guard(|| unsafe {
        let c = chain_ref(chain)?;
        write(out, c.params.n())
    })
}

/// Ground-state energy and fermion boundary condition (`1` when periodic,
/// i.e. odd spin parity; `0` when antiperiodic).
///
/// # Safety
/// `chain` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn xy_chain_ground_state(
    chain: *const XyChain,
    energy: *mut f64,
    periodic: *mut i32,
) -> XyStatus {
    guard(|| unsafe {
        let c = chain_ref(chain)?;
        write(energy, c.cov.ground_energy())?;
        write(periodic, i32::from(c.cov.sector() == Sector::Periodic))
    })
}

/// Expectation value of the Pauli string with `axes[i]` on `sites[i]`.
///
/// # Safety
/// `sites` and `axes` must point to `len` readable elements (may be null if
/// `len` is 0); `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xy_pauli_expectation(
    chain: *const XyChain,
    sites: *const usize,
    axes: *const XyAxis,
    len: usize,
    out: *mut f64,
) -> XyStatus {
    guard(|| unsafe {
        let c = chain_ref(chain)?;
        let factors: Vec<(usize, Axis)> = if len == 0 {
            Vec::new()
        } else {
            if sites.is_null() || axes.is_null() {
                return Err(null("sites or axes"));
            }
            let s = std::slice::from_raw_parts(sites, len);
            let a = std::slice::from_raw_parts(axes, len);
            s.iter().zip(a).map(|(&site, &axis)| (site, axis.into())).collect()
        };
        let p = lib(PauliString::new(factors))?;
        write(out, lib(engine::pauli_expectation(&p, &c.cov))?)
    })
}

/// Generalized tangle `T_k`, `1 ≤ k ≤ 4`. The subset purities are computed
/// on first use and kept with the handle, so later orders are cheap.
///
/// # Safety
/// `chain` must be a live handle not used concurrently from another thread;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xy_tangle(chain: *mut XyChain, k: usize, out: *mut f64) -> XyStatus {
    guard(|| unsafe {
        let c = chain.as_mut().ok_or_else(|| null("chain"))?;
        if !(1..=4).contains(&k) {
            return Err((XyStatus::InvalidArgument, format!("tangle order {k} not in 1..=4")));
        }
        if c.purities.is_none() {
            c.purities = Some(lib(PurityTable::from_covariance(&c.params, &c.cov, 4, None))?);
        }
        let t = c.purities.as_ref().expect("just filled").tangle(k);
        write(out, t.value)
    })
}

/// Entropy in bits of the spins `0, L, 2L, 3L`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xy_entropy_spaced(chain: *const XyChain, spacing: usize, out: *mut f64) -> XyStatus {
    guard(|| unsafe {
        let c = chain_ref(chain)?;
        write(out, lib(entropy_spaced_with(spacing, &c.params, &c.cov))?.value)
    })
}

/// Quasimomentum distribution `n(q)`, `q = 0..N`, written to `out[0..N]`.
///
/// # Safety
/// `out` must point to `capacity` writable doubles; `chain` must be live.
#[no_mangle]
pub unsafe extern "C" fn xy_quasimomentum(chain: *const XyChain, out: *mut f64, capacity: usize) -> XyStatus {
    guard(|| unsafe {
        let c = chain_ref(chain)?;
        let n = c.params.n();
        if out.is_null() {
            return Err(null("out"));
        }
        if capacity < n {
            return Err((XyStatus::BufferTooSmall, format!("need {n} doubles, got {capacity}")));
        }
        let nq = lib(quasimomentum_from(&c.cov))?;
        ptr::copy_nonoverlapping(nq.as_ptr(), out, n);
        Ok(())
    })
}

/// `n(0)` and the noise correlation `Δ(0,0)`.
///
/// # Safety
/// `chain` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn xy_zero_mode_noise(chain: *const XyChain, n0: *mut f64, delta00: *mut f64) -> XyStatus {
    guard(|| unsafe {
        let c = chain_ref(chain)?;
        let z = lib(zero_mode_noise_with(&c.cov))?;
        write(n0, z.n0)?;
        write(delta00, z.delta00)
    })
}

/// `(1 + N)/8`, the largest `Δ(0,0)` any product state can reach.
#[no_mangle]
pub extern "C" fn xy_separability_threshold(n: usize) -> f64 {
    separability_threshold(n)
}

/// Message of the last failure on this thread, or null if none. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn xy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn xy_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
