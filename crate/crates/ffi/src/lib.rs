//! C interface to the `atfield` solvers.
//!
//! States are opaque heap objects owned by the caller once returned and
//! released with [`atf_state_free`]. Every fallible call returns an
//! [`AtfStatus`]; the message of the most recent failure on the calling
//! thread is available from [`atf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use atfield::altmin::{alternate_minimize, constrained_jump_construct, reflect_and_extend, AltMinConfig};
use atfield::criticality;
use atfield::energy::{at_energy, ms_min_value, Parameters, PhaseField1D};
use atfield::io;
use atfield::mesh::{Grid1D, NodalField1D};
use atfield::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtfStatus {
    Ok = 0,
    Contract = 1,
    Config = 2,
    NonConvergence = 3,
    Solver = 4,
    Parse = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Opaque 1D state.
pub struct AtfState {
    inner: PhaseField1D,
}

/// Energy split of a state.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AtfEnergy {
    pub bulk: f64,
    pub grad_surface: f64,
    pub potential_surface: f64,
    pub total: f64,
    pub modica_mortola: f64,
    pub equipartition_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AtfStatus {
    match e {
        Error::Contract(_) => AtfStatus::Contract,
        Error::Config(_) => AtfStatus::Config,
        Error::NonConvergence { .. } => AtfStatus::NonConvergence,
        Error::Solver(_) => AtfStatus::Solver,
        Error::Parse(_) => AtfStatus::Parse,
        Error::Io(_) => AtfStatus::Io,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (AtfStatus, String)>) -> AtfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AtfStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside atfield".into());
            AtfStatus::Panic
        }
    }
}

fn lift<T>(r: atfield::Result<T>) -> Result<T, (AtfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AtfStatus, String) {
    (AtfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn state_ref<'a>(p: *const AtfState) -> Result<&'a PhaseField1D, (AtfStatus, String)> {
    // SAFETY: the caller passes a pointer obtained from this library or null.
    unsafe { p.as_ref() }.map(|s| &s.inner).ok_or_else(|| null("state"))
}

unsafe fn store(out: *mut *mut AtfState, state: PhaseField1D) -> Result<(), (AtfStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: `out` is non-null and points to writable storage for a pointer.
    unsafe { *out = Box::into_raw(Box::new(AtfState { inner: state })) };
    Ok(())
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn atf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Minimal Mumford-Shah energy `min(a^2 / L, 1)` of the 1D problem.
///
/// # Safety
/// `out` must be null or point to writable storage for a double.
#[no_mangle]
pub unsafe extern "C" fn atf_ms_min_value(a: f64, length: f64, out: *mut f64) -> AtfStatus {
    guard(|| {
        let v = lift(ms_min_value(a, length))?;
        // SAFETY: checked non-null; the caller guarantees writability.
        unsafe { out.as_mut() }.map(|o| *o = v).ok_or_else(|| null("output pointer"))
    })
}

/// Affine-branch critical point on `n` cells by alternating minimization from `v = 1`.
///
/// # Safety
/// `out` must be null or point to writable storage for a state pointer.
#[no_mangle]
pub unsafe extern "C" fn atf_solve_affine(
    a: f64,
    length: f64,
    eps: f64,
    eta: f64,
    n: usize,
    out: *mut *mut AtfState,
) -> AtfStatus {
    guard(|| {
        let state = lift((|| {
            let grid = Grid1D::new(length, n)?;
            let p = Parameters::new(eps, eta)?;
            let start = PhaseField1D::with_linear_u(NodalField1D::constant(grid, 1.0)?, p, (0.0, a))?;
            Ok(alternate_minimize(&start, &AltMinConfig::default())?.0)
        })())?;
        // SAFETY: forwarded caller guarantee.
        unsafe { store(out, state) }
    })
}

/// Jump-branch critical point on `n` (even) cells through the constrained
/// half-interval construction with bound `alpha` on `v(L/2)`.
///
/// # Safety
/// `out` must be null or point to writable storage for a state pointer.
#[no_mangle]
pub unsafe extern "C" fn atf_solve_jump(
    a: f64,
    length: f64,
    eps: f64,
    eta: f64,
    n: usize,
    alpha: f64,
    out: *mut *mut AtfState,
) -> AtfStatus {
    guard(|| {
        if !n.is_multiple_of(2) {
            return Err((AtfStatus::Config, format!("cell count must be even, got {n}")));
        }
        let state = lift((|| {
            let p = Parameters::new(eps, eta)?;
            let jc = constrained_jump_construct(n / 2, a, length, p, alpha, &AltMinConfig::default())?;
            reflect_and_extend(&jc.half)
        })())?;
        // SAFETY: forwarded caller guarantee.
        unsafe { store(out, state) }
    })
}

/// Build a state from nodal arrays of length `n_nodes`.
///
/// # Safety
/// `u` and `v` must point to `n_nodes` readable doubles; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn atf_state_from_arrays(
    length: f64,
    eps: f64,
    eta: f64,
    g0: f64,
    g1: f64,
    u: *const f64,
    v: *const f64,
    n_nodes: usize,
    out: *mut *mut AtfState,
) -> AtfStatus {
    guard(|| {
        if u.is_null() || v.is_null() {
            return Err(null("input array"));
        }
        if n_nodes < 2 {
            return Err((AtfStatus::Contract, "need at least two nodes".into()));
        }
        // SAFETY: non-null and, by contract, valid for `n_nodes` reads.
        let (us, vs) = unsafe { (std::slice::from_raw_parts(u, n_nodes), std::slice::from_raw_parts(v, n_nodes)) };
        let state = lift((|| {
            let grid = Grid1D::new(length, n_nodes - 1)?;
            PhaseField1D::new(
                NodalField1D::new(grid, us.to_vec())?,
                NodalField1D::new(grid, vs.to_vec())?,
                Parameters::new(eps, eta)?,
                (g0, g1),
            )
        })())?;
        // SAFETY: forwarded caller guarantee.
        unsafe { store(out, state) }
    })
}

/// Release a state. Null is ignored.
///
/// # Safety
/// `state` must be null or a pointer returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn atf_state_free(state: *mut AtfState) {
    if !state.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Number of grid nodes, or 0 for a null state.
///
/// # Safety
/// `state` must be null or a live state pointer.
#[no_mangle]
pub unsafe extern "C" fn atf_state_n_nodes(state: *const AtfState) -> usize {
    // SAFETY: forwarded caller guarantee.
    unsafe { state.as_ref() }.map_or(0, |s| s.inner.grid().n_nodes())
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<(), (AtfStatus, String)> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < values.len() {
        return Err((AtfStatus::Contract, format!("buffer holds {len} values, {} needed", values.len())));
    }
    // SAFETY: `buf` is valid for `len >= values.len()` writes by contract.
    unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
    Ok(())
}

/// Copy the nodal values of u into `buf` (capacity `len`).
///
/// # Safety
/// `state` live or null; `buf` valid for `len` writes or null.
#[no_mangle]
pub unsafe extern "C" fn atf_state_copy_u(state: *const AtfState, buf: *mut f64, len: usize) -> AtfStatus {
    // SAFETY: forwarded caller guarantees.
    guard(|| unsafe { copy_out(state_ref(state)?.u().values(), buf, len) })
}

/// Copy the nodal values of v into `buf` (capacity `len`).
///
/// # Safety
/// `state` live or null; `buf` valid for `len` writes or null.
#[no_mangle]
pub unsafe extern "C" fn atf_state_copy_v(state: *const AtfState, buf: *mut f64, len: usize) -> AtfStatus {
    // SAFETY: forwarded caller guarantees.
    guard(|| unsafe { copy_out(state_ref(state)?.v().values(), buf, len) })
}

/// Energy split of a state.
///
/// # Safety
/// `state` live or null; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn atf_state_energy(state: *const AtfState, out: *mut AtfEnergy) -> AtfStatus {
    guard(|| {
        // SAFETY: forwarded caller guarantee.
        let e = at_energy(unsafe { state_ref(state) }?);
        let r = AtfEnergy {
            bulk: e.bulk,
            grad_surface: e.grad_surface,
            potential_surface: e.potential_surface,
            total: e.total,
            modica_mortola: e.modica_mortola,
            equipartition_residual: e.equipartition_residual,
        };
        // SAFETY: checked non-null.
        unsafe { out.as_mut() }.map(|o| *o = r).ok_or_else(|| null("output pointer"))
    })
}

/// Weak-residual norms of the u and v equations.
///
/// # Safety
/// `state` live or null; outputs writable or null.
#[no_mangle]
pub unsafe extern "C" fn atf_state_residuals(state: *const AtfState, u_res: *mut f64, v_res: *mut f64) -> AtfStatus {
    guard(|| {
        // SAFETY: forwarded caller guarantee.
        let (ru, rv) = criticality::residuals(unsafe { state_ref(state) }?);
        // SAFETY: checked non-null.
        match unsafe { (u_res.as_mut(), v_res.as_mut()) } {
            (Some(a), Some(b)) => {
                *a = ru;
                *b = rv;
                Ok(())
            }
            _ => Err(null("output pointer")),
        }
    })
}

/// Mean flux `c` and its maximal deviation.
///
/// # Safety
/// `state` live or null; outputs writable or null.
#[no_mangle]
pub unsafe extern "C" fn atf_state_flux(state: *const AtfState, c: *mut f64, dev: *mut f64) -> AtfStatus {
    guard(|| {
        // SAFETY: forwarded caller guarantee.
        let (m, d) = criticality::flux_constant(unsafe { state_ref(state) }?);
        // SAFETY: checked non-null.
        match unsafe { (c.as_mut(), dev.as_mut()) } {
            (Some(a), Some(b)) => {
                *a = m;
                *b = d;
                Ok(())
            }
            _ => Err(null("output pointer")),
        }
    })
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, (AtfStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    // SAFETY: non-null, nul-terminated by contract.
    let s = unsafe { CStr::from_ptr(p) }.to_str().map_err(|e| (AtfStatus::Parse, e.to_string()))?;
    Ok(Path::new(s))
}

/// Write the state CSV.
///
/// # Safety
/// `state` live or null; `path` a nul-terminated UTF-8 string or null.
#[no_mangle]
pub unsafe extern "C" fn atf_state_write_csv(state: *const AtfState, path: *const c_char) -> AtfStatus {
    // SAFETY: forwarded caller guarantees.
    guard(|| unsafe { lift(io::write_state_csv(path_arg(path)?, state_ref(state)?)) })
}

/// Read a state CSV.
///
/// # Safety
/// `path` a nul-terminated UTF-8 string or null; `out` as in the solvers.
#[no_mangle]
pub unsafe extern "C" fn atf_state_read_csv(path: *const c_char, out: *mut *mut AtfState) -> AtfStatus {
    guard(|| {
        // SAFETY: forwarded caller guarantees.
        let state = lift(io::read_state_csv(unsafe { path_arg(path) }?))?;
        // SAFETY: forwarded caller guarantee.
        unsafe { store(out, state) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_pointers_are_reported() {
        // SAFETY: null is an accepted input everywhere.
        unsafe {
            assert_eq!(atf_ms_min_value(1.0, 2.0, std::ptr::null_mut()), AtfStatus::NullPointer);
            assert_eq!(atf_state_n_nodes(std::ptr::null()), 0);
            atf_state_free(std::ptr::null_mut());
        }
        assert!(!atf_last_error().is_null());
    }

    #[test]
    fn min_value_through_the_interface() {
        let mut x = 0.0;
        // SAFETY: `x` is a valid output location.
        assert_eq!(unsafe { atf_ms_min_value(2.0, 1.0, &mut x) }, AtfStatus::Ok);
        assert_eq!(x, 1.0);
        // SAFETY: as above.
        assert_eq!(unsafe { atf_ms_min_value(1.0, -1.0, &mut x) }, AtfStatus::Contract);
    }
}
