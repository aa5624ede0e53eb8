//! C interface to `dynvar`.
//!
//! Matrices cross the boundary as interleaved `(re, im)` doubles in
//! column-major order, so an `n×n` matrix occupies `2·n·n` doubles and a
//! superoperator on `M_n` occupies `2·n⁴`. Every fallible call returns a
//! [`DynvarStatus`]; the message for the last failure on the calling thread
//! is available from [`dynvar_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dynvar::cohomology::exactness_report;
use dynvar::generators::{is_elliptic_ccp, is_elliptic_form};
use dynvar::invariants::{extract_invariant, DynamicalInvariant};
use dynvar::io::GeneratorFile;
use dynvar::linalg::{CMat, C64};
use dynvar::semigroup::evolve;
use dynvar::{Error, StateAlgebra, Superoperator, Tolerances};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynvarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DomainViolation = 4,
    NotElliptic = 5,
    NotExact = 6,
    InternalInconsistency = 7,
    NumericalFailure = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// A faithful state on `M_n`.
pub struct DynvarState {
    sa: StateAlgebra,
}

/// A superoperator together with the state it is analyzed against.
pub struct DynvarGenerator {
    sa: StateAlgebra,
    l: Superoperator,
}

/// Extracted momentum space and potential.
pub struct DynvarInvariant {
    n: usize,
    inv: DynamicalInvariant,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DynvarStatus {
    match e {
        Error::Parse(_) | Error::ConventionMismatch(_) | Error::Io(_) => DynvarStatus::ParseError,
        Error::DomainViolation(_) => DynvarStatus::DomainViolation,
        Error::NotElliptic(_) => DynvarStatus::NotElliptic,
        Error::NotExact => DynvarStatus::NotExact,
        Error::InternalInconsistency(_)
        | Error::ReconstructionMismatch(_)
        | Error::SkewExtractionFailure { .. }
        | Error::CommutantViolation(_) => DynvarStatus::InternalInconsistency,
        Error::Numerical(_) => DynvarStatus::NumericalFailure,
        _ => DynvarStatus::InvalidArgument,
    }
}

fn fail(status: DynvarStatus, msg: impl Into<String>) -> DynvarStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> DynvarStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

/// Run `f`, turning panics into [`DynvarStatus::Panic`].
fn guard<F: FnOnce() -> DynvarStatus>(f: F) -> DynvarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(DynvarStatus::Panic, msg)
        }
    }
}

unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize) -> CMat {
    let s = std::slice::from_raw_parts(data, 2 * rows * cols);
    CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (j * rows + i);
        C64::new(s[k], s[k + 1])
    })
}

unsafe fn write_matrix(m: &CMat, out: *mut f64, len: usize) -> DynvarStatus {
    let need = 2 * m.len();
    if len < need {
        return fail(
            DynvarStatus::BufferTooSmall,
            format!("buffer holds {len} doubles, need {need}"),
        );
    }
    let s = std::slice::from_raw_parts_mut(out, need);
    for (k, z) in m.iter().enumerate() {
        s[2 * k] = z.re;
        s[2 * k + 1] = z.im;
    }
    DynvarStatus::Ok
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, DynvarStatus> {
    if p.is_null() {
        return Err(fail(DynvarStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(DynvarStatus::InvalidArgument, "path is not valid UTF-8"))
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dynvar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a state from an `n×n` density matrix.
///
/// # Safety
/// `omega` must point to `2·n·n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_state_new(
    n: usize,
    omega: *const f64,
    out: *mut *mut DynvarState,
) -> DynvarStatus {
    guard(|| {
        if omega.is_null() || out.is_null() {
            return fail(DynvarStatus::NullPointer, "null argument");
        }
        if n == 0 {
            return fail(DynvarStatus::InvalidArgument, "n must be positive");
        }
        let m = read_matrix(omega, n, n);
        match StateAlgebra::with_tolerances(n, m, Tolerances::from_env()) {
            Ok(sa) => {
                *out = Box::into_raw(Box::new(DynvarState { sa }));
                DynvarStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `state` must come from [`dynvar_state_new`] (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dynvar_state_free(state: *mut DynvarState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Dimension `n` of the algebra `M_n`, or 0 for a null handle.
///
/// # Safety
/// `state` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn dynvar_state_dim(state: *const DynvarState) -> usize {
    state.as_ref().map_or(0, |s| s.sa.n())
}

/// Build a generator from its `n²×n²` matrix on column-stacked vectors.
///
/// # Safety
/// `state` must be live; `l` must point to `2·n⁴` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_generator_new(
    state: *const DynvarState,
    l: *const f64,
    out: *mut *mut DynvarGenerator,
) -> DynvarStatus {
    guard(|| {
        let Some(st) = state.as_ref() else {
            return fail(DynvarStatus::NullPointer, "state is null");
        };
        if l.is_null() || out.is_null() {
            return fail(DynvarStatus::NullPointer, "null argument");
        }
        let n = st.sa.n();
        let m = read_matrix(l, n * n, n * n);
        match Superoperator::from_matrix(n, m) {
            Ok(l) => {
                *out = Box::into_raw(Box::new(DynvarGenerator {
                    sa: st.sa.clone(),
                    l,
                }));
                DynvarStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Load a generator file. `state_out` may be null; otherwise it receives a
/// new handle for the file's state.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_generator_load(
    path: *const c_char,
    out: *mut *mut DynvarGenerator,
    state_out: *mut *mut DynvarState,
) -> DynvarStatus {
    guard(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(DynvarStatus::NullPointer, "out is null");
        }
        let loaded = match GeneratorFile::load(path).and_then(|f| f.resolve(Tolerances::from_env())) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        if !state_out.is_null() {
            *state_out = Box::into_raw(Box::new(DynvarState {
                sa: loaded.sa.clone(),
            }));
        }
        *out = Box::into_raw(Box::new(DynvarGenerator {
            sa: loaded.sa,
            l: loaded.l,
        }));
        DynvarStatus::Ok
    })
}

/// # Safety
/// `g` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dynvar_generator_free(g: *mut DynvarGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Ellipticity, decided by two independent tests which must agree.
///
/// # Safety
/// `g` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_is_elliptic(g: *const DynvarGenerator, out: *mut bool) -> DynvarStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(DynvarStatus::NullPointer, "null argument");
        };
        let form = match is_elliptic_form(&g.sa, &g.l) {
            Ok(r) => r.elliptic,
            Err(e) => return from_error(e),
        };
        let ccp = match is_elliptic_ccp(&g.sa, &g.l) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        if form != ccp {
            return fail(
                DynvarStatus::InternalInconsistency,
                "ellipticity tests disagree",
            );
        }
        *out = form;
        DynvarStatus::Ok
    })
}

/// # Safety
/// `g` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_is_exact(g: *const DynvarGenerator, out: *mut bool) -> DynvarStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(DynvarStatus::NullPointer, "null argument");
        };
        match exactness_report(&g.sa, &g.l) {
            Ok(r) => {
                *out = r.exact;
                DynvarStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Extract the momentum space and potential of an exact elliptic generator.
///
/// # Safety
/// `g` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_extract(
    g: *const DynvarGenerator,
    out: *mut *mut DynvarInvariant,
) -> DynvarStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(DynvarStatus::NullPointer, "null argument");
        };
        match extract_invariant(&g.sa, &g.l) {
            Ok(inv) => {
                *out = Box::into_raw(Box::new(DynvarInvariant { n: g.sa.n(), inv }));
                DynvarStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `inv` must come from [`dynvar_extract`] (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dynvar_invariant_free(inv: *mut DynvarInvariant) {
    if !inv.is_null() {
        drop(Box::from_raw(inv));
    }
}

/// Dimension of the momentum space, or 0 for a null handle.
///
/// # Safety
/// `inv` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn dynvar_invariant_momentum_dim(inv: *const DynvarInvariant) -> usize {
    inv.as_ref().map_or(0, |i| i.inv.momenta.dim())
}

/// Copy the potential `v` (`2·n·n` doubles).
///
/// # Safety
/// `inv` must be live; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dynvar_invariant_potential(
    inv: *const DynvarInvariant,
    buf: *mut f64,
    len: usize,
) -> DynvarStatus {
    guard(|| {
        let (Some(inv), false) = (inv.as_ref(), buf.is_null()) else {
            return fail(DynvarStatus::NullPointer, "null argument");
        };
        write_matrix(&inv.inv.v, buf, len)
    })
}

/// Copy momentum `k` of the orthonormal basis (`2·n·n` doubles).
///
/// # Safety
/// `inv` must be live; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dynvar_invariant_momentum(
    inv: *const DynvarInvariant,
    k: usize,
    buf: *mut f64,
    len: usize,
) -> DynvarStatus {
    guard(|| {
        let (Some(inv), false) = (inv.as_ref(), buf.is_null()) else {
            return fail(DynvarStatus::NullPointer, "null argument");
        };
        match inv.inv.momenta.basis().get(k) {
            Some(p) => write_matrix(p, buf, len),
            None => fail(
                DynvarStatus::InvalidArgument,
                format!("momentum index {k} out of range for dimension {}", inv.inv.momenta.dim()),
            ),
        }
    })
}

/// Dimension `n` of the invariant's algebra.
///
/// # Safety
/// `inv` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn dynvar_invariant_n(inv: *const DynvarInvariant) -> usize {
    inv.as_ref().map_or(0, |i| i.n)
}

/// Write `exp(tL)` (`2·n⁴` doubles).
///
/// # Safety
/// `g` must be live; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dynvar_evolve(
    g: *const DynvarGenerator,
    t: f64,
    buf: *mut f64,
    len: usize,
) -> DynvarStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), buf.is_null()) else {
            return fail(DynvarStatus::NullPointer, "null argument");
        };
        match evolve(&g.l, t) {
            Ok(phi) => write_matrix(phi.mat(), buf, len),
            Err(e) => from_error(e),
        }
    })
}

/// Run the full analysis of a generator file and return the JSON report.
/// `exit_code` receives the command-line exit code for the same analysis.
/// Free the string with [`dynvar_string_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` and `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn dynvar_analyze_json(
    path: *const c_char,
    out: *mut *mut c_char,
    exit_code: *mut c_int,
) -> DynvarStatus {
    guard(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if out.is_null() || exit_code.is_null() {
            return fail(DynvarStatus::NullPointer, "null argument");
        }
        let loaded = match GeneratorFile::load(path).and_then(|f| f.resolve(Tolerances::from_env())) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        let (report, code) = dynvar::cli::analyze(&loaded);
        let text = report.to_string();
        *exit_code = code;
        *out = CString::new(text).unwrap_or_default().into_raw();
        DynvarStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dynvar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
