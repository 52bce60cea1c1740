//! C ABI for scarlab.
//!
//! A `ScarlabModel` owns the blockaded basis of one ring length together with
//! the eigendecomposition of the Hermitian PXP Hamiltonian; every biased
//! quantity is derived from it through the similarity map. All entry points
//! return a `ScarlabStatus`, never unwind across the boundary, and leave a
//! per-thread message readable with `scarlab_last_error_message`.
//!
//! Array outputs follow one convention: the caller passes a buffer and its
//! capacity, the library writes the required length to `*written` and returns
//! `SCARLAB_STATUS_BUFFER_TOO_SMALL` (without writing data) if it does not fit.
//! A null buffer with capacity 0 is a valid size query.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use scarlab::spectral::p_nup_hermitian;
use scarlab::{
    check_similarity, eigendecompose_h0, enumerate_basis, evolve_similarity, identify_scars, p_nup,
    right_eigvec, schmidt_entropy, ConstrainedBasis, CutSpec, EigenSystem, ScarError,
};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScarlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Numerical = 4,
    Panic = 5,
}

/// Opaque model handle.
pub struct ScarlabModel {
    basis: ConstrainedBasis,
    eig: EigenSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

struct Failure(ScarlabStatus, String);

impl From<ScarError> for Failure {
    fn from(err: ScarError) -> Self {
        let status = match err {
            ScarError::StepSizeUnderflow { .. }
            | ScarError::Decomposition { .. }
            | ScarError::AtEigenvector { .. }
            | ScarError::Io(_)
            | ScarError::Json(_) => ScarlabStatus::Numerical,
            _ => ScarlabStatus::InvalidArgument,
        };
        Failure(status, err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ScarlabStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ScarlabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ScarlabStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {message}"));
            ScarlabStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(model: *const ScarlabModel) -> Result<&'a ScarlabModel, Failure> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies `data` into `(buf, capacity)` under the buffer convention above.
unsafe fn fill<T: Copy>(data: &[T], buf: *mut T, capacity: usize, written: *mut usize) -> Result<(), Failure> {
    write_out(written, data.len(), "written")?;
    if capacity < data.len() {
        return Err(Failure(
            ScarlabStatus::BufferTooSmall,
            format!("buffer holds {capacity} elements, {} required", data.len()),
        ));
    }
    if data.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    Ok(())
}

fn check_alpha(model: &ScarlabModel, alpha: usize) -> Result<(), Failure> {
    if alpha >= model.eig.dim() {
        return Err(ScarError::IndexOutOfRange { index: alpha, dim: model.eig.dim() }.into());
    }
    Ok(())
}

/// Builds the model for a ring of `length` sites (even, 4..=24) and stores a
/// new handle in `*out`. Release it with `scarlab_model_free`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn scarlab_model_new(length: usize, out: *mut *mut ScarlabModel) -> ScarlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = enumerate_basis(length)?;
        let eig = eigendecompose_h0(&basis)?;
        out.write(Box::into_raw(Box::new(ScarlabModel { basis, eig })));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from `scarlab_model_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn scarlab_model_free(model: *mut ScarlabModel) {
    if !model.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(model))));
    }
}

/// Ring length and sector dimension.
///
/// # Safety
/// `model` must be a live handle; outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn scarlab_model_dimension(
    model: *const ScarlabModel,
    length: *mut usize,
    dim: *mut usize,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        write_out(length, m.basis.length(), "length")?;
        write_out(dim, m.basis.dim(), "dim")
    })
}

/// Basis configurations as bit patterns (bit `i` = site `i` up), in index order.
///
/// # Safety
/// `model` must be a live handle; `buf` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn scarlab_model_states(
    model: *const ScarlabModel,
    buf: *mut u32,
    capacity: usize,
    written: *mut usize,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        let bits: Vec<u32> = m.basis.states().iter().map(|s| s.bits()).collect();
        fill(&bits, buf, capacity, written)
    })
}

/// Eigenvalues of `H_0` (and of every `H_g`), ascending.
///
/// # Safety
/// `model` must be a live handle; `buf` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn scarlab_model_energies(
    model: *const ScarlabModel,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> ScarlabStatus {
    guard(|| fill(model_ref(model)?.eig.energies(), buf, capacity, written))
}

/// Eigenvector indices of the scar tower, ascending.
///
/// # Safety
/// `model` must be a live handle; `buf` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn scarlab_scar_indices(
    model: *const ScarlabModel,
    buf: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        fill(&identify_scars(&m.eig, &m.basis).scar_indices, buf, capacity, written)
    })
}

/// Largest entrywise deviation of `V H_0 V⁻¹` from `H_g`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scarlab_similarity_residual(
    model: *const ScarlabModel,
    g: f64,
    out: *mut f64,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        write_out(out, check_similarity(&m.basis, g)?, "out")
    })
}

/// Néel return probabilities from `|ℤ̄₂⟩` under `H_g` at `n_times` times.
/// Each output array must hold `n_times` values; `log_norm_sq` may be null.
///
/// # Safety
/// `model` must be a live handle; `times` must hold `n_times` values and the
/// non-null outputs must be writable for `n_times` values.
#[no_mangle]
pub unsafe extern "C" fn scarlab_evolve_neel(
    model: *const ScarlabModel,
    g: f64,
    times: *const f64,
    n_times: usize,
    p_z2: *mut f64,
    p_z2bar: *mut f64,
    log_norm_sq: *mut f64,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        if n_times == 0 {
            return Ok(());
        }
        if times.is_null() {
            return Err(null("times"));
        }
        if p_z2.is_null() || p_z2bar.is_null() {
            return Err(null("probability output"));
        }
        let times = slice::from_raw_parts(times, n_times);
        let trace = evolve_similarity(&m.basis, &m.eig, g, m.basis.neel_states().1, times)?;
        ptr::copy_nonoverlapping(trace.p_z2.as_ptr(), p_z2, n_times);
        ptr::copy_nonoverlapping(trace.p_z2bar.as_ptr(), p_z2bar, n_times);
        if !log_norm_sq.is_null() {
            ptr::copy_nonoverlapping(trace.log_norm_sq.as_ptr(), log_norm_sq, n_times);
        }
        Ok(())
    })
}

/// Up-spin distribution `p_N` (N = 0..=L/2) of right eigenvector `alpha` of `H_g`.
///
/// # Safety
/// `model` must be a live handle; `buf` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn scarlab_p_nup(
    model: *const ScarlabModel,
    g: f64,
    alpha: usize,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        check_alpha(m, alpha)?;
        let p = if g == 0.0 {
            p_nup_hermitian(&m.eig, &m.basis, alpha)?
        } else {
            p_nup(&m.eig, &m.basis, g, alpha)?.p
        };
        fill(&p, buf, capacity, written)
    })
}

/// Half-ring entanglement entropy (bits) of right eigenvector `alpha` of
/// `H_g`, for the cut covering sites `cut_start .. cut_start + L/2`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scarlab_entropy(
    model: *const ScarlabModel,
    g: f64,
    alpha: usize,
    cut_start: usize,
    out: *mut f64,
) -> ScarlabStatus {
    guard(|| {
        let m = model_ref(model)?;
        check_alpha(m, alpha)?;
        let v = right_eigvec(&m.eig, &m.basis, g, alpha)?;
        let s = schmidt_entropy(&m.basis, &v, CutSpec::half(m.basis.length(), cut_start)?)?;
        write_out(out, s, "out")
    })
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to fit) into `buf` and returns the full message length without the NUL.
/// Returns 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or writable for `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn scarlab_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(message) = e.as_ref() else {
            if !buf.is_null() && capacity > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = message.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn scarlab_status_string(status: ScarlabStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        ScarlabStatus::Ok => b"ok\0",
        ScarlabStatus::NullPointer => b"null pointer argument\0",
        ScarlabStatus::InvalidArgument => b"invalid argument\0",
        ScarlabStatus::BufferTooSmall => b"output buffer too small\0",
        ScarlabStatus::Numerical => b"numerical failure\0",
        ScarlabStatus::Panic => b"internal panic\0",
    };
    text.as_ptr().cast()
}

/// Library version, NUL-terminated.
#[no_mangle]
pub extern "C" fn scarlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
