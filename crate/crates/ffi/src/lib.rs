//! C ABI over `qcldpc`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a `QcStatus`; on failure `qc_last_error` describes the cause.
//! Results are written through caller-provided out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use qcldpc::bethe::{bp_sum_product, permanent_exact, BpOptions, NonNegMatrix};
use qcldpc::construct::{atlas, AtlasEntry};
use qcldpc::factor::{masks_for, sf_optimize, tsvd, Budget, Method};
use qcldpc::graph::{qc_girth, TannerGraph};
use qcldpc::nishimori::{estimate_beta_nishimori, sample_spin_glass, CouplingFamily, WeightedGraph};
use qcldpc::qc::{ExponentMatrix, SparseBinaryMatrix};
use qcldpc::Error;

/// Outcome of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Parse = 4,
    Construction = 5,
    Lookup = 6,
    Estimation = 7,
    NonFinite = 8,
    Io = 9,
    /// The output buffer was too small; the required size was reported.
    BufferTooSmall = 10,
    Panic = 11,
}

/// Opaque exponent matrix.
pub struct QcExponent(ExponentMatrix);

/// Opaque sparse binary matrix.
pub struct QcBinary(SparseBinaryMatrix);

/// Opaque weighted graph.
pub struct QcGraph(WeightedGraph);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> QcStatus {
    match e {
        Error::Domain(_) => QcStatus::Domain,
        Error::Parse { .. } | Error::Json(_) => QcStatus::Parse,
        Error::Construction(_) => QcStatus::Construction,
        Error::Lookup(_) => QcStatus::Lookup,
        Error::Estimation(_) => QcStatus::Estimation,
        Error::NonFinite(_) => QcStatus::NonFinite,
        Error::Io(_) => QcStatus::Io,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QcStatus>) -> QcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            QcStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, QcStatus>;
}

impl<T> OrStatus<T> for qcldpc::Result<T> {
    fn or_status(self) -> Result<T, QcStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn nonnull<'a, T>(p: *const T) -> Result<&'a T, QcStatus> {
    // SAFETY: callers pass pointers obtained from this library or valid C storage.
    unsafe { p.as_ref() }.ok_or_else(|| {
        set_error("null pointer argument".into());
        QcStatus::NullPointer
    })
}

fn out<T>(p: *mut T, v: T) -> Result<(), QcStatus> {
    if p.is_null() {
        set_error("null output pointer".into());
        return Err(QcStatus::NullPointer);
    }
    // SAFETY: non-null and supplied by the caller for writing one T.
    unsafe { p.write(v) };
    Ok(())
}

fn c_str<'a>(s: *const c_char) -> Result<&'a str, QcStatus> {
    if s.is_null() {
        set_error("null string argument".into());
        return Err(QcStatus::NullPointer);
    }
    // SAFETY: non-null, NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(s) }.to_str().map_err(|_| {
        set_error("string is not valid UTF-8".into());
        QcStatus::InvalidUtf8
    })
}

fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], QcStatus> {
    if p.is_null() {
        set_error("null array argument".into());
        return Err(QcStatus::NullPointer);
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

/// Copies `text` plus a NUL into `buf`; `needed` receives the full size.
fn copy_out(text: &[u8], buf: *mut c_char, cap: usize, needed: *mut usize) -> bool {
    if !needed.is_null() {
        // SAFETY: non-null, caller-provided.
        unsafe { needed.write(text.len() + 1) };
    }
    if buf.is_null() || cap < text.len() + 1 {
        return false;
    }
    // SAFETY: `buf` holds at least `text.len() + 1` bytes.
    unsafe {
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast(), text.len());
        buf.add(text.len()).write(0);
    }
    true
}

fn write_text(text: &[u8], buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), QcStatus> {
    if copy_out(text, buf, cap, needed) {
        Ok(())
    } else {
        set_error(format!("buffer needs {} bytes", text.len() + 1));
        Err(QcStatus::BufferTooSmall)
    }
}

fn boxed<T>(v: T, dst: *mut *mut T) -> Result<(), QcStatus> {
    if dst.is_null() {
        set_error("null handle destination".into());
        return Err(QcStatus::NullPointer);
    }
    // SAFETY: non-null destination for one pointer.
    unsafe { dst.write(Box::into_raw(Box::new(v))) };
    Ok(())
}

/// Message for the last failed call on this thread, copied into `buf`.
///
/// # Safety
/// `buf` must hold `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn qc_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> QcStatus {
    // leaves the stored message intact so a size query can be followed by a read
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    if copy_out(msg.as_bytes(), buf, cap, needed) {
        QcStatus::Ok
    } else {
        QcStatus::BufferTooSmall
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses exponent-matrix text (`m n L` header, `-` for empty cells).
///
/// # Safety
/// `text` must be NUL-terminated; `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_exponent_from_text(text: *const c_char, dst: *mut *mut QcExponent) -> QcStatus {
    guard(|| {
        let t = c_str(text)?;
        let e = ExponentMatrix::read_text(BufReader::new(t.as_bytes())).or_status()?;
        boxed(QcExponent(e), dst)
    })
}

/// Loads a named fixture that has exponent form.
///
/// # Safety
/// `name` must be NUL-terminated; `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_exponent_from_atlas(name: *const c_char, dst: *mut *mut QcExponent) -> QcStatus {
    guard(|| {
        match atlas(c_str(name)?).or_status()? {
            AtlasEntry::Exponent(e) => boxed(QcExponent(e), dst),
            AtlasEntry::Binary(_) => {
                set_error("fixture has no exponent form".into());
                Err(QcStatus::Domain)
            }
        }
    })
}

/// Writes the exponent text form into `buf`.
///
/// # Safety
/// `e` must be a live handle; `buf` must hold `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn qc_exponent_to_text(e: *const QcExponent, buf: *mut c_char, cap: usize, needed: *mut usize) -> QcStatus {
    guard(|| {
        let mut text = Vec::new();
        nonnull(e)?.0.write_text(&mut text).or_status()?;
        write_text(&text, buf, cap, needed)
    })
}

/// Girth of the expanded code via the QC cycle condition; 0 if acyclic.
///
/// # Safety
/// `e` must be a live handle; `girth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_exponent_girth(e: *const QcExponent, girth: *mut usize) -> QcStatus {
    guard(|| out(girth, qc_girth(&nonnull(e)?.0).unwrap_or(0)))
}

/// Expands to the binary parity-check matrix.
///
/// # Safety
/// `e` must be a live handle; `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_exponent_expand(e: *const QcExponent, dst: *mut *mut QcBinary) -> QcStatus {
    guard(|| boxed(QcBinary(nonnull(e)?.0.expand()), dst))
}

/// # Safety
/// `e` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qc_exponent_free(e: *mut QcExponent) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Parses alist text.
///
/// # Safety
/// `text` must be NUL-terminated; `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_binary_from_alist(text: *const c_char, dst: *mut *mut QcBinary) -> QcStatus {
    guard(|| {
        let t = c_str(text)?;
        let h = SparseBinaryMatrix::read_alist(BufReader::new(t.as_bytes())).or_status()?;
        boxed(QcBinary(h), dst)
    })
}

/// Dimensions and number of ones.
///
/// # Safety
/// `h` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_binary_shape(h: *const QcBinary, rows: *mut usize, cols: *mut usize, nnz: *mut usize) -> QcStatus {
    guard(|| {
        let h = &nonnull(h)?.0;
        out(rows, h.nrows())?;
        out(cols, h.ncols())?;
        out(nnz, h.nnz())
    })
}

/// Tanner-graph girth; 0 if acyclic.
///
/// # Safety
/// `h` must be a live handle; `girth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_binary_girth(h: *const QcBinary, girth: *mut usize) -> QcStatus {
    guard(|| out(girth, TannerGraph::from_matrix(&nonnull(h)?.0).girth().unwrap_or(0)))
}

/// Writes alist text into `buf`.
///
/// # Safety
/// `h` must be a live handle; `buf` must hold `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn qc_binary_to_alist(h: *const QcBinary, buf: *mut c_char, cap: usize, needed: *mut usize) -> QcStatus {
    guard(|| {
        let mut text = Vec::new();
        nonnull(h)?.0.write_alist(&mut text).or_status()?;
        write_text(&text, buf, cap, needed)
    })
}

/// # Safety
/// `h` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qc_binary_free(h: *mut QcBinary) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

fn nonneg(n: usize, w: *const f64) -> Result<NonNegMatrix, QcStatus> {
    NonNegMatrix::new(n, slice(w, n * n)?.to_vec()).or_status()
}

/// Exact permanent of a row-major `n x n` non-negative matrix (`n <= 20`).
///
/// # Safety
/// `w` must hold `n * n` doubles; `perm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_permanent_exact(n: usize, w: *const f64, perm: *mut f64) -> QcStatus {
    guard(|| out(perm, permanent_exact(&nonneg(n, w)?).or_status()?))
}

/// Bethe permanent by damped sum-product belief propagation.
///
/// # Safety
/// `w` must hold `n * n` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_permanent_bethe(
    n: usize,
    w: *const f64,
    damping: f64,
    tol: f64,
    max_iter: usize,
    perm: *mut f64,
    converged: *mut bool,
) -> QcStatus {
    guard(|| {
        let r = bp_sum_product(&nonneg(n, w)?, BpOptions { damping, tol, max_iter }).or_status()?;
        out(perm, r.perm_bethe)?;
        out(converged, r.converged)
    })
}

/// Graph from parallel edge arrays `(i[k], j[k], J[k])`.
///
/// # Safety
/// The three arrays must hold `m` entries; `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_graph_new(
    n: usize,
    m: usize,
    i: *const usize,
    j: *const usize,
    coupling: *const f64,
    dst: *mut *mut QcGraph,
) -> QcStatus {
    guard(|| {
        if m > 0 && (i.is_null() || j.is_null()) {
            set_error("null edge array".into());
            return Err(QcStatus::NullPointer);
        }
        let c = if m == 0 { &[][..] } else { slice(coupling, m)? };
        let edges = (0..m).map(|k| (*i.add(k), *j.add(k), c[k])).collect();
        boxed(QcGraph(WeightedGraph::new(n, edges).or_status()?), dst)
    })
}

/// Planted Erdős–Rényi instance with `±1` couplings tilted by `beta_n`.
///
/// # Safety
/// `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_graph_sample_two_point(n: usize, avg_degree: f64, beta_n: f64, seed: u64, dst: *mut *mut QcGraph) -> QcStatus {
    guard(|| {
        let s = sample_spin_glass(n, avg_degree, CouplingFamily::TwoPoint { s: 1.0 }, beta_n, seed).or_status()?;
        boxed(QcGraph(s.graph), dst)
    })
}

/// Node and edge counts.
///
/// # Safety
/// `g` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_graph_size(g: *const QcGraph, nodes: *mut usize, edges: *mut usize) -> QcStatus {
    guard(|| {
        let g = &nonnull(g)?.0;
        out(nodes, g.n())?;
        out(edges, g.edges().len())
    })
}

/// Nishimori inverse temperature from the Bethe-Hessian spectrum.
///
/// # Safety
/// `g` must be a live handle; `beta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_graph_nishimori(g: *const QcGraph, beta_hi: f64, tol: f64, beta: *mut f64) -> QcStatus {
    guard(|| out(beta, estimate_beta_nishimori(&nonnull(g)?.0, beta_hi, tol).or_status()?.beta_hat))
}

/// # Safety
/// `g` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qc_graph_free(g: *mut QcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

fn square(n: usize, x: *const f64) -> Result<DMatrix<f64>, QcStatus> {
    Ok(DMatrix::from_row_slice(n, n, slice(x, n * n)?))
}

/// Frobenius error of the best rank-`r` approximation of a row-major
/// `n x n` matrix.
///
/// # Safety
/// `x` must hold `n * n` doubles; `error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_tsvd_error(n: usize, x: *const f64, r: usize, error: *mut f64) -> QcStatus {
    guard(|| out(error, tsvd(&square(n, x)?, r).or_status()?.error))
}

/// Sparse factorization of a row-major `n x n` matrix with the budgeted
/// masks of `method` (`sf_chord`, `sf_ldpc_peg` or `sf_qc_sa`).
///
/// # Safety
/// `x` must hold `n * n` doubles; `method` must be NUL-terminated; outputs
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_sf_factorize(
    n: usize,
    x: *const f64,
    method: *const c_char,
    iters: usize,
    seed: u64,
    fnorm_error: *mut f64,
    nnz: *mut usize,
) -> QcStatus {
    guard(|| {
        let x = square(n, x)?;
        let method = Method::parse(c_str(method)?).or_status()?;
        let masks = masks_for(method, &Budget::new(n).or_status()?, seed).or_status()?;
        let res = sf_optimize(&x, &masks, iters, seed).or_status()?;
        out(fnorm_error, res.final_fnorm)?;
        out(nnz, res.factors.nnz())
    })
}
