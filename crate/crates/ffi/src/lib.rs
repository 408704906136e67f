//! C interface to hypergraph walks and magnetic Laplacians.
//!
//! Objects live behind opaque handles that the caller frees with the matching
//! `*_free` function. Every fallible call returns an [`HmStatus`]; after a
//! failure, [`hm_last_error`] holds a message for the calling thread. Dense
//! matrices cross the boundary row-major, and output buffers come with their
//! capacity in elements.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hypermagnet::io::load_hypergraph;
use hypermagnet::magnetic::magnetic_laplacian;
use hypermagnet::spectral::hermitian_eigenvalues;
use hypermagnet::walks::{
    edvw_transition, is_reversible, stationary_distribution, zhou_transition, ChainUsed,
    StationaryDistribution, StationaryOptions,
};
use hypermagnet::{
    degree_edvw, ChargeMatrix, ChargeParams, EdvwMatrix, Error, Hypergraph, LaplacianForm,
    MagneticLaplacian, TransitionMatrix,
};
use ndarray::Array2;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    BufferTooSmall = 3,
    IsolatedVertex = 4,
    Reducible = 5,
    Periodic = 6,
    NoConvergence = 7,
    Io = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmWalkKind {
    /// Edge-independent weights.
    Zhou = 0,
    /// Edge-dependent vertex weights; degree weights when none are attached.
    Edvw = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmLaplacianForm {
    Normalized = 0,
    Unnormalized = 1,
}

/// A hypergraph with optional edge-dependent vertex weights.
pub struct HmHypergraph {
    graph: Hypergraph,
    edvw: Option<EdvwMatrix>,
}

/// A row-stochastic transition matrix.
pub struct HmTransition {
    p: TransitionMatrix,
}

/// A magnetic Laplacian together with its renormalized form, if requested.
pub struct HmLaplacian {
    l: MagneticLaplacian,
}

enum Fail {
    Null(&'static str),
    Buffer {
        what: &'static str,
        need: usize,
        cap: usize,
    },
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn code(e: &Error) -> HmStatus {
    match e {
        Error::Invalid(_)
        | Error::Dimension(_)
        | Error::EdvwNotNormalized
        | Error::ZeroEdvwColumn { .. }
        | Error::Parse { .. }
        | Error::Json(_)
        | Error::Csv(_) => HmStatus::InvalidInput,
        Error::IsolatedVertex { .. } => HmStatus::IsolatedVertex,
        Error::Reducible { .. } => HmStatus::Reducible,
        Error::Periodic => HmStatus::Periodic,
        Error::NoConvergence { .. } => HmStatus::NoConvergence,
        Error::Io(_) => HmStatus::Io,
        Error::Split { source, .. } => code(source),
        _ => HmStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HmStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return HmStatus::Ok,
        Ok(Err(Fail::Null(what))) => (HmStatus::NullPointer, format!("{what} is null")),
        Ok(Err(Fail::Buffer { what, need, cap })) => (
            HmStatus::BufferTooSmall,
            format!("{what} holds {cap} elements, {need} needed"),
        ),
        Ok(Err(Fail::Core(e))) => (code(&e), e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (HmStatus::Internal, format!("panic: {msg}"))
        }
    };
    set_error(msg);
    status
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn output<'a, T>(
    p: *mut T,
    cap: usize,
    need: usize,
    what: &'static str,
) -> Result<&'a mut [T], Fail> {
    if p.is_null() && need > 0 {
        return Err(Fail::Null(what));
    }
    if cap < need {
        return Err(Fail::Buffer { what, need, cap });
    }
    if need == 0 {
        return Ok(&mut []);
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn store<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn dense(n: usize, values: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((n, n), values.to_vec()).expect("length checked by caller")
}

fn stationary(p: &TransitionMatrix, allow_lazy: bool) -> Result<StationaryDistribution, Fail> {
    let opts = StationaryOptions {
        allow_lazy,
        ..Default::default()
    };
    Ok(stationary_distribution(p, &opts)?)
}

/// Message of the most recent failed call on this thread, or null. The
/// pointer stays valid until the next failure on the same thread.
#[no_mangle]
pub extern "C" fn hm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a hypergraph from edges in compressed form: edge `e` holds
/// `vertices[offsets[e] .. offsets[e + 1]]`. `offsets` has `n_edges + 1`
/// entries starting at 0. A null `weights` gives every edge weight 1.
///
/// # Safety
/// All pointers must be null or valid for the lengths described above.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_new(
    n_vertices: usize,
    n_edges: usize,
    offsets: *const usize,
    vertices: *const usize,
    weights: *const f64,
    out: *mut *mut HmHypergraph,
) -> HmStatus {
    guard(|| {
        let offsets = input(offsets, n_edges + 1, "offsets")?;
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err(
                Error::Invalid("offsets must start at 0 and be nondecreasing".into()).into(),
            );
        }
        let vertices = input(vertices, offsets[n_edges], "vertices")?;
        let edges = offsets
            .windows(2)
            .map(|w| vertices[w[0]..w[1]].to_vec())
            .collect();
        let weights = if weights.is_null() {
            None
        } else {
            Some(input(weights, n_edges, "weights")?.to_vec())
        };
        let graph = Hypergraph::from_edges(n_vertices, edges, weights)?;
        store(out, boxed(HmHypergraph { graph, edvw: None }), "out")
    })
}

/// Reads a hypergraph file, keeping any stored vertex weights.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_load(
    path: *const c_char,
    out: *mut *mut HmHypergraph,
) -> HmStatus {
    guard(|| {
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::Invalid("path is not UTF-8".into()))?;
        let (graph, edvw) = load_hypergraph(Path::new(path))?;
        store(out, boxed(HmHypergraph { graph, edvw }), "out")
    })
}

/// Attaches edge-dependent vertex weights, given edge by edge in the vertex
/// order of [`hm_hypergraph_edge`]. Columns are normalized on the way in.
///
/// # Safety
/// `h` must be a live handle and `values` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_set_edvw(
    h: *mut HmHypergraph,
    values: *const f64,
    len: usize,
) -> HmStatus {
    guard(|| {
        let h = h.as_mut().ok_or(Fail::Null("hypergraph"))?;
        let values = input(values, len, "values")?;
        let total: usize = h.graph.edges().iter().map(Vec::len).sum();
        if len != total {
            return Err(Error::Dimension(format!("{len} weights for {total} incidences")).into());
        }
        let mut rest = values;
        let columns = h
            .graph
            .edges()
            .iter()
            .map(|e| {
                let (col, tail) = rest.split_at(e.len());
                rest = tail;
                col.to_vec()
            })
            .collect();
        h.edvw = Some(EdvwMatrix::new(&h.graph, columns)?.normalized());
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_n_vertices(
    h: *const HmHypergraph,
    out: *mut usize,
) -> HmStatus {
    guard(|| store(out, handle(h, "hypergraph")?.graph.n_vertices(), "out"))
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_n_edges(
    h: *const HmHypergraph,
    out: *mut usize,
) -> HmStatus {
    guard(|| store(out, handle(h, "hypergraph")?.graph.n_edges(), "out"))
}

/// Copies the vertices of edge `e`. The edge size is written to `size` even
/// when `out` is too small.
///
/// # Safety
/// `h` must be a live handle, `size` writable and `out` valid for `cap`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_edge(
    h: *const HmHypergraph,
    e: usize,
    out: *mut usize,
    cap: usize,
    size: *mut usize,
) -> HmStatus {
    guard(|| {
        let g = &handle(h, "hypergraph")?.graph;
        if e >= g.n_edges() {
            return Err(Error::Invalid(format!("edge {e} of {}", g.n_edges())).into());
        }
        let edge = g.edge(e);
        store(size, edge.len(), "size")?;
        output(out, cap, edge.len(), "out")?.copy_from_slice(edge);
        Ok(())
    })
}

/// Weighted vertex degrees.
///
/// # Safety
/// `h` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_vertex_degrees(
    h: *const HmHypergraph,
    out: *mut f64,
    cap: usize,
) -> HmStatus {
    guard(|| {
        let d = handle(h, "hypergraph")?.graph.vertex_degrees();
        output(out, cap, d.len(), "out")?.copy_from_slice(&d);
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hm_hypergraph_free(h: *mut HmHypergraph) {
    release(h)
}

/// Transition matrix of a random walk on `h`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_new(
    h: *const HmHypergraph,
    kind: HmWalkKind,
    out: *mut *mut HmTransition,
) -> HmStatus {
    guard(|| {
        let h = handle(h, "hypergraph")?;
        let p = match kind {
            HmWalkKind::Zhou => zhou_transition(&h.graph)?,
            HmWalkKind::Edvw => match &h.edvw {
                Some(r) => edvw_transition(&h.graph, r)?,
                None => edvw_transition(&h.graph, &degree_edvw(&h.graph)?.normalized())?,
            },
        };
        store(out, boxed(HmTransition { p }), "out")
    })
}

/// Wraps a dense `n x n` row-stochastic matrix.
///
/// # Safety
/// `values` must be valid for `n * n` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_from_dense(
    n: usize,
    values: *const f64,
    out: *mut *mut HmTransition,
) -> HmStatus {
    guard(|| {
        let values = input(values, n * n, "values")?;
        let p = TransitionMatrix::from_matrix(dense(n, values))?;
        store(out, boxed(HmTransition { p }), "out")
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_n(p: *const HmTransition, out: *mut usize) -> HmStatus {
    guard(|| store(out, handle(p, "transition")?.p.n(), "out"))
}

/// Copies the matrix row-major into `out`.
///
/// # Safety
/// `p` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_values(
    p: *const HmTransition,
    out: *mut f64,
    cap: usize,
) -> HmStatus {
    guard(|| {
        let m = handle(p, "transition")?.p.values();
        let out = output(out, cap, m.len(), "out")?;
        for (o, x) in out.iter_mut().zip(m.iter()) {
            *o = *x;
        }
        Ok(())
    })
}

/// Stationary distribution. With `allow_lazy`, a periodic chain falls back
/// to `(P + I) / 2`, which has the same stationary distribution.
///
/// # Safety
/// `p` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_stationary(
    p: *const HmTransition,
    allow_lazy: bool,
    out: *mut f64,
    cap: usize,
) -> HmStatus {
    guard(|| {
        let pi = stationary(&handle(p, "transition")?.p, allow_lazy)?;
        output(out, cap, pi.values.len(), "out")?.copy_from_slice(&pi.values);
        Ok(())
    })
}

/// Detailed-balance test `max |π_u P_uv − π_v P_vu| < tol`. `residual` may be
/// null.
///
/// # Safety
/// `p` must be a live handle, `reversible` writable and `residual` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_is_reversible(
    p: *const HmTransition,
    tol: f64,
    allow_lazy: bool,
    reversible: *mut bool,
    residual: *mut f64,
) -> HmStatus {
    guard(|| {
        let p = &handle(p, "transition")?.p;
        let pi = stationary(p, allow_lazy)?;
        let chain = match pi.chain {
            ChainUsed::Lazy => p.lazy(),
            ChainUsed::Original => p.clone(),
        };
        let (ok, r) = is_reversible(&chain, &pi, tol);
        store(reversible, ok, "reversible")?;
        if !residual.is_null() {
            residual.write(r);
        }
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hm_transition_free(p: *mut HmTransition) {
    release(p)
}

fn laplacian(
    p: &TransitionMatrix,
    charge: ChargeParams,
    form: HmLaplacianForm,
    renormalize: bool,
) -> Result<*mut HmLaplacian, Fail> {
    let form = match form {
        HmLaplacianForm::Normalized => LaplacianForm::Normalized,
        HmLaplacianForm::Unnormalized => LaplacianForm::Unnormalized,
    };
    let l = magnetic_laplacian(p.values(), &charge, form, renormalize)?;
    Ok(boxed(HmLaplacian { l }))
}

/// Magnetic Laplacian of `p` with a single charge `q`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_new(
    p: *const HmTransition,
    q: f64,
    form: HmLaplacianForm,
    renormalize: bool,
    out: *mut *mut HmLaplacian,
) -> HmStatus {
    guard(|| {
        let p = &handle(p, "transition")?.p;
        store(
            out,
            laplacian(p, ChargeParams::Scalar(q), form, renormalize)?,
            "out",
        )
    })
}

/// Magnetic Laplacian with per-pair charges from a symmetric dense `n x n`
/// matrix. Entries off the support of `(P + Pᵀ) / 2` must be zero.
///
/// # Safety
/// `p` must be a live handle, `charges` valid for `n * n` reads and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_with_charges(
    p: *const HmTransition,
    charges: *const f64,
    form: HmLaplacianForm,
    renormalize: bool,
    out: *mut *mut HmLaplacian,
) -> HmStatus {
    guard(|| {
        let p = &handle(p, "transition")?.p;
        let n = p.n();
        let q = dense(n, input(charges, n * n, "charges")?);
        let charge = ChargeParams::Matrix(ChargeMatrix::from_dense(&q, p.values())?);
        store(out, laplacian(p, charge, form, renormalize)?, "out")
    })
}

/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_n(l: *const HmLaplacian, out: *mut usize) -> HmStatus {
    guard(|| store(out, handle(l, "laplacian")?.l.n(), "out"))
}

unsafe fn split_complex(
    m: &Array2<Complex64>,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> Result<(), Fail> {
    let re = output(re, cap, m.len(), "re")?;
    let im = output(im, cap, m.len(), "im")?;
    for ((r, i), z) in re.iter_mut().zip(im.iter_mut()).zip(m.iter()) {
        *r = z.re;
        *i = z.im;
    }
    Ok(())
}

/// Copies the Laplacian row-major as separate real and imaginary parts.
///
/// # Safety
/// `l` must be a live handle and `re`, `im` valid for `cap` writes each.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_values(
    l: *const HmLaplacian,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> HmStatus {
    guard(|| split_complex(&handle(l, "laplacian")?.l.laplacian, re, im, cap))
}

/// Copies `(2 / λ_max) L − I`; fails unless the Laplacian was built with
/// `renormalize`.
///
/// # Safety
/// `l` must be a live handle and `re`, `im` valid for `cap` writes each.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_renormalized(
    l: *const HmLaplacian,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> HmStatus {
    guard(|| {
        let m = handle(l, "laplacian")?
            .l
            .renormalized
            .as_ref()
            .ok_or_else(|| Error::Invalid("laplacian was built without renormalization".into()))?;
        split_complex(m, re, im, cap)
    })
}

/// Eigenvalues in ascending order.
///
/// # Safety
/// `l` must be a live handle and `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_eigenvalues(
    l: *const HmLaplacian,
    out: *mut f64,
    cap: usize,
) -> HmStatus {
    guard(|| {
        let ev = hermitian_eigenvalues(&handle(l, "laplacian")?.l.laplacian)?;
        output(out, cap, ev.len(), "out")?.copy_from_slice(&ev);
        Ok(())
    })
}

/// Largest eigenvalue.
///
/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_lambda_max(l: *const HmLaplacian, out: *mut f64) -> HmStatus {
    guard(|| {
        let l = &handle(l, "laplacian")?.l;
        let lmax = match l.lambda_max {
            Some(x) => x,
            None => *hermitian_eigenvalues(&l.laplacian)?
                .last()
                .ok_or_else(|| Error::Invalid("empty laplacian".into()))?,
        };
        store(out, lmax, "out")
    })
}

/// # Safety
/// `l` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hm_laplacian_free(l: *mut HmLaplacian) {
    release(l)
}
