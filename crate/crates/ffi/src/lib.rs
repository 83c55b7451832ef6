//! C ABI for `fjpd`.
//!
//! Graphs live behind the opaque [`FjpdGraph`] handle. Every function returns
//! an [`FjpdStatus`]; on failure a description is available from
//! [`fjpd_last_error_message`] on the same thread. Output parameters are
//! written only on success. Vectors are passed as pointer + length and must
//! hold exactly `n` entries for a graph with `n` nodes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fjpd::generators::{sbm_pd_closed_form, SbmSpec};
use fjpd::perturbation::{perturbed_pd_exact_with, perturbed_pd_general_with, CrossCheck};
use fjpd::{
    Error, Graph, IngestOptions, OpinionVector, PdDefinition, SolverConfig, StubbornnessVector,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FjpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DimensionMismatch = 4,
    NonConvergence = 5,
    Internal = 6,
    Panic = 7,
}

/// Opaque graph handle. Create with `fjpd_graph_from_*`, release with
/// [`fjpd_graph_free`].
pub struct FjpdGraph {
    inner: Graph,
}

/// Solver settings. `max_iterations = 0` picks the library default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FjpdSolverOptions {
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

/// PD components. The `*_alt` fields are NaN unless the alternative
/// definition was requested.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FjpdPdReport {
    pub polarization: f64,
    pub disagreement: f64,
    pub pd: f64,
    pub polarization_alt: f64,
    pub pd_alt: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FjpdPerturbation {
    pub pd_before: f64,
    pub pd_after: f64,
    /// `[(I+L)⁻¹]_ll`.
    pub r_ll: f64,
    pub shift_term: f64,
    pub damping_term: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(FjpdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::Json(_) => FjpdStatus::ParseError,
            Error::Dimension { .. } => FjpdStatus::DimensionMismatch,
            Error::NonConvergence { .. } => FjpdStatus::NonConvergence,
            Error::RouteMismatch { .. } | Error::Io(_) => FjpdStatus::Internal,
            _ => FjpdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FjpdStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FjpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            FjpdStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("panic inside fjpd");
            FjpdStatus::Panic
        }
    }
}

unsafe fn graph_ref<'a>(g: *const FjpdGraph) -> Result<&'a Graph, Failure> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| null("graph"))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn solver(opts: *const FjpdSolverOptions) -> SolverConfig {
    match opts.as_ref() {
        None => SolverConfig::default(),
        Some(o) => SolverConfig {
            rel_tolerance: o.rel_tolerance,
            max_iterations: (o.max_iterations > 0).then_some(o.max_iterations),
            ..SolverConfig::default()
        },
    }
}

unsafe fn model(
    g: &Graph,
    s: *const f64,
    k: *const f64,
    n: usize,
) -> Result<(OpinionVector, StubbornnessVector), Failure> {
    Error::check_len(g.node_count(), n)?;
    let s = OpinionVector::new(input(s, n, "opinions")?.to_vec())?;
    let k = if k.is_null() {
        StubbornnessVector::uniform(n, 1.0)?
    } else {
        StubbornnessVector::new(input(k, n, "stubbornness")?.to_vec())?
    };
    Ok((s, k))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fjpd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or "" after a success.
/// Valid until the next `fjpd_*` call on the same thread.
#[no_mangle]
pub extern "C" fn fjpd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses an edge list (`u v [w]` per line, labels mapped to ids in
/// first-seen order).
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fjpd_graph_from_edge_list(
    text: *const c_char,
    out: *mut *mut FjpdGraph,
) -> FjpdStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(FjpdStatus::ParseError, format!("edge list is not UTF-8: {e}")))?;
        let parsed = Graph::from_edge_list(text, &IngestOptions::default())?;
        *out = Box::into_raw(Box::new(FjpdGraph {
            inner: parsed.graph,
        }));
        Ok(())
    })
}

/// Builds a graph on `n` nodes from `m` edges `(us[i], vs[i], ws[i])`.
/// `ws` may be null for unit weights.
///
/// # Safety
/// `us` and `vs` (and `ws` if non-null) must point to `m` elements; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fjpd_graph_from_edges(
    n: usize,
    us: *const usize,
    vs: *const usize,
    ws: *const f64,
    m: usize,
    out: *mut *mut FjpdGraph,
) -> FjpdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if m > 0 && (us.is_null() || vs.is_null()) {
            return Err(null("edge endpoints"));
        }
        let (us, vs) = if m == 0 {
            (&[][..], &[][..])
        } else {
            (slice::from_raw_parts(us, m), slice::from_raw_parts(vs, m))
        };
        let ws = if ws.is_null() { None } else { Some(slice::from_raw_parts(ws, m)) };
        let edges = (0..m).map(|i| (us[i], vs[i], ws.map_or(1.0, |w| w[i])));
        let graph = Graph::new(n, edges)?;
        *out = Box::into_raw(Box::new(FjpdGraph { inner: graph }));
        Ok(())
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from `fjpd_graph_from_*` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fjpd_graph_free(g: *mut FjpdGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle; `nodes` and `edges` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fjpd_graph_counts(
    g: *const FjpdGraph,
    nodes: *mut usize,
    edges: *mut usize,
) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if nodes.is_null() || edges.is_null() {
            return Err(null("output"));
        }
        *nodes = g.node_count();
        *edges = g.edge_count();
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fjpd_graph_total_weight(g: *const FjpdGraph, out: *mut f64) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.total_weight();
        Ok(())
    })
}

/// `out = L x`.
///
/// # Safety
/// `x` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fjpd_laplacian_apply(
    g: *const FjpdGraph,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let y = g.laplacian_apply(input(x, n, "x")?)?;
        output(out, n, "out")?.copy_from_slice(&y);
        Ok(())
    })
}

/// Writes `z* = (L+K)⁻¹Ks` to `z_out`. `k` may be null for `K = I`;
/// `opts` may be null for defaults.
///
/// # Safety
/// `s`, `z_out` (and `k` if non-null) must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fjpd_solve_equilibrium(
    g: *const FjpdGraph,
    s: *const f64,
    k: *const f64,
    n: usize,
    opts: *const FjpdSolverOptions,
    z_out: *mut f64,
) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let (s, k) = model(g, s, k, n)?;
        let eq = fjpd::solve_equilibrium(g, &s, &k, &solver(opts))?;
        output(z_out, n, "z_out")?.copy_from_slice(&eq.z_star);
        Ok(())
    })
}

/// Standard PD; the alternative fields are set to NaN.
///
/// # Safety
/// As for [`fjpd_solve_equilibrium`]; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fjpd_pd_index(
    g: *const FjpdGraph,
    s: *const f64,
    k: *const f64,
    n: usize,
    opts: *const FjpdSolverOptions,
    out: *mut FjpdPdReport,
) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (s, k) = model(g, s, k, n)?;
        let r = fjpd::pd_index(g, &s, &k, &solver(opts))?;
        *out = FjpdPdReport {
            polarization: r.polarization,
            disagreement: r.disagreement,
            pd: r.pd,
            polarization_alt: f64::NAN,
            pd_alt: f64::NAN,
        };
        Ok(())
    })
}

/// Standard and stubbornness-weighted PD.
///
/// # Safety
/// As for [`fjpd_pd_index`].
#[no_mangle]
pub unsafe extern "C" fn fjpd_pd_alternative(
    g: *const FjpdGraph,
    s: *const f64,
    k: *const f64,
    n: usize,
    opts: *const FjpdSolverOptions,
    out: *mut FjpdPdReport,
) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (s, k) = model(g, s, k, n)?;
        let r = fjpd::pd_alternative(g, &s, &k, &solver(opts))?;
        *out = FjpdPdReport {
            polarization: r.polarization,
            disagreement: r.disagreement,
            pd: r.pd,
            polarization_alt: r.polarization_alt.unwrap_or(f64::NAN),
            pd_alt: r.pd_alt.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// PD after raising node `l`'s stubbornness from 1 to `1 + epsilon`.
/// With `exact` non-zero the closed form for a neutral node is used and
/// `s` must sum to zero with `s[l] = 0`; otherwise the rank-one update
/// handles any `s`. No direct cross-check is run.
///
/// # Safety
/// `s` must hold `n` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fjpd_perturbed_pd(
    g: *const FjpdGraph,
    s: *const f64,
    n: usize,
    l: usize,
    epsilon: f64,
    exact: i32,
    opts: *const FjpdSolverOptions,
    out: *mut FjpdPerturbation,
) -> FjpdStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (s, _) = model(g, s, ptr::null(), n)?;
        let cfg = solver(opts);
        let r = if exact != 0 {
            perturbed_pd_exact_with(g, &s, l, epsilon, &cfg, CrossCheck::FormulaOnly)?
        } else {
            perturbed_pd_general_with(g, &s, l, epsilon, &cfg, CrossCheck::FormulaOnly)?
        };
        *out = FjpdPerturbation {
            pd_before: r.pd_before,
            pd_after: r.pd_after,
            r_ll: r.r_ll,
            shift_term: r.shift_term,
            damping_term: r.damping_term,
        };
        Ok(())
    })
}

/// Closed-form PD on the expected two-block SBM with `K = αI`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fjpd_sbm_pd_closed_form(
    n: usize,
    p: f64,
    q: f64,
    alpha: f64,
    alternative: i32,
    out: *mut f64,
) -> FjpdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let definition = if alternative != 0 {
            PdDefinition::Alternative
        } else {
            PdDefinition::Standard
        };
        *out = sbm_pd_closed_form(&SbmSpec::new(n, p, q)?, alpha, definition)?;
        Ok(())
    })
}
