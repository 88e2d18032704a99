//! C bindings for `dyadrec`.
//!
//! Graphs are opaque [`DrGraph`] handles owned by the caller and released
//! with [`dr_graph_free`]. Every fallible call returns a [`DrStatus`]; on
//! failure [`dr_last_error`] describes what went wrong on the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dyadrec::ingest::{load_edge_list, save_snapshot, Provenance};
use dyadrec::metrics::{
    all_reciprocity, classify, concentration, degree_assortativity, reciprocity_between,
    AssortativityMode, DyadClass, ReciprocityRecord,
};
use dyadrec::nullmodels::{equidisperse, maslov_sneppen_rewire, seeded_rng, RegimeConfig};
use dyadrec::report::{run_regime_comparison, AnalysisOptions};
use dyadrec::{Error, VertexId, WeightedDigraph};

/// Opaque graph handle.
pub struct DrGraph(WeightedDigraph);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Degenerate = 4,
    UndefinedCorrelation = 5,
    Integrity = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrClass {
    Reciprocal = 0,
    PartiallyReciprocal = 1,
    NonReciprocal = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrAssortativityMode {
    MutualBackbone = 0,
    AllArcs = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DrCensus {
    pub mutual: u64,
    pub asymmetric: u64,
    pub null_dyads: u64,
    pub total_arcs: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrReciprocity {
    /// Lower vertex id of the pair.
    pub a: u32,
    pub b: u32,
    pub w_ab: f64,
    pub w_ba: f64,
    pub p_ab: f64,
    pub p_ba: f64,
    pub r_value: f64,
    pub dyad_class: DrClass,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DrRewireStats {
    pub attempted_swaps: u64,
    pub accepted_swaps: u64,
    /// Meaningful only when `residual_defined` is true.
    pub residual_assortativity: f64,
    pub residual_defined: bool,
    pub stalled: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut bytes = msg.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(DrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UndefinedCorrelation(_) => DrStatus::UndefinedCorrelation,
            Error::Integrity(_) => DrStatus::Integrity,
            _ if e.is_io() => DrStatus::Io,
            _ if e.is_degenerate() => DrStatus::Degenerate,
            _ => DrStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DrStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DrStatus::Panic
        }
    }
}

unsafe fn graph<'a>(g: *const DrGraph) -> Result<&'a WeightedDigraph, Fail> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(DrStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

fn boxed(g: WeightedDigraph) -> *mut DrGraph {
    Box::into_raw(Box::new(DrGraph(g)))
}

fn class(c: DyadClass) -> DrClass {
    match c {
        DyadClass::Reciprocal => DrClass::Reciprocal,
        DyadClass::PartiallyReciprocal => DrClass::PartiallyReciprocal,
        DyadClass::NonReciprocal => DrClass::NonReciprocal,
    }
}

fn record(r: &ReciprocityRecord) -> DrReciprocity {
    DrReciprocity {
        a: r.dyad.a.0,
        b: r.dyad.b.0,
        w_ab: r.dyad.w_ab,
        w_ba: r.dyad.w_ba,
        p_ab: r.p_ab,
        p_ba: r.p_ba,
        r_value: r.r_value,
        dyad_class: class(r.class),
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next `dr_` call on the same thread.
#[no_mangle]
pub extern "C" fn dr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a `src,dst,weight` snapshot (and its vertex sidecar, if present).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_load(path_: *const c_char, out: *mut *mut DrGraph) -> DrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(load_edge_list(path(path_)?)?);
        Ok(())
    })
}

/// Builds a graph from `len` parallel arrays of arcs. Self-loops are
/// dropped and repeated arcs summed.
///
/// # Safety
/// `src`, `dst` and `weight` must each point to `len` readable elements
/// (they may be null when `len` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_from_arcs(
    vertex_count: u32,
    src: *const u32,
    dst: *const u32,
    weight: *const f64,
    len: usize,
    out: *mut *mut DrGraph,
) -> DrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let (s, d, w): (&[u32], &[u32], &[f64]) = if len == 0 {
            (&[], &[], &[])
        } else {
            if src.is_null() || dst.is_null() || weight.is_null() {
                return Err(null("arc array"));
            }
            (
                std::slice::from_raw_parts(src, len),
                std::slice::from_raw_parts(dst, len),
                std::slice::from_raw_parts(weight, len),
            )
        };
        let arcs = (0..len).map(|i| (s[i], d[i], w[i]));
        *out = boxed(WeightedDigraph::from_arcs(vertex_count as usize, arcs)?);
        Ok(())
    })
}

/// Writes the graph as a snapshot at `path`.
///
/// # Safety
/// `g` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_save(g: *const DrGraph, path_: *const c_char) -> DrStatus {
    guard(|| {
        save_snapshot(
            graph(g)?,
            path(path_)?,
            &Provenance::new().with("source", "ffi"),
        )?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_free(g: *mut DrGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_vertex_count(g: *const DrGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// Arc count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_arc_count(g: *const DrGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.arc_count())
}

/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_out_strength(
    g: *const DrGraph,
    v: u32,
    out: *mut f64,
) -> DrStatus {
    guard(|| {
        *out_ref(out, "out")? = graph(g)?.out_strength(VertexId(v))?;
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_graph_census(g: *const DrGraph, out: *mut DrCensus) -> DrStatus {
    guard(|| {
        let c = graph(g)?.dyad_census();
        *out_ref(out, "out")? = DrCensus {
            mutual: c.mutual,
            asymmetric: c.asymmetric,
            null_dyads: c.null_dyads,
            total_arcs: c.total_arcs,
        };
        Ok(())
    })
}

/// Reciprocity of the pair `{i, j}`, which must be mutual.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_reciprocity(
    g: *const DrGraph,
    i: u32,
    j: u32,
    out: *mut DrReciprocity,
) -> DrStatus {
    guard(|| {
        let r = reciprocity_between(graph(g)?, VertexId(i), VertexId(j))?;
        *out_ref(out, "out")? = record(&r);
        Ok(())
    })
}

/// Fills `buf` with every mutual dyad in `(a, b)` order. `count` always
/// receives the number of dyads; pass a null `buf` to query it. Returns
/// `BufferTooSmall` without writing when `capacity` is short.
///
/// # Safety
/// `g` must be a live handle; `count` writable; `buf` null or writable for
/// `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn dr_reciprocity_all(
    g: *const DrGraph,
    buf: *mut DrReciprocity,
    capacity: usize,
    count: *mut usize,
) -> DrStatus {
    guard(|| {
        let g = graph(g)?;
        let count = out_ref(count, "count")?;
        let recs = all_reciprocity(g);
        *count = recs.len();
        if buf.is_null() {
            return Ok(());
        }
        if capacity < recs.len() {
            return Err(Fail(
                DrStatus::BufferTooSmall,
                format!("buffer holds {capacity} records, need {}", recs.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, recs.len());
        for (d, r) in dst.iter_mut().zip(&recs) {
            *d = record(r);
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_classify(r_value: f64, out: *mut DrClass) -> DrStatus {
    guard(|| {
        *out_ref(out, "out")? = class(classify(r_value)?);
        Ok(())
    })
}

/// Concentration of `v`'s out-weights; needs out-degree >= 2.
///
/// # Safety
/// `g` must be a live handle; `h` and `h_star` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_concentration(
    g: *const DrGraph,
    v: u32,
    h: *mut f64,
    h_star: *mut f64,
) -> DrStatus {
    guard(|| {
        let s = concentration(graph(g)?, VertexId(v))?;
        *out_ref(h, "h")? = s.h;
        *out_ref(h_star, "h_star")? = s.h_star;
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_assortativity(
    g: *const DrGraph,
    mode: DrAssortativityMode,
    out: *mut f64,
) -> DrStatus {
    guard(|| {
        let mode = match mode {
            DrAssortativityMode::MutualBackbone => AssortativityMode::MutualBackbone,
            DrAssortativityMode::AllArcs => AssortativityMode::AllArcs,
        };
        *out_ref(out, "out")? = degree_assortativity(graph(g)?, mode)?.r;
        Ok(())
    })
}

/// New handle with every vertex's strength spread evenly over its arcs.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_equidisperse(g: *const DrGraph, out: *mut *mut DrGraph) -> DrStatus {
    guard(|| {
        let e = equidisperse(graph(g)?);
        *out_ref(out, "out")? = boxed(e);
        Ok(())
    })
}

/// New handle with the mutual backbone randomised by degree-preserving
/// swaps. `stats` may be null.
///
/// # Safety
/// `g` must be a live handle; `out` writable; `stats` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dr_rewire(
    g: *const DrGraph,
    seed: u64,
    swap_multiplier: u32,
    stats: *mut DrRewireStats,
    out: *mut *mut DrGraph,
) -> DrStatus {
    guard(|| {
        let g = graph(g)?;
        let out = out_ref(out, "out")?;
        let cfg = RegimeConfig {
            seed,
            swap_multiplier,
            ..RegimeConfig::default()
        };
        let r = maslov_sneppen_rewire(g, &cfg, &mut seeded_rng(seed))?;
        if let Some(s) = stats.as_mut() {
            *s = DrRewireStats {
                attempted_swaps: r.attempted_swaps,
                accepted_swaps: r.accepted_swaps,
                residual_assortativity: r.residual_assortativity.unwrap_or(f64::NAN),
                residual_defined: r.residual_assortativity.is_some(),
                stalled: r.stalled,
            };
        }
        *out = boxed(r.graph);
        Ok(())
    })
}

/// Four-regime comparison as a JSON document. Free the result with
/// [`dr_string_free`].
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dr_regime_comparison_json(
    g: *const DrGraph,
    seed: u64,
    swap_multiplier: u32,
    out: *mut *mut c_char,
) -> DrStatus {
    guard(|| {
        let g = graph(g)?;
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = RegimeConfig {
            seed,
            swap_multiplier,
            ..RegimeConfig::default()
        };
        let cmp = run_regime_comparison(g, &cfg, &AnalysisOptions::default())
            .map_err(|p| Fail::from(p.error))?;
        let json = serde_json::to_string_pretty(&cmp).map_err(|e| Fail::from(Error::from(e)))?;
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
