//! C interface. Graphs, trees and results are opaque handles owned by the
//! caller and released with the matching `*_free`. Every call returns a
//! status; the message of the last failure on this thread is available from
//! `tp_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use treepack::graph::Graph;
use treepack::oracle::{verify, Decomposition};
use treepack::run::{execute, Mode, RunSpec, Source};
use treepack::tree::Tree;
use treepack::{Error, ErrorClass};

/// Status codes. The numeric values match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    /// A required pointer was null.
    Null = 1,
    Input = 2,
    Config = 3,
    Classification = 4,
    Abort = 5,
    Infeasible = 6,
    Budget = 7,
    Internal = 70,
    /// A Rust panic was caught at the boundary.
    Panic = 99,
}

impl From<ErrorClass> for TpStatus {
    fn from(c: ErrorClass) -> Self {
        match c {
            ErrorClass::Input => TpStatus::Input,
            ErrorClass::Config => TpStatus::Config,
            ErrorClass::Classification => TpStatus::Classification,
            ErrorClass::Abort => TpStatus::Abort,
            ErrorClass::Infeasible => TpStatus::Infeasible,
            ErrorClass::Budget => TpStatus::Budget,
            ErrorClass::Internal => TpStatus::Internal,
        }
    }
}

/// How `tp_decompose` solves the instance.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpMode {
    Pipeline = 0,
    Oracle = 1,
    Hybrid = 2,
}

/// Opaque host graph.
pub struct TpGraph(Graph);

/// Opaque tree.
pub struct TpTree(Tree);

/// Opaque outcome of `tp_decompose`.
pub struct TpResult {
    copies: Vec<Vec<usize>>,
    json: CString,
    summary: CString,
}

thread_local! {
    static LAST: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST.with(|l| *l.borrow_mut() = c);
}

fn err(e: &Error) -> TpStatus {
    set_last(&e.to_string());
    e.class().into()
}

fn guard(f: impl FnOnce() -> TpStatus) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_last("panic inside treepack");
            TpStatus::Panic
        }
    }
}

fn pairs(edges: *const usize, m: usize) -> Option<Vec<(usize, usize)>> {
    if m == 0 {
        return Some(Vec::new());
    }
    if edges.is_null() {
        return None;
    }
    // SAFETY: the caller passes 2·m readable values
    let flat = unsafe { std::slice::from_raw_parts(edges, 2 * m) };
    Some(flat.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST.with(|l| l.borrow().as_ptr())
}

/// `K_n`.
#[no_mangle]
pub extern "C" fn tp_graph_complete(n: usize, out: *mut *mut TpGraph) -> TpStatus {
    guard(|| {
        if out.is_null() {
            return TpStatus::Null;
        }
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(Box::new(TpGraph(Graph::complete(n)))) };
        TpStatus::Ok
    })
}

/// Graph on `n` vertices from `m` edges given as `2m` endpoints.
#[no_mangle]
pub extern "C" fn tp_graph_from_edges(n: usize, edges: *const usize, m: usize, out: *mut *mut TpGraph) -> TpStatus {
    guard(|| {
        let Some(e) = pairs(edges, m) else { return TpStatus::Null };
        if out.is_null() {
            return TpStatus::Null;
        }
        match Graph::from_edges(n, &e) {
            Ok(g) => {
                // SAFETY: checked non-null
                unsafe { *out = Box::into_raw(Box::new(TpGraph(g))) };
                TpStatus::Ok
            }
            Err(e) => err(&e),
        }
    })
}

#[no_mangle]
pub extern "C" fn tp_graph_edge_count(g: *const TpGraph) -> usize {
    // SAFETY: null or a live handle from this library
    unsafe { g.as_ref() }.map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` is null or a handle from `tp_graph_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_free(g: *mut TpGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Tree on `n` vertices from its `n - 1` edges given as `2(n - 1)` endpoints.
#[no_mangle]
pub extern "C" fn tp_tree_from_edges(n: usize, edges: *const usize, m: usize, out: *mut *mut TpTree) -> TpStatus {
    guard(|| {
        let Some(e) = pairs(edges, m) else { return TpStatus::Null };
        if out.is_null() {
            return TpStatus::Null;
        }
        match Tree::from_edges(n, &e) {
            Ok(t) => {
                // SAFETY: checked non-null
                unsafe { *out = Box::into_raw(Box::new(TpTree(t))) };
                TpStatus::Ok
            }
            Err(e) => err(&e),
        }
    })
}

/// # Safety
/// `t` is null or a handle from `tp_tree_from_edges` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_tree_free(t: *mut TpTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Decomposes `g` into copies of `t`. On `TP_STATUS_OK` `*out` holds a
/// verified decomposition. On other statuses `*out` is still set when the
/// run got far enough to write a summary, and must be freed.
#[no_mangle]
pub extern "C" fn tp_decompose(
    g: *const TpGraph,
    t: *const TpTree,
    seed: u64,
    mode: TpMode,
    out: *mut *mut TpResult,
) -> TpStatus {
    guard(|| {
        // SAFETY: null or live handles from this library
        let (Some(g), Some(t)) = (unsafe { g.as_ref() }, unsafe { t.as_ref() }) else { return TpStatus::Null };
        if out.is_null() {
            return TpStatus::Null;
        }
        let mode = match mode {
            TpMode::Pipeline => Mode::Pipeline,
            TpMode::Oracle => Mode::Oracle,
            TpMode::Hybrid => Mode::Hybrid,
        };
        let spec = RunSpec::new(Source::Inline { host: g.0.clone(), tree: t.0.clone() }, seed, mode);
        let a = execute(&spec);
        let summary = serde_json::to_string(&a.summary).unwrap_or_default();
        let (copies, json) = match &a.decomposition {
            Some(d) => (d.copies.clone(), d.to_json_value().to_string()),
            None => (Vec::new(), String::new()),
        };
        let r = TpResult {
            copies,
            json: CString::new(json).unwrap_or_default(),
            summary: CString::new(summary).unwrap_or_default(),
        };
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(Box::new(r)) };
        match a.error {
            None => TpStatus::Ok,
            Some(c) => {
                set_last(a.summary.reason.as_deref().unwrap_or(""));
                c.into()
            }
        }
    })
}

/// Number of copies (0 unless the run succeeded).
#[no_mangle]
pub extern "C" fn tp_result_copy_count(r: *const TpResult) -> usize {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.map_or(0, |r| r.copies.len())
}

/// Writes the host vertex of every tree vertex of copy `w` into `buf`
/// (`len` entries, at least the tree's vertex count).
#[no_mangle]
pub extern "C" fn tp_result_copy(r: *const TpResult, w: usize, buf: *mut usize, len: usize) -> TpStatus {
    guard(|| {
        // SAFETY: null or a live handle
        let Some(r) = (unsafe { r.as_ref() }) else { return TpStatus::Null };
        if buf.is_null() {
            return TpStatus::Null;
        }
        let Some(c) = r.copies.get(w) else {
            set_last(&format!("copy {w} of {}", r.copies.len()));
            return TpStatus::Input;
        };
        if len < c.len() {
            set_last(&format!("buffer of {len} for {} vertices", c.len()));
            return TpStatus::Input;
        }
        // SAFETY: buf has len ≥ c.len() writable entries
        unsafe { std::ptr::copy_nonoverlapping(c.as_ptr(), buf, c.len()) };
        TpStatus::Ok
    })
}

/// Decomposition JSON (empty string unless the run succeeded). Owned by `r`.
#[no_mangle]
pub extern "C" fn tp_result_json(r: *const TpResult) -> *const c_char {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.map_or(std::ptr::null(), |r| r.json.as_ptr())
}

/// Run summary JSON: case, stage reached, error class and reason. Owned by `r`.
#[no_mangle]
pub extern "C" fn tp_result_summary(r: *const TpResult) -> *const c_char {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.map_or(std::ptr::null(), |r| r.summary.as_ptr())
}

/// # Safety
/// `r` is null or a handle from `tp_decompose` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_result_free(r: *mut TpResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Checks a decomposition JSON. `TP_STATUS_INFEASIBLE` means it parsed but
/// is not a valid decomposition; the violation is in `tp_last_error`.
///
/// # Safety
/// `json` is null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tp_verify_json(json: *const c_char) -> TpStatus {
    guard(|| {
        if json.is_null() {
            return TpStatus::Null;
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_last("decomposition is not UTF-8");
                return TpStatus::Input;
            }
        };
        match Decomposition::from_json(text) {
            Err(e) => err(&e),
            Ok(d) => match verify(&d) {
                Ok(()) => TpStatus::Ok,
                Err(v) => {
                    set_last(&v.to_string());
                    TpStatus::Infeasible
                }
            },
        }
    })
}
