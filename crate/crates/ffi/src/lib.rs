//! C ABI for the graph algebra toolkit.
//!
//! Values cross the boundary as opaque handles or as text in the same
//! s-expression formats the CLI uses. Every fallible call returns a status
//! code; the most recent error message is kept per thread and can be
//! copied out with [`hralg_last_error`].
//!
//! Ownership: handles returned by `*_parse` and `*_eval` functions belong
//! to the caller and must be released with the matching `*_free`; strings
//! returned by this library must be released with [`hralg_string_free`].

use hralg::decomposition::{
    color_decomposition, decompose_minfill, decomposition_to_parse_tree, treewidth_exact_bounded,
};
use hralg::{format, Limits, SourceLabel};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

/// Status codes mirroring the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HralgStatus {
    /// The call succeeded.
    Ok = 0,
    /// The call succeeded and the answer is negative.
    No = 1,
    /// Malformed input or a violated precondition.
    InvalidInput = 2,
    /// A configured resource bound was exceeded.
    ResourceLimit = 3,
}

/// An opaque graph with sources.
pub struct HralgGraph {
    inner: hralg::Graph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(e: &hralg::Error) -> HralgStatus {
    let message = CString::new(e.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
    match e {
        hralg::Error::ResourceLimit(_) => HralgStatus::ResourceLimit,
        _ => HralgStatus::InvalidInput,
    }
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

unsafe fn text_arg<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn text_result(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// Copies the most recent error message of this thread, or null when the
/// last call succeeded. Free with [`hralg_string_free`].
#[no_mangle]
pub extern "C" fn hralg_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `ptr` must have been returned by a function of this library and not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn hralg_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Parses a graph from its textual format. Returns null on error.
///
/// # Safety
/// `text` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_parse(text: *const c_char) -> *mut HralgGraph {
    clear_error();
    let Some(text) = text_arg(text) else {
        set_error(&hralg::Error::Syntax("null or non-UTF-8 input".into()));
        return std::ptr::null_mut();
    };
    match format::graph_from_text(text) {
        Ok(inner) => Box::into_raw(Box::new(HralgGraph { inner })),
        Err(e) => {
            set_error(&e);
            std::ptr::null_mut()
        }
    }
}

/// Evaluates a ground term (textual format) into a graph. Returns null on
/// error.
///
/// # Safety
/// `text` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hralg_term_eval(text: *const c_char) -> *mut HralgGraph {
    clear_error();
    let Some(text) = text_arg(text) else {
        set_error(&hralg::Error::Syntax("null or non-UTF-8 input".into()));
        return std::ptr::null_mut();
    };
    let result = format::term_from_text(text).and_then(|t| hralg::eval_term(&t));
    match result {
        Ok(inner) => Box::into_raw(Box::new(HralgGraph { inner })),
        Err(e) => {
            set_error(&e);
            std::ptr::null_mut()
        }
    }
}

/// Releases a graph handle.
///
/// # Safety
/// `g` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_free(g: *mut HralgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Renders a graph in its textual format. Free with [`hralg_string_free`].
///
/// # Safety
/// `g` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_to_text(g: *const HralgGraph) -> *mut c_char {
    clear_error();
    if g.is_null() {
        return std::ptr::null_mut();
    }
    text_result(format::graph_to_text(&(*g).inner))
}

/// # Safety
/// `g` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_vertex_count(g: *const HralgGraph) -> usize {
    if g.is_null() {
        return 0;
    }
    (*g).inner.vertex_count()
}

/// # Safety
/// `g` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_edge_count(g: *const HralgGraph) -> usize {
    if g.is_null() {
        return 0;
    }
    (*g).inner.edge_count()
}

/// Decides isomorphism of two graphs; writes the answer to `result`.
///
/// # Safety
/// `a` and `b` must be live handles, `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_isomorphic(
    a: *const HralgGraph,
    b: *const HralgGraph,
    result: *mut bool,
) -> HralgStatus {
    clear_error();
    if a.is_null() || b.is_null() || result.is_null() {
        return set_error(&hralg::Error::Syntax("null argument".into()));
    }
    match hralg::is_isomorphic(&(*a).inner, &(*b).inner) {
        Ok(same) => {
            *result = same;
            if same {
                HralgStatus::Ok
            } else {
                HralgStatus::No
            }
        }
        Err(e) => set_error(&e),
    }
}

/// Exact treewidth of a graph; writes the width to `width`.
///
/// # Safety
/// `g` must be a live handle, `width` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_treewidth(
    g: *const HralgGraph,
    max_vertices: usize,
    width: *mut i64,
) -> HralgStatus {
    clear_error();
    if g.is_null() || width.is_null() {
        return set_error(&hralg::Error::Syntax("null argument".into()));
    }
    match treewidth_exact_bounded(&(*g).inner, max_vertices) {
        Ok((w, _)) => {
            *width = w;
            HralgStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Parses the graph into a parse tree (min-fill decomposition, automatic
/// label budget) and returns its textual format. Free the string with
/// [`hralg_string_free`]; returns null on error.
///
/// # Safety
/// `g` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hralg_graph_parse_tree(g: *const HralgGraph) -> *mut c_char {
    clear_error();
    if g.is_null() {
        set_error(&hralg::Error::Syntax("null argument".into()));
        return std::ptr::null_mut();
    }
    let graph = &(*g).inner;
    let result = (|| {
        let d = decompose_minfill(graph)?;
        let mut budget = graph.sort();
        let mut i = 1;
        let target = graph.sort().len() + d.width().max(0) as usize + 1;
        while budget.len() < target {
            let candidate = SourceLabel::new(format!("t{i}"))?;
            i += 1;
            if !budget.contains(&candidate) {
                budget.insert(candidate);
            }
        }
        let coloring = color_decomposition(graph, &d, &budget)?;
        let pt = decomposition_to_parse_tree(graph, &d, &coloring, &budget)?;
        Ok::<String, hralg::Error>(format::parse_tree_to_text(&pt))
    })();
    match result {
        Ok(text) => text_result(text),
        Err(e) => {
            set_error(&e);
            std::ptr::null_mut()
        }
    }
}

/// Evaluates a parse tree (textual format) back into a graph. Returns null
/// on error.
///
/// # Safety
/// `text` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hralg_parse_tree_val(text: *const c_char) -> *mut HralgGraph {
    clear_error();
    let Some(text) = text_arg(text) else {
        set_error(&hralg::Error::Syntax("null or non-UTF-8 input".into()));
        return std::ptr::null_mut();
    };
    let result = format::parse_tree_from_text(text).and_then(|pt| pt.val());
    match result {
        Ok(inner) => Box::into_raw(Box::new(HralgGraph { inner })),
        Err(e) => {
            set_error(&e);
            std::ptr::null_mut()
        }
    }
}

/// Model-checks a sentence (formula file format) over a structure
/// (textual format); writes the answer to `result`.
///
/// # Safety
/// `structure` and `formula` must be valid NUL-terminated UTF-8 strings,
/// `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hralg_model_check(
    structure: *const c_char,
    formula: *const c_char,
    result: *mut bool,
) -> HralgStatus {
    clear_error();
    let (Some(structure), Some(formula)) = (text_arg(structure), text_arg(formula)) else {
        return set_error(&hralg::Error::Syntax("null or non-UTF-8 input".into()));
    };
    if result.is_null() {
        return set_error(&hralg::Error::Syntax("null result pointer".into()));
    }
    let outcome = (|| {
        let s = format::structure_from_text(structure)?;
        let (_, f) = format::formula_file_from_text(formula)?;
        hralg::logic::models_bounded(&s, &f, Limits::from_env().so_universe_bound)
    })();
    match outcome {
        Ok(holds) => {
            *result = holds;
            if holds {
                HralgStatus::Ok
            } else {
                HralgStatus::No
            }
        }
        Err(e) => set_error(&e),
    }
}
