//! Exercises the C ABI the way a foreign caller would: text in, handles
//! and status codes out.

use hralg_ffi::*;
use std::ffi::{CStr, CString};

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

#[test]
fn graph_roundtrip_through_text() {
    let text = c("(graph (vertices v0 v1) (edges (e0 a v0 v1)) (sources (s1 v0)))");
    unsafe {
        let g = hralg_graph_parse(text.as_ptr());
        assert!(!g.is_null());
        assert_eq!(hralg_graph_vertex_count(g), 2);
        assert_eq!(hralg_graph_edge_count(g), 1);
        let rendered = hralg_graph_to_text(g);
        let back = hralg_graph_parse(rendered);
        let mut same = false;
        assert_eq!(hralg_graph_isomorphic(g, back, &mut same), HralgStatus::Ok);
        assert!(same);
        hralg_string_free(rendered);
        hralg_graph_free(back);
        hralg_graph_free(g);
    }
}

#[test]
fn parse_errors_set_message() {
    let bad = c("(graph (vertices v0 v0))");
    unsafe {
        let g = hralg_graph_parse(bad.as_ptr());
        assert!(g.is_null());
        let err = hralg_last_error();
        assert!(!err.is_null());
        let message = CStr::from_ptr(err).to_string_lossy().into_owned();
        assert!(message.contains("duplicate vertex"), "{message}");
        hralg_string_free(err);
    }
}

#[test]
fn eval_treewidth_and_parse_tree() {
    let term = c("(restrict () (par (par (edge a s1 s2) (edge a s2 s3)) (edge a s3 s1)))");
    unsafe {
        let g = hralg_term_eval(term.as_ptr());
        assert!(!g.is_null());
        let mut width = -2i64;
        assert_eq!(hralg_graph_treewidth(g, 10, &mut width), HralgStatus::Ok);
        assert_eq!(width, 2);

        let tree_text = hralg_graph_parse_tree(g);
        assert!(!tree_text.is_null());
        let back = hralg_parse_tree_val(tree_text);
        assert!(!back.is_null());
        let mut same = false;
        assert_eq!(hralg_graph_isomorphic(g, back, &mut same), HralgStatus::Ok);
        assert!(same);
        hralg_string_free(tree_text);
        hralg_graph_free(back);
        hralg_graph_free(g);
    }
}

#[test]
fn negative_verdicts_and_limits() {
    let t1 = c("(empty (s1))");
    let t2 = c("(empty (s1 s2))");
    unsafe {
        let g1 = hralg_term_eval(t1.as_ptr());
        let g2 = hralg_term_eval(t2.as_ptr());
        let mut same = true;
        assert_eq!(hralg_graph_isomorphic(g1, g2, &mut same), HralgStatus::No);
        assert!(!same);

        let mut width = 0i64;
        assert_eq!(
            hralg_graph_treewidth(g2, 1, &mut width),
            HralgStatus::ResourceLimit
        );
        hralg_graph_free(g1);
        hralg_graph_free(g2);
    }
}

#[test]
fn model_check_through_text() {
    let structure = c("(structure (signature (m 1)) (universe u0 u1) (rel m (u0)))");
    let holds = c("(mso (signature (m 1)) (exists-fo x (m x)))");
    let fails = c("(mso (signature (m 1)) (forall-fo x (m x)))");
    unsafe {
        let mut answer = false;
        assert_eq!(
            hralg_model_check(structure.as_ptr(), holds.as_ptr(), &mut answer),
            HralgStatus::Ok
        );
        assert!(answer);
        assert_eq!(
            hralg_model_check(structure.as_ptr(), fails.as_ptr(), &mut answer),
            HralgStatus::No
        );
        assert!(!answer);
    }
}

#[test]
fn header_is_generated() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hralg.h");
    let text = std::fs::read_to_string(header).unwrap();
    assert!(text.contains("hralg_graph_parse"));
    assert!(text.contains("HralgStatus"));
    assert!(text.contains("typedef struct HralgGraph HralgGraph;"));
}
