//! End-to-end runs of the command-line binary: formats, verdicts and exit
//! codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn hralg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hralg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let dir = std::env::temp_dir().join(format!("hralg-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn parse_then_val_then_iso_roundtrip() {
    let tmp = TempDir::new("roundtrip");
    let graph = tmp.path("graph.sexpr");
    let tree = tmp.path("tree.sexpr");
    let back = tmp.path("back.sexpr");

    let o = hralg(&[
        "eval",
        data("path_term.sexpr").to_str().unwrap(),
        "--out",
        graph.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");

    for mode in [&["--minfill"][..], &["--exact"][..]] {
        let mut args = vec!["parse", graph.to_str().unwrap(), "--out", tree.to_str().unwrap()];
        args.extend_from_slice(mode);
        let o = hralg(&args);
        assert_eq!(code(&o), 0, "{o:?}");

        let o = hralg(&["val", tree.to_str().unwrap(), "--out", back.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{o:?}");

        let o = hralg(&["iso", graph.to_str().unwrap(), back.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{o:?}");
        assert_eq!(stdout(&o).trim(), "true");
    }
}

#[test]
fn tw_prints_grid_widths() {
    let o = hralg(&["tw", data("grid2.sexpr").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "2");

    let o = hralg(&["tw", data("grid3.sexpr").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn tw_emits_checkable_decomposition() {
    let tmp = TempDir::new("td");
    let td = tmp.path("td.sexpr");
    let o = hralg(&[
        "tw",
        data("grid3.sexpr").to_str().unwrap(),
        "--out",
        td.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = hralg(&[
        "td-check",
        data("grid3.sexpr").to_str().unwrap(),
        td.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("ok, width 3"));

    // the same decomposition is wrong for the other grid
    let o = hralg(&[
        "td-check",
        data("grid2.sexpr").to_str().unwrap(),
        td.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "unknown vertices are an input error: {o:?}");
}

#[test]
fn td_check_reports_violations() {
    let tmp = TempDir::new("tdbad");
    let graph = tmp.path("graph.sexpr");
    std::fs::write(
        &graph,
        "(graph (vertices v0 v1 v2) (edges (e0 a v0 v1) (e1 a v1 v2)) (sources))",
    )
    .unwrap();
    let td = tmp.path("bad.sexpr");
    std::fs::write(
        &td,
        "(td (node n0 (bag v0 v1)) (node n1 (bag v2)) (parent n0 n1) (root n0))",
    )
    .unwrap();
    let o = hralg(&["td-check", graph.to_str().unwrap(), td.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("violation"));
}

#[test]
fn mc_exit_codes() {
    let tmp = TempDir::new("mc");
    let empty = tmp.path("empty.sexpr");
    std::fs::write(&empty, "(structure (signature) (universe))").unwrap();
    let formula = tmp.path("exists.sexpr");
    std::fs::write(&formula, "(mso (signature) (exists-fo x (= x x)))").unwrap();
    let o = hralg(&["mc", empty.to_str().unwrap(), formula.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "false");

    let one = tmp.path("one.sexpr");
    std::fs::write(&one, "(structure (signature) (universe u0))").unwrap();
    let o = hralg(&["mc", one.to_str().unwrap(), formula.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn malformed_input_is_exit_2() {
    let tmp = TempDir::new("bad");
    let bad = tmp.path("bad.sexpr");
    std::fs::write(&bad, "(graph (vertices v0 v0))").unwrap();
    let o = hralg(&["tw", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    let missing = tmp.path("missing.sexpr");
    let o = hralg(&["eval", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn resource_bound_is_exit_3() {
    let o = hralg(&[
        "tw",
        data("grid3.sexpr").to_str().unwrap(),
        "--max-vertices",
        "4",
    ]);
    assert_eq!(code(&o), 3, "{o:?}");
}

#[test]
fn transduce_builtin_links_leaves() {
    let tmp = TempDir::new("tll");
    let structure = tmp.path("structure.sexpr");
    let o = hralg(&[
        "encode",
        data("btree3.sexpr").to_str().unwrap(),
        "--out",
        structure.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = hralg(&["transduce", structure.to_str().unwrap(), "--builtin", "tll"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("(rel r_next (u"), "one next edge expected: {text}");
}

#[test]
fn enum_filter_and_congr() {
    let tmp = TempDir::new("grammar");
    let o = hralg(&[
        "enum",
        data("star_grammar.sexpr").to_str().unwrap(),
        "X",
        "--depth",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("(graph").count(), 4);

    // multi-graph output re-parses form by form
    let stars = tmp.path("stars.sexpr");
    let o = hralg(&[
        "enum",
        data("star_grammar.sexpr").to_str().unwrap(),
        "X",
        "--depth",
        "3",
        "--out",
        stars.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let parsed =
        hralg::format::graphs_from_text(&std::fs::read_to_string(&stars).unwrap()).unwrap();
    assert_eq!(parsed.len(), 4);

    let filtered = tmp.path("filtered.sexpr");
    let o = hralg(&[
        "filter",
        data("star_grammar.sexpr").to_str().unwrap(),
        data("parity_algebra.sexpr").to_str().unwrap(),
        "--accept",
        "even1",
        "--out",
        filtered.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let o = hralg(&["enum", filtered.to_str().unwrap(), "X@even1", "--depth", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("(graph").count(), 2, "stars with 2 and 4 edges");

    // 0_{s1} against the one-edge star: the empty context separates them
    let g_empty = tmp.path("zero.sexpr");
    std::fs::write(&g_empty, "(graph (vertices v0) (edges) (sources (s1 v0)))").unwrap();
    let g_one = tmp.path("one.sexpr");
    std::fs::write(
        &g_one,
        "(graph (vertices v0) (edges (e0 a v0)) (sources (s1 v0)))",
    )
    .unwrap();
    let o = hralg(&[
        "congr",
        g_empty.to_str().unwrap(),
        g_one.to_str().unwrap(),
        data("star_grammar.sexpr").to_str().unwrap(),
        "X",
        "--depth",
        "4",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("distinguished"));

    let o = hralg(&[
        "congr",
        g_one.to_str().unwrap(),
        g_one.to_str().unwrap(),
        data("star_grammar.sexpr").to_str().unwrap(),
        "X",
        "--depth",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("indistinguishable"));
}

#[test]
fn transduce_from_scheme_file() {
    let tmp = TempDir::new("scheme");
    let scheme = tmp.path("copy.sexpr");
    std::fs::write(
        &scheme,
        "(scheme
  (input (m 1))
  (output (m 1))
  (copies 1)
  (params)
  (domain true)
  (layer 1 true)
  (out m (1) (m x1)))",
    )
    .unwrap();
    let structure = tmp.path("st.sexpr");
    std::fs::write(
        &structure,
        "(structure (signature (m 1)) (universe u0 u1) (rel m (u1)))",
    )
    .unwrap();
    let o = hralg(&[
        "transduce",
        structure.to_str().unwrap(),
        "--scheme",
        scheme.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("(rel m (u"));
}

#[test]
fn resource_cap_env_raises_bounds() {
    let tmp = TempDir::new("cap");
    let structure = tmp.path("big.sexpr");
    let elems: Vec<String> = (0..18).map(|i| format!("u{i}")).collect();
    std::fs::write(
        &structure,
        format!("(structure (signature) (universe {}))", elems.join(" ")),
    )
    .unwrap();
    let formula = tmp.path("so.sexpr");
    std::fs::write(&formula, "(mso (signature) (exists-so X (card X 2 0)))").unwrap();

    // 18 elements exceed the default bound of 16 for set quantification
    let o = hralg(&["mc", structure.to_str().unwrap(), formula.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{o:?}");

    let o = Command::new(env!("CARGO_BIN_EXE_hralg"))
        .env("HRALG_RESOURCE_CAP", "20")
        .args(["mc", structure.to_str().unwrap(), formula.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn emitted_files_reparse() {
    let tmp = TempDir::new("reparse");
    let graph = tmp.path("graph.sexpr");
    let o = hralg(&[
        "eval",
        data("path_term.sexpr").to_str().unwrap(),
        "--out",
        graph.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    // a rewritten graph prints identically: the writer is canonical
    let text = std::fs::read_to_string(&graph).unwrap();
    let reparsed = hralg::format::graph_from_text(&text).unwrap();
    assert_eq!(hralg::format::graph_to_text(&reparsed), text);

    let o = hralg(&["dot", graph.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("digraph"));
}
