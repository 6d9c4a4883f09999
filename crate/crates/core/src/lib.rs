//! A toolkit for the algebra of graphs with sources: build graphs from
//! terms over sources-only/single-edge constants, restriction, renaming and
//! parallel composition; compute and validate tree decompositions; parse
//! bounded-treewidth graphs into parse trees whose canonical evaluation
//! reproduces the graph; model-check counting monadic second-order formulas
//! over finite structures; apply definable transduction schemes; and
//! manipulate graph grammars (enumeration, filtering against finite
//! recognizers, bounded congruence testing).
//!
//! All values are immutable after construction and every operation is pure,
//! so everything here is safe to share and send across threads.

use thiserror::Error as ThisError;

pub mod algebra;
pub mod decomposition;
pub mod format;
pub mod grammar;
pub mod graph;
pub mod labels;
pub mod logic;
pub mod recognizer;
pub mod sexpr;
pub mod structure;
pub mod transduction;
pub mod tree;

pub use algebra::{
    const_edge, const_empty, eval_term, parallel, rename, restrict, Permutation, SortSet, Term,
};
pub use graph::{is_isomorphic, is_isomorphic_bounded, Graph, GraphBuilder};
pub use labels::{EdgeLabel, SourceLabel};

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid parse tree: {0}")]
    InvalidParseTree(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("term is not ground: nonterminal `{0}`")]
    NonGround(String),
    #[error("formula is not a sentence: free variable `{0}`")]
    NotASentence(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("missing operation table entry: {0}")]
    MissingTableEntry(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Bounds that keep the exhaustive algorithms at desk scale. The
/// `HRALG_RESOURCE_CAP` environment variable, when set to an integer N,
/// raises the evaluator bounds (second-order universe bound, parameter
/// enumeration bound, exact treewidth bound) to N.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Largest universe allowed under second-order quantification (≤ 64).
    pub so_universe_bound: usize,
    /// Largest vertex count accepted by the isomorphism search.
    pub iso_vertex_bound: usize,
    /// Largest vertex count accepted by the exact treewidth search.
    pub tw_vertex_bound: usize,
    /// Largest universe allowed when enumerating set-parameter valuations.
    pub param_enum_bound: usize,
    /// Largest per-stage set size during grammar enumeration.
    pub stage_cap: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            so_universe_bound: 16,
            iso_vertex_bound: graph::DEFAULT_ISO_VERTEX_BOUND,
            tw_vertex_bound: 10,
            param_enum_bound: 12,
            stage_cap: 10_000,
        }
    }
}

impl Limits {
    /// Defaults, with the global resource cap from the environment applied.
    pub fn from_env() -> Limits {
        let mut limits = Limits::default();
        if let Ok(value) = std::env::var("HRALG_RESOURCE_CAP") {
            if let Ok(cap) = value.parse::<usize>() {
                limits.so_universe_bound = cap.min(64);
                limits.param_enum_bound = cap;
                limits.tw_vertex_bound = cap;
            }
        }
        limits
    }
}

#[cfg(test)]
mod thread_safety {
    use super::*;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn values_cross_threads() {
        assert_send_sync::<graph::Graph>();
        assert_send_sync::<algebra::Term>();
        assert_send_sync::<tree::ParseTree>();
        assert_send_sync::<decomposition::TreeDecomposition>();
        assert_send_sync::<decomposition::Coloring>();
        assert_send_sync::<structure::Structure>();
        assert_send_sync::<logic::Formula>();
        assert_send_sync::<transduction::TransductionScheme>();
        assert_send_sync::<grammar::Grammar>();
        assert_send_sync::<recognizer::FiniteAlgebra>();
    }
}
