//! Trees as a derived graph algebra, parse trees over the parse alphabet,
//! canonical term extraction, canonical evaluation and source presence.
//!
//! A tree is a graph of sort {r} built from leaf constants, `append` (a new
//! root above the old one, joined by a binary edge) and `compose` (root
//! fusion). Parse trees are trees whose edge labels name graph operations;
//! evaluating those labels bottom-up yields the represented graph.

use crate::algebra::{
    const_edge, const_empty, parallel, rename, restrict, Permutation, SortSet, Term,
};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::labels::{EdgeLabel, SourceLabel};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// The distinguished root source label.
pub fn root_label() -> SourceLabel {
    SourceLabel::new("r").unwrap()
}

fn aux_label() -> SourceLabel {
    SourceLabel::new("aux").unwrap()
}

/// A graph of sort {r} whose binary edges form a tree rooted at the
/// r-source, oriented parent to child, and whose leaves each carry at least
/// one unary edge.
#[derive(Clone, Debug)]
pub struct Tree {
    graph: Graph,
    root: VertexId,
}

impl Tree {
    /// A single root vertex carrying one unary `c`-edge.
    pub fn leaf(c: &EdgeLabel) -> Result<Tree> {
        if !c.is_unary() {
            return Err(Error::InvalidTree(format!(
                "leaf label `{c}` must be unary, has arity {}",
                c.arity()
            )));
        }
        let graph = const_edge(c, &[root_label()])?;
        Tree::from_graph(graph)
    }

    /// A new root above `t`, joined to the old root by a `b`-labeled edge
    /// oriented (new root, old root). Defined through the graph operations:
    /// rename r<->aux after restricting the composition with a single
    /// b-edge whose endpoints are the aux- and r-sources.
    pub fn append(b: &EdgeLabel, t: &Tree) -> Result<Tree> {
        if !b.is_binary() {
            return Err(Error::InvalidTree(format!(
                "append label `{b}` must be binary, has arity {}",
                b.arity()
            )));
        }
        let edge = const_edge(b, &[aux_label(), root_label()])?;
        let glued = parallel(&edge, &t.graph);
        let restricted = restrict(&SortSet::singleton(aux_label()), &glued);
        let renamed = rename(
            &Permutation::transposition(root_label(), aux_label()),
            &restricted,
        );
        Tree::from_graph(renamed)
    }

    /// Root fusion: the subtrees of both arguments side by side under one
    /// root. Commutative up to isomorphism.
    pub fn compose(&self, other: &Tree) -> Tree {
        let graph = parallel(&self.graph, &other.graph);
        Tree::from_graph(graph).expect("composition of trees is a tree")
    }

    /// Validates the tree invariants on an arbitrary graph.
    pub fn from_graph(graph: Graph) -> Result<Tree> {
        if let Some(v) = graph.validate() {
            return Err(Error::InvalidTree(v.to_string()));
        }
        if graph.sort() != SortSet::singleton(root_label()) {
            return Err(Error::InvalidTree(format!(
                "a tree has sort {{r}}, found {}",
                graph.sort()
            )));
        }
        let root = graph.source(&root_label()).unwrap();
        let mut parent_edges: BTreeMap<VertexId, usize> =
            graph.vertices().map(|v| (v, 0)).collect();
        let mut children: BTreeMap<VertexId, Vec<VertexId>> =
            graph.vertices().map(|v| (v, Vec::new())).collect();
        let mut has_unary: BTreeMap<VertexId, bool> =
            graph.vertices().map(|v| (v, false)).collect();
        for (id, e) in graph.edges() {
            match e.attach.len() {
                1 => {
                    has_unary.insert(e.attach[0], true);
                }
                2 => {
                    if e.attach[0] == e.attach[1] {
                        return Err(Error::InvalidTree(format!("edge {id} is a self-loop")));
                    }
                    *parent_edges.get_mut(&e.attach[1]).unwrap() += 1;
                    children.get_mut(&e.attach[0]).unwrap().push(e.attach[1]);
                }
                n => {
                    return Err(Error::InvalidTree(format!(
                        "edge {id} has arity {n}; trees only carry unary and binary edges"
                    )));
                }
            }
        }
        if parent_edges[&root] != 0 {
            return Err(Error::InvalidTree("the root has an incoming edge".into()));
        }
        for (v, indeg) in &parent_edges {
            if *v != root && *indeg != 1 {
                return Err(Error::InvalidTree(format!(
                    "node {v} has {indeg} incoming edges, expected 1"
                )));
            }
        }
        // reachability from the root; with unique parents this settles both
        // connectivity and acyclicity
        let mut seen = vec![root];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for c in &children[&v] {
                seen.push(*c);
                stack.push(*c);
            }
        }
        if seen.len() != graph.vertex_count() {
            return Err(Error::InvalidTree("not connected".into()));
        }
        for (v, cs) in &children {
            if cs.is_empty() && !has_unary[v] {
                return Err(Error::InvalidTree(format!(
                    "leaf {v} carries no unary edge"
                )));
            }
        }
        Ok(Tree { graph, root })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Unary edge labels attached to `v`, sorted.
    pub fn unary_labels(&self, v: VertexId) -> Vec<EdgeLabel> {
        let mut out: Vec<EdgeLabel> = self
            .graph
            .edges()
            .filter(|(_, e)| e.attach.len() == 1 && e.attach[0] == v)
            .map(|(_, e)| e.label.clone())
            .collect();
        out.sort();
        out
    }

    /// Children of `v` with the binary labels of the connecting edges.
    pub fn children(&self, v: VertexId) -> Vec<(EdgeLabel, VertexId)> {
        self.graph
            .edges()
            .filter(|(_, e)| e.attach.len() == 2 && e.attach[0] == v)
            .map(|(_, e)| (e.label.clone(), e.attach[1]))
            .collect()
    }

    pub fn height(&self) -> usize {
        fn rec(t: &Tree, v: VertexId) -> usize {
            t.children(v)
                .iter()
                .map(|(_, c)| 1 + rec(t, *c))
                .max()
                .unwrap_or(0)
        }
        rec(self, self.root)
    }
}

/// A term over the tree constructors; the canonical form of a tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TreeTerm {
    Leaf(EdgeLabel),
    Append(EdgeLabel, Box<TreeTerm>),
    Compose(Box<TreeTerm>, Box<TreeTerm>),
}

impl TreeTerm {
    pub fn build(&self) -> Result<Tree> {
        match self {
            TreeTerm::Leaf(c) => Tree::leaf(c),
            TreeTerm::Append(b, t) => Tree::append(b, &t.build()?),
            TreeTerm::Compose(a, b) => Ok(a.build()?.compose(&b.build()?)),
        }
    }
}

impl fmt::Display for TreeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeTerm::Leaf(c) => write!(f, "(leaf {c})"),
            TreeTerm::Append(b, t) => write!(f, "(append {b} {t})"),
            TreeTerm::Compose(a, b) => write!(f, "(par {a} {b})"),
        }
    }
}

/// The canonical term of a tree: unary constants first (sorted by label),
/// then appended subtrees sorted by (label, canonical form of the subtree),
/// folded left into composition. Isomorphic trees yield identical terms.
pub fn canonical_term(t: &Tree) -> TreeTerm {
    fn rec(t: &Tree, v: VertexId) -> TreeTerm {
        let mut items: Vec<TreeTerm> = t
            .unary_labels(v)
            .into_iter()
            .map(TreeTerm::Leaf)
            .collect();
        let mut appended: Vec<(EdgeLabel, String, TreeTerm)> = t
            .children(v)
            .into_iter()
            .map(|(b, c)| {
                let sub = rec(t, c);
                let key = sub.to_string();
                (b, key, sub)
            })
            .collect();
        appended.sort_by(|(b1, k1, _), (b2, k2, _)| b1.cmp(b2).then_with(|| k1.cmp(k2)));
        items.extend(
            appended
                .into_iter()
                .map(|(b, _, sub)| TreeTerm::Append(b, Box::new(sub))),
        );
        items
            .into_iter()
            .reduce(|acc, item| TreeTerm::Compose(Box::new(acc), Box::new(item)))
            .expect("every tree node carries a unary edge or a child")
    }
    rec(t, t.root())
}

/// Edge labels of parse trees: unary constants for the sources-only and
/// single-edge graphs, binary labels for restriction and renaming.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParseLabel {
    EmptyU(SortSet),
    EdgeU(EdgeLabel, Vec<SourceLabel>),
    RestrictB(SortSet),
    RenameB(Permutation),
}

impl ParseLabel {
    pub fn arity(&self) -> usize {
        match self {
            ParseLabel::EmptyU(_) | ParseLabel::EdgeU(..) => 1,
            ParseLabel::RestrictB(_) | ParseLabel::RenameB(_) => 2,
        }
    }

    /// Source labels the symbol mentions; a parse tree of declared sort τ
    /// may only use symbols whose labels lie inside τ.
    pub fn labels_used(&self) -> SortSet {
        match self {
            ParseLabel::EmptyU(t) | ParseLabel::RestrictB(t) => t.clone(),
            ParseLabel::EdgeU(_, ss) => SortSet::from_iter(ss.iter().cloned()),
            ParseLabel::RenameB(p) => p.support(),
        }
    }

    /// The parse symbol as a graph edge label. The name is a compact
    /// rendering that the graph formats treat as opaque.
    pub fn to_edge_label(&self) -> EdgeLabel {
        let name = match self {
            ParseLabel::EmptyU(t) => format!("0{}", brace_sorts(t)),
            ParseLabel::EdgeU(a, ss) => {
                let args: Vec<&str> = ss.iter().map(|s| s.name()).collect();
                format!("e{{{};{}}}", a.name(), args.join(","))
            }
            ParseLabel::RestrictB(t) => format!("r{}", brace_sorts(t)),
            ParseLabel::RenameB(p) => {
                let pairs: Vec<String> = p
                    .support()
                    .iter()
                    .map(|s| format!("{}>{}", s, p.apply(s)))
                    .collect();
                format!("p{{{}}}", pairs.join(","))
            }
        };
        EdgeLabel::new(name, self.arity()).expect("parse symbol names are nonempty")
    }

    pub fn from_edge_label(l: &EdgeLabel) -> Result<ParseLabel> {
        let name = l.name();
        let body = name
            .get(1..)
            .and_then(|rest| rest.strip_prefix('{'))
            .and_then(|rest| rest.strip_suffix('}'))
            .ok_or_else(|| {
                Error::InvalidParseTree(format!("`{name}` is not a parse symbol"))
            })?;
        let parsed = match &name[..1] {
            "0" => ParseLabel::EmptyU(parse_sorts(body)?),
            "r" => ParseLabel::RestrictB(parse_sorts(body)?),
            "e" => {
                let (label, args) = body.split_once(';').ok_or_else(|| {
                    Error::InvalidParseTree(format!("bad edge symbol `{name}`"))
                })?;
                let ss = split_items(args)
                    .map(SourceLabel::new)
                    .collect::<Result<Vec<_>>>()?;
                ParseLabel::EdgeU(EdgeLabel::new(label, ss.len())?, ss)
            }
            "p" => {
                let mut map = BTreeMap::new();
                for pair in split_items(body) {
                    let (from, to) = pair.split_once('>').ok_or_else(|| {
                        Error::InvalidParseTree(format!("bad rename symbol `{name}`"))
                    })?;
                    map.insert(SourceLabel::new(from)?, SourceLabel::new(to)?);
                }
                ParseLabel::RenameB(Permutation::from_mapping(map)?)
            }
            other => {
                return Err(Error::InvalidParseTree(format!(
                    "unknown parse symbol kind `{other}`"
                )))
            }
        };
        if parsed.arity() != l.arity() {
            return Err(Error::InvalidParseTree(format!(
                "parse symbol `{name}` has arity {}, edge label has {}",
                parsed.arity(),
                l.arity()
            )));
        }
        Ok(parsed)
    }
}

fn brace_sorts(t: &SortSet) -> String {
    let names: Vec<&str> = t.iter().map(|s| s.name()).collect();
    format!("{{{}}}", names.join(","))
}

fn split_items(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').filter(|p| !p.is_empty())
}

fn parse_sorts(body: &str) -> Result<SortSet> {
    split_items(body)
        .map(SourceLabel::new)
        .collect::<Result<Vec<_>>>()
        .map(SortSet::from_iter)
}

impl fmt::Display for ParseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_edge_label().name())
    }
}

/// A tree whose edge labels all come from the parse alphabet restricted to
/// the declared sort.
#[derive(Clone, Debug)]
pub struct ParseTree {
    tree: Tree,
    sort: SortSet,
    labels: BTreeMap<EdgeId, ParseLabel>,
}

impl ParseTree {
    pub fn new(tree: Tree, sort: SortSet) -> Result<ParseTree> {
        let mut labels = BTreeMap::new();
        for (id, e) in tree.graph().edges() {
            let label = ParseLabel::from_edge_label(&e.label)?;
            if !label.labels_used().is_subset(&sort) {
                return Err(Error::InvalidParseTree(format!(
                    "symbol `{label}` uses source labels outside the declared sort {sort}"
                )));
            }
            labels.insert(id, label);
        }
        Ok(ParseTree { tree, sort, labels })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn sort(&self) -> &SortSet {
        &self.sort
    }

    pub fn label(&self, id: EdgeId) -> &ParseLabel {
        &self.labels[&id]
    }

    /// The parse tree of a ground term: constants become unary-labeled
    /// leaves, restriction and renaming become binary edges to the subtree,
    /// and composition fuses roots.
    pub fn from_term(t: &Term) -> Result<ParseTree> {
        fn rec(t: &Term) -> Result<Tree> {
            match t {
                Term::Empty(sort) => {
                    Tree::leaf(&ParseLabel::EmptyU(sort.clone()).to_edge_label())
                }
                Term::Edge(label, ss) => {
                    if ss.len() != label.arity() {
                        return Err(Error::SortMismatch(format!(
                            "edge `{label}` expects {} source labels, found {}",
                            label.arity(),
                            ss.len()
                        )));
                    }
                    Tree::leaf(&ParseLabel::EdgeU(label.clone(), ss.clone()).to_edge_label())
                }
                Term::Restrict(sort, inner) => Tree::append(
                    &ParseLabel::RestrictB(sort.clone()).to_edge_label(),
                    &rec(inner)?,
                ),
                Term::Rename(perm, inner) => Tree::append(
                    &ParseLabel::RenameB(perm.clone()).to_edge_label(),
                    &rec(inner)?,
                ),
                Term::Parallel(a, b) => Ok(rec(a)?.compose(&rec(b)?)),
                Term::Nonterminal(n) => Err(Error::NonGround(n.clone())),
            }
        }
        let tree = rec(t)?;
        ParseTree::new(tree, t.labels_used())
    }

    /// Canonical evaluation: leaves' unary symbols evaluate as constants,
    /// binary symbols apply restriction or renaming to the child's value,
    /// and siblings combine with parallel composition. The result does not
    /// depend on the order of siblings.
    pub fn val(&self) -> Result<Graph> {
        self.eval_node(self.tree.root())
    }

    fn eval_node(&self, v: VertexId) -> Result<Graph> {
        let mut parts: Vec<Graph> = Vec::new();
        for (id, e) in self.tree.graph().edges() {
            if e.attach.len() == 1 && e.attach[0] == v {
                parts.push(match &self.labels[&id] {
                    ParseLabel::EmptyU(sort) => const_empty(sort),
                    ParseLabel::EdgeU(a, ss) => const_edge(a, ss)?,
                    other => {
                        return Err(Error::InvalidParseTree(format!(
                            "binary symbol `{other}` on a unary edge"
                        )))
                    }
                });
            }
        }
        for (id, e) in self.tree.graph().edges() {
            if e.attach.len() == 2 && e.attach[0] == v {
                let sub = self.eval_node(e.attach[1])?;
                parts.push(match &self.labels[&id] {
                    ParseLabel::RestrictB(sort) => restrict(sort, &sub),
                    ParseLabel::RenameB(perm) => rename(perm, &sub),
                    other => {
                        return Err(Error::InvalidParseTree(format!(
                            "unary symbol `{other}` on a binary edge"
                        )))
                    }
                });
            }
        }
        parts
            .into_iter()
            .reduce(|acc, g| parallel(&acc, &g))
            .ok_or_else(|| Error::InvalidParseTree("a node with no edges".into()))
    }

    /// Whether `s` is present in the evaluated graph, decided structurally:
    /// a root path reaches a unary symbol mentioning the label, with
    /// restriction edges keeping it and rename edges mapping it, without
    /// computing the evaluation.
    pub fn source_present(&self, s: &SourceLabel) -> bool {
        self.present_at(self.tree.root(), s)
    }

    fn present_at(&self, v: VertexId, s: &SourceLabel) -> bool {
        for (id, e) in self.tree.graph().edges() {
            if e.attach.len() == 1 && e.attach[0] == v {
                match &self.labels[&id] {
                    ParseLabel::EmptyU(sort) if sort.contains(s) => return true,
                    ParseLabel::EdgeU(_, ss) if ss.contains(s) => return true,
                    _ => {}
                }
            }
            if e.attach.len() == 2 && e.attach[0] == v {
                match &self.labels[&id] {
                    ParseLabel::RestrictB(sort) => {
                        if sort.contains(s) && self.present_at(e.attach[1], s) {
                            return true;
                        }
                    }
                    ParseLabel::RenameB(perm)
                        if self.present_at(e.attach[1], &perm.apply(s)) =>
                    {
                        return true;
                    }
                    _ => {}
                }
            }
        }
        false
    }
}

/// Translation of a ground term into its parse tree.
pub fn term_to_parse_tree(t: &Term) -> Result<ParseTree> {
    ParseTree::from_term(t)
}
