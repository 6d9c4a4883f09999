//! The five graph operation families — sources-only constants, single-edge
//! constants, source restriction, source renaming and parallel composition —
//! and evaluation of ground terms over them.

use crate::graph::{Graph, GraphBuilder, VertexId};
use crate::labels::{EdgeLabel, SourceLabel};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A finite set of source labels; the sort of a graph or operation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct SortSet(BTreeSet<SourceLabel>);

impl SortSet {
    pub fn empty() -> SortSet {
        SortSet::default()
    }

    pub fn singleton(s: SourceLabel) -> SortSet {
        SortSet(BTreeSet::from([s]))
    }

    pub fn contains(&self, s: &SourceLabel) -> bool {
        self.0.contains(s)
    }

    pub fn insert(&mut self, s: SourceLabel) {
        self.0.insert(s);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SourceLabel> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &SortSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &SortSet) -> SortSet {
        SortSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &SortSet) -> SortSet {
        SortSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &SortSet) -> SortSet {
        SortSet(self.0.difference(&other.0).cloned().collect())
    }

    /// All subsets, ordered by (size, lexicographic) — deterministic.
    pub fn subsets(&self) -> Vec<SortSet> {
        let items: Vec<&SourceLabel> = self.0.iter().collect();
        let mut out: Vec<SortSet> = Vec::new();
        for mask in 0u64..(1u64 << items.len()) {
            let subset: SortSet = SortSet::from_iter(
                items
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, s)| (*s).clone()),
            );
            out.push(subset);
        }
        out.sort_by_key(|s| (s.len(), s.0.iter().cloned().collect::<Vec<_>>()));
        out
    }
}

impl FromIterator<SourceLabel> for SortSet {
    fn from_iter<I: IntoIterator<Item = SourceLabel>>(iter: I) -> SortSet {
        SortSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a SortSet {
    type Item = &'a SourceLabel;
    type IntoIter = std::collections::btree_set::Iter<'a, SourceLabel>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for SortSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// A finite permutation of source labels: a bijection that moves only
/// finitely many labels. Only the moved labels are stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Permutation {
    map: BTreeMap<SourceLabel, SourceLabel>,
}

impl Permutation {
    pub fn identity() -> Permutation {
        Permutation::default()
    }

    pub fn transposition(a: SourceLabel, b: SourceLabel) -> Permutation {
        if a == b {
            return Permutation::identity();
        }
        let mut map = BTreeMap::new();
        map.insert(a.clone(), b.clone());
        map.insert(b, a);
        Permutation { map }
    }

    /// Builds the permutation that results from applying the given swaps in
    /// order, starting from the identity.
    pub fn from_transpositions(swaps: &[(SourceLabel, SourceLabel)]) -> Permutation {
        let mut p = Permutation::identity();
        for (a, b) in swaps {
            p = Permutation::transposition(a.clone(), b.clone()).compose(&p);
        }
        p
    }

    /// Requires `map` to be a bijection on its own key set.
    pub fn from_mapping(map: BTreeMap<SourceLabel, SourceLabel>) -> Result<Permutation> {
        let keys: BTreeSet<&SourceLabel> = map.keys().collect();
        let values: BTreeSet<&SourceLabel> = map.values().collect();
        if keys != values || values.len() != map.len() {
            return Err(Error::Syntax("mapping is not a permutation".into()));
        }
        let map = map.into_iter().filter(|(a, b)| a != b).collect();
        Ok(Permutation { map })
    }

    pub fn apply(&self, s: &SourceLabel) -> SourceLabel {
        self.map.get(s).cloned().unwrap_or_else(|| s.clone())
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// Function composition: `self.compose(first)` applies `first`, then `self`.
    pub fn compose(&self, first: &Permutation) -> Permutation {
        let mut keys: BTreeSet<SourceLabel> = self.map.keys().cloned().collect();
        keys.extend(first.map.keys().cloned());
        let map = keys
            .into_iter()
            .map(|s| {
                let img = self.apply(&first.apply(&s));
                (s, img)
            })
            .filter(|(a, b)| a != b)
            .collect();
        Permutation { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// The labels moved by the permutation.
    pub fn support(&self) -> SortSet {
        SortSet::from_iter(self.map.keys().cloned())
    }

    /// Preimage of a sort: `{s | self(s) ∈ sort}`.
    pub fn preimage(&self, sort: &SortSet) -> SortSet {
        let inv = self.inverse();
        SortSet::from_iter(sort.iter().map(|s| inv.apply(s)))
    }

    /// A swap sequence that rebuilds the permutation via
    /// [`Permutation::from_transpositions`].
    pub fn to_transpositions(&self) -> Vec<(SourceLabel, SourceLabel)> {
        let mut out = Vec::new();
        let mut seen: BTreeSet<SourceLabel> = BTreeSet::new();
        for start in self.map.keys() {
            if seen.contains(start) {
                continue;
            }
            // walk the cycle start -> apply(start) -> ...
            let mut cycle = vec![start.clone()];
            seen.insert(start.clone());
            let mut cur = self.apply(start);
            while &cur != start {
                seen.insert(cur.clone());
                cycle.push(cur.clone());
                cur = self.apply(&cur);
            }
            // cycle (a1 a2 ... ak) = swaps (a1 a2), (a1 a3), ..., (a1 ak)
            for next in &cycle[1..] {
                out.push((cycle[0].clone(), next.clone()));
            }
        }
        out
    }
}

/// A term over the graph operations; `Nonterminal` leaves only appear in
/// grammar rules, never in ground terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Empty(SortSet),
    Edge(EdgeLabel, Vec<SourceLabel>),
    Restrict(SortSet, Box<Term>),
    Rename(Permutation, Box<Term>),
    Parallel(Box<Term>, Box<Term>),
    Nonterminal(String),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Empty(_) | Term::Edge(..) => true,
            Term::Restrict(_, t) | Term::Rename(_, t) => t.is_ground(),
            Term::Parallel(a, b) => a.is_ground() && b.is_ground(),
            Term::Nonterminal(_) => false,
        }
    }

    pub fn edge_leaf_count(&self) -> usize {
        match self {
            Term::Edge(..) => 1,
            Term::Empty(_) | Term::Nonterminal(_) => 0,
            Term::Restrict(_, t) | Term::Rename(_, t) => t.edge_leaf_count(),
            Term::Parallel(a, b) => a.edge_leaf_count() + b.edge_leaf_count(),
        }
    }

    pub fn nonterminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_nonterminals(&mut out);
        out
    }

    fn collect_nonterminals<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Nonterminal(n) => out.push(n),
            Term::Empty(_) | Term::Edge(..) => {}
            Term::Restrict(_, t) | Term::Rename(_, t) => t.collect_nonterminals(out),
            Term::Parallel(a, b) => {
                a.collect_nonterminals(out);
                b.collect_nonterminals(out);
            }
        }
    }

    /// Source labels mentioned anywhere in the term (constants, restriction
    /// sets, permutation supports).
    pub fn labels_used(&self) -> SortSet {
        match self {
            Term::Empty(t) => t.clone(),
            Term::Edge(_, ss) => SortSet::from_iter(ss.iter().cloned()),
            Term::Restrict(t, inner) => t.union(&inner.labels_used()),
            Term::Rename(p, inner) => p.support().union(&inner.labels_used()),
            Term::Parallel(a, b) => a.labels_used().union(&b.labels_used()),
            Term::Nonterminal(_) => SortSet::empty(),
        }
    }

    /// An upper bound on the sort of any value of the term, given per-
    /// nonterminal sort bounds.
    pub fn sort_bound(&self, nt_sorts: &BTreeMap<String, SortSet>) -> Result<SortSet> {
        match self {
            Term::Empty(t) => Ok(t.clone()),
            Term::Edge(label, ss) => {
                if ss.len() != label.arity() {
                    return Err(Error::SortMismatch(format!(
                        "edge `{label}` expects {} source labels, found {}",
                        label.arity(),
                        ss.len()
                    )));
                }
                Ok(SortSet::from_iter(ss.iter().cloned()))
            }
            Term::Restrict(t, inner) => Ok(t.intersection(&inner.sort_bound(nt_sorts)?)),
            Term::Rename(p, inner) => Ok(p.preimage(&inner.sort_bound(nt_sorts)?)),
            Term::Parallel(a, b) => Ok(a.sort_bound(nt_sorts)?.union(&b.sort_bound(nt_sorts)?)),
            Term::Nonterminal(n) => nt_sorts
                .get(n)
                .cloned()
                .ok_or_else(|| Error::InvalidGrammar(format!("undeclared nonterminal `{n}`"))),
        }
    }
}

/// The graph with one s-source per label in `sort` and no edges.
pub fn const_empty(sort: &SortSet) -> Graph {
    let mut b = GraphBuilder::new();
    for s in sort {
        let v = b.add_vertex();
        b.set_source(s.clone(), v);
    }
    b.finish().expect("sources are distinct by construction")
}

/// The graph with one vertex per distinct label in `ss` and a single edge
/// attached to those source vertices in sequence order. Repeated labels
/// yield repeated attachments (self-loops).
pub fn const_edge(label: &EdgeLabel, ss: &[SourceLabel]) -> Result<Graph> {
    if ss.len() != label.arity() {
        return Err(Error::SortMismatch(format!(
            "edge `{label}` expects {} source labels, found {}",
            label.arity(),
            ss.len()
        )));
    }
    let mut b = GraphBuilder::new();
    let mut by_label: BTreeMap<&SourceLabel, VertexId> = BTreeMap::new();
    for s in ss {
        if !by_label.contains_key(s) {
            let v = b.add_vertex();
            b.set_source(s.clone(), v);
            by_label.insert(s, v);
        }
    }
    let attach: Vec<VertexId> = ss.iter().map(|s| by_label[s]).collect();
    b.add_edge(label.clone(), attach);
    b.finish()
}

/// Keeps only the source labels in `sort`; vertices and edges are untouched.
pub fn restrict(sort: &SortSet, g: &Graph) -> Graph {
    let vertices: BTreeSet<VertexId> = g.vertices().collect();
    let edges = g.edges().map(|(id, e)| (id, e.clone())).collect();
    let sources = g
        .sources()
        .filter(|(s, _)| sort.contains(s))
        .map(|(s, v)| (s.clone(), v))
        .collect();
    Graph::new(vertices, edges, sources)
        .expect("restriction preserves validity")
        .compact()
}

/// Renames sources: the s-source of the result is the `perm(s)`-source of
/// the input, so the result sort is the preimage of the input sort.
pub fn rename(perm: &Permutation, g: &Graph) -> Graph {
    let vertices: BTreeSet<VertexId> = g.vertices().collect();
    let edges = g.edges().map(|(id, e)| (id, e.clone())).collect();
    let inv = perm.inverse();
    let sources = g
        .sources()
        .map(|(s, v)| (inv.apply(s), v))
        .collect();
    Graph::new(vertices, edges, sources)
        .expect("renaming preserves validity")
        .compact()
}

/// Disjoint union with vertices fused when they are s-sources of both
/// arguments for a shared label s. The smallest id in each fused class is
/// kept as the representative.
pub fn parallel(g1: &Graph, g2: &Graph) -> Graph {
    // shift g2 ids above g1's
    let max1 = g1
        .vertices()
        .chain(g1.edges().map(|(id, _)| id))
        .max()
        .map(|m| m + 1)
        .unwrap_or(0);

    let mut vertices: BTreeSet<VertexId> = g1.vertices().collect();
    vertices.extend(g2.vertices().map(|v| v + max1));

    // union-find keyed by vertex id; the representative is the smallest id
    let mut repr: BTreeMap<VertexId, VertexId> = vertices.iter().map(|v| (*v, *v)).collect();
    fn find(repr: &mut BTreeMap<VertexId, VertexId>, v: VertexId) -> VertexId {
        let mut root = v;
        while repr[&root] != root {
            root = repr[&root];
        }
        let mut cur = v;
        while repr[&cur] != root {
            let next = repr[&cur];
            repr.insert(cur, root);
            cur = next;
        }
        root
    }
    for (s, v1) in g1.sources() {
        if let Some(v2) = g2.source(s) {
            let r1 = find(&mut repr, v1);
            let r2 = find(&mut repr, v2 + max1);
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            repr.insert(hi, lo);
        }
    }

    let ids: Vec<VertexId> = vertices.iter().copied().collect();
    let mut fused: BTreeSet<VertexId> = BTreeSet::new();
    let mut class: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for v in ids {
        let r = find(&mut repr, v);
        class.insert(v, r);
        fused.insert(r);
    }

    let mut edges = BTreeMap::new();
    for (id, e) in g1.edges() {
        edges.insert(
            id,
            crate::graph::Edge {
                label: e.label.clone(),
                attach: e.attach.iter().map(|v| class[v]).collect(),
            },
        );
    }
    for (id, e) in g2.edges() {
        edges.insert(
            id + max1,
            crate::graph::Edge {
                label: e.label.clone(),
                attach: e.attach.iter().map(|v| class[&(v + max1)]).collect(),
            },
        );
    }

    let mut sources: BTreeMap<SourceLabel, VertexId> = BTreeMap::new();
    for (s, v) in g1.sources() {
        sources.insert(s.clone(), class[&v]);
    }
    for (s, v) in g2.sources() {
        sources.insert(s.clone(), class[&(v + max1)]);
    }

    Graph::new(fused, edges, sources)
        .expect("composition preserves validity")
        .compact()
}

/// Bottom-up evaluation of a ground term.
pub fn eval_term(t: &Term) -> Result<Graph> {
    match t {
        Term::Empty(sort) => Ok(const_empty(sort)),
        Term::Edge(label, ss) => const_edge(label, ss),
        Term::Restrict(sort, inner) => Ok(restrict(sort, &eval_term(inner)?)),
        Term::Rename(perm, inner) => Ok(rename(perm, &eval_term(inner)?)),
        Term::Parallel(a, b) => Ok(parallel(&eval_term(a)?, &eval_term(b)?)),
        Term::Nonterminal(n) => Err(Error::NonGround(n.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_isomorphic;

    fn s(name: &str) -> SourceLabel {
        SourceLabel::new(name).unwrap()
    }

    fn lbl(name: &str, arity: usize) -> EdgeLabel {
        EdgeLabel::new(name, arity).unwrap()
    }

    #[test]
    fn const_empty_sizes() {
        assert_eq!(const_empty(&SortSet::empty()).vertex_count(), 0);
        assert_eq!(const_empty(&SortSet::singleton(s("s1"))).vertex_count(), 1);
        let g = const_empty(&SortSet::from_iter([s("s1"), s("s2")]));
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.sort().len(), 2);
    }

    #[test]
    fn const_edge_basic() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        let (_, e) = g.edges().next().unwrap();
        assert_eq!(e.attach[0], g.source(&s("s1")).unwrap());
        assert_eq!(e.attach[1], g.source(&s("s2")).unwrap());

        let unary = const_edge(&lbl("c", 1), &[s("s1")]).unwrap();
        assert_eq!(unary.vertex_count(), 1);
        assert_eq!(unary.edge_count(), 1);
    }

    #[test]
    fn const_edge_repeated_label_is_self_loop() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s1")]).unwrap();
        assert_eq!(g.vertex_count(), 1);
        let (_, e) = g.edges().next().unwrap();
        assert_eq!(e.attach[0], e.attach[1]);
    }

    #[test]
    fn const_edge_arity_mismatch() {
        assert!(const_edge(&lbl("a", 2), &[s("s1")]).is_err());
    }

    #[test]
    fn restrict_cases() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap();
        let same = restrict(&g.sort(), &g);
        assert!(is_isomorphic(&g, &same).unwrap());

        let bare = restrict(&SortSet::empty(), &g);
        assert_eq!(bare.edge_count(), 1);
        assert_eq!(bare.vertex_count(), 2);
        assert!(bare.sort().is_empty());

        let partial = restrict(&SortSet::from_iter([s("s1"), s("s9")]), &g);
        assert_eq!(partial.sort(), SortSet::singleton(s("s1")));
    }

    #[test]
    fn rename_cases() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap();
        let same = rename(&Permutation::identity(), &g);
        assert!(is_isomorphic(&g, &same).unwrap());

        let swapped = rename(&Permutation::transposition(s("s1"), s("s2")), &g);
        let (_, e) = swapped.edges().next().unwrap();
        // the s1-source of the result is the former s2-source
        assert_eq!(swapped.source(&s("s1")).unwrap(), e.attach[1]);

        let g2 = const_empty(&SortSet::from_iter([s("s1"), s("s2")]));
        let renamed = rename(&Permutation::transposition(s("s2"), s("s3")), &g2);
        assert_eq!(renamed.sort(), SortSet::from_iter([s("s1"), s("s3")]));
    }

    #[test]
    fn parallel_cases() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap();
        let neutral = parallel(&const_empty(&SortSet::empty()), &g);
        assert!(is_isomorphic(&g, &neutral).unwrap());

        let h = parallel(
            &g,
            &const_edge(&lbl("b", 2), &[s("s2"), s("s3")]).unwrap(),
        );
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.sort(), SortSet::from_iter([s("s1"), s("s2"), s("s3")]));

        let e0 = const_empty(&SortSet::singleton(s("s1")));
        let fused = parallel(&e0, &e0);
        assert!(is_isomorphic(&e0, &fused).unwrap());
    }

    #[test]
    fn eval_term_cases() {
        let one = eval_term(&Term::Empty(SortSet::singleton(s("s1")))).unwrap();
        assert_eq!(one.vertex_count(), 1);

        let t = Term::Restrict(
            SortSet::empty(),
            Box::new(Term::Edge(lbl("a", 2), vec![s("s1"), s("s2")])),
        );
        let g = eval_term(&t).unwrap();
        assert!(g.sort().is_empty());
        assert_eq!(g.edge_count(), 1);

        let bad = Term::Parallel(
            Box::new(Term::Empty(SortSet::empty())),
            Box::new(Term::Nonterminal("X".into())),
        );
        assert!(matches!(eval_term(&bad), Err(Error::NonGround(_))));
    }

    #[test]
    fn permutation_roundtrip() {
        let p = Permutation::from_transpositions(&[(s("s1"), s("s2")), (s("s2"), s("s3"))]);
        let q = Permutation::from_transpositions(&p.to_transpositions());
        assert_eq!(p, q);
        assert_eq!(p.compose(&p.inverse()), Permutation::identity());
    }

    #[test]
    fn permutation_cycle_semantics() {
        // swaps applied in order: s1->s2 first, then s2->s3
        let p = Permutation::from_transpositions(&[(s("s1"), s("s2")), (s("s2"), s("s3"))]);
        assert_eq!(p.apply(&s("s1")), s("s3"));
        assert_eq!(p.apply(&s("s2")), s("s1"));
        assert_eq!(p.apply(&s("s3")), s("s2"));
    }
}
