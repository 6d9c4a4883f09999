//! Concrete hypergraphs with ordered edge attachments and injectively
//! labeled source vertices, plus isomorphism checking.
//!
//! Vertices and edges share one id space inside a graph, so the two sets are
//! disjoint by construction. Ids are opaque: graphs are compared up to
//! isomorphism, never by id equality.

use crate::algebra::SortSet;
use crate::labels::{EdgeLabel, SourceLabel};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Default cap on the vertex count accepted by the isomorphism search.
pub const DEFAULT_ISO_VERTEX_BOUND: usize = 64;

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: EdgeLabel,
    pub attach: Vec<VertexId>,
}

#[derive(Clone, Debug, Default)]
pub struct Graph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
    sources: BTreeMap<SourceLabel, VertexId>,
}

/// The first violated graph invariant, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphViolation {
    IdClash(u32),
    DanglingAttach { edge: EdgeId, vertex: VertexId },
    ArityMismatch { edge: EdgeId, expected: usize, found: usize },
    SourceNotAVertex { label: SourceLabel, vertex: VertexId },
    SourceNotInjective { first: SourceLabel, second: SourceLabel },
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphViolation::IdClash(id) => {
                write!(f, "id {id} is used both as a vertex and as an edge")
            }
            GraphViolation::DanglingAttach { edge, vertex } => {
                write!(f, "edge {edge} is attached to unknown vertex {vertex}")
            }
            GraphViolation::ArityMismatch { edge, expected, found } => write!(
                f,
                "arity mismatch: edge {edge} attaches {found} vertices, label expects {expected}"
            ),
            GraphViolation::SourceNotAVertex { label, vertex } => {
                write!(f, "source {label} names unknown vertex {vertex}")
            }
            GraphViolation::SourceNotInjective { first, second } => {
                write!(f, "src not injective: {first} and {second} share a vertex")
            }
        }
    }
}

impl From<GraphViolation> for Error {
    fn from(v: GraphViolation) -> Error {
        Error::InvalidGraph(v.to_string())
    }
}

impl Graph {
    pub fn new(
        vertices: BTreeSet<VertexId>,
        edges: BTreeMap<EdgeId, Edge>,
        sources: BTreeMap<SourceLabel, VertexId>,
    ) -> Result<Graph> {
        let g = Graph { vertices, edges, sources };
        match g.validate() {
            None => Ok(g),
            Some(v) => Err(v.into()),
        }
    }

    pub fn empty() -> Graph {
        Graph::default()
    }

    /// Checks every invariant and reports the first violation found.
    pub fn validate(&self) -> Option<GraphViolation> {
        for id in self.edges.keys() {
            if self.vertices.contains(id) {
                return Some(GraphViolation::IdClash(*id));
            }
        }
        for (id, edge) in &self.edges {
            if edge.attach.len() != edge.label.arity() {
                return Some(GraphViolation::ArityMismatch {
                    edge: *id,
                    expected: edge.label.arity(),
                    found: edge.attach.len(),
                });
            }
            for v in &edge.attach {
                if !self.vertices.contains(v) {
                    return Some(GraphViolation::DanglingAttach { edge: *id, vertex: *v });
                }
            }
        }
        let mut seen: BTreeMap<VertexId, &SourceLabel> = BTreeMap::new();
        for (s, v) in &self.sources {
            if !self.vertices.contains(v) {
                return Some(GraphViolation::SourceNotAVertex { label: s.clone(), vertex: *v });
            }
            if let Some(prev) = seen.insert(*v, s) {
                return Some(GraphViolation::SourceNotInjective {
                    first: prev.clone(),
                    second: s.clone(),
                });
            }
        }
        None
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn sources(&self) -> impl Iterator<Item = (&SourceLabel, VertexId)> {
        self.sources.iter().map(|(s, v)| (s, *v))
    }

    pub fn source(&self, s: &SourceLabel) -> Option<VertexId> {
        self.sources.get(s).copied()
    }

    /// Label of `v` if it is a source.
    pub fn source_label_of(&self, v: VertexId) -> Option<&SourceLabel> {
        self.sources.iter().find(|(_, w)| **w == v).map(|(s, _)| s)
    }

    pub fn sort(&self) -> SortSet {
        self.sources.keys().cloned().collect()
    }

    /// Edge labels occurring in the graph, deduplicated.
    pub fn alphabet(&self) -> BTreeSet<EdgeLabel> {
        self.edges.values().map(|e| e.label.clone()).collect()
    }

    /// Renumber vertices to `0..n` and edges to `n..n+m`, preserving the
    /// relative order of ids. Every constructor funnels through this, which
    /// keeps results deterministic and the two id ranges disjoint.
    pub(crate) fn compact(&self) -> Graph {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut next = 0u32;
        for v in &self.vertices {
            map.insert(*v, next);
            next += 1;
        }
        let mut edges = BTreeMap::new();
        for (id, e) in &self.edges {
            map.insert(*id, next);
            edges.insert(
                next,
                Edge {
                    label: e.label.clone(),
                    attach: e.attach.iter().map(|v| map[v]).collect(),
                },
            );
            next += 1;
        }
        Graph {
            vertices: (0..self.vertices.len() as u32).collect(),
            edges,
            sources: self.sources.iter().map(|(s, v)| (s.clone(), map[v])).collect(),
        }
    }

    /// Adjacency over vertices: `u` and `v` are adjacent iff some edge
    /// attaches both. Every attachment set forms a clique.
    pub fn primal_adjacency(&self) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> =
            self.vertices.iter().map(|v| (*v, BTreeSet::new())).collect();
        for e in self.edges.values() {
            for (i, u) in e.attach.iter().enumerate() {
                for v in &e.attach[i + 1..] {
                    if u != v {
                        adj.get_mut(u).unwrap().insert(*v);
                        adj.get_mut(v).unwrap().insert(*u);
                    }
                }
            }
        }
        adj
    }
}

/// Incremental construction with fresh ids; used by the file parser, the
/// algebra operations and tests.
#[derive(Default)]
pub struct GraphBuilder {
    next: u32,
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
    sources: BTreeMap<SourceLabel, VertexId>,
}

impl GraphBuilder {
    pub fn new() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = self.next;
        self.next += 1;
        self.vertices.insert(id);
        id
    }

    pub fn add_edge(&mut self, label: EdgeLabel, attach: Vec<VertexId>) -> EdgeId {
        let id = self.next;
        self.next += 1;
        self.edges.insert(id, Edge { label, attach });
        id
    }

    pub fn set_source(&mut self, label: SourceLabel, v: VertexId) {
        self.sources.insert(label, v);
    }

    pub fn finish(self) -> Result<Graph> {
        Ok(Graph::new(self.vertices, self.edges, self.sources)?.compact())
    }
}

/// Per-vertex invariant used to prune the isomorphism search: the source
/// label (if any) plus the multiset of (edge label, position) incidences,
/// refined by one round of neighborhood hashing.
fn vertex_signatures(g: &Graph) -> BTreeMap<VertexId, u64> {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};

    let mut sig: BTreeMap<VertexId, Vec<(String, usize)>> =
        g.vertices().map(|v| (v, Vec::new())).collect();
    for (_, e) in g.edges() {
        for (pos, v) in e.attach.iter().enumerate() {
            sig.get_mut(v).unwrap().push((e.label.name().to_string(), pos));
        }
    }
    let mut hashed: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (v, mut incidences) in sig {
        incidences.sort();
        let mut h = DefaultHasher::new();
        incidences.hash(&mut h);
        g.source_label_of(v).map(|s| s.name().to_string()).hash(&mut h);
        hashed.insert(v, h.finish());
    }
    // one refinement round over the primal adjacency
    let adj = g.primal_adjacency();
    let mut refined = BTreeMap::new();
    for (v, h0) in &hashed {
        let mut neigh: Vec<u64> = adj[v].iter().map(|u| hashed[u]).collect();
        neigh.sort_unstable();
        let mut h = DefaultHasher::new();
        h0.hash(&mut h);
        neigh.hash(&mut h);
        refined.insert(*v, h.finish());
    }
    refined
}

/// A cheap isomorphism-invariant key; equal keys are necessary (not
/// sufficient) for isomorphism. Used to bucket graphs before pairwise tests.
pub fn iso_key(g: &Graph) -> u64 {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut sigs: Vec<u64> = vertex_signatures(g).values().copied().collect();
    sigs.sort_unstable();
    let mut labels: Vec<&str> = g.edges.values().map(|e| e.label.name()).collect();
    labels.sort_unstable();
    let mut h = DefaultHasher::new();
    g.vertex_count().hash(&mut h);
    g.edge_count().hash(&mut h);
    sigs.hash(&mut h);
    labels.hash(&mut h);
    for s in g.sources.keys() {
        s.name().hash(&mut h);
    }
    h.finish()
}

/// Isomorphism of graphs-with-sources under the default vertex bound.
///
/// True iff some vertex-and-edge bijection preserves edge labels, attachment
/// order, and maps the s-source of `g1` to the s-source of `g2` for every s.
pub fn is_isomorphic(g1: &Graph, g2: &Graph) -> Result<bool> {
    is_isomorphic_bounded(g1, g2, DEFAULT_ISO_VERTEX_BOUND)
}

pub fn is_isomorphic_bounded(g1: &Graph, g2: &Graph, max_vertices: usize) -> Result<bool> {
    if g1.vertex_count() > max_vertices || g2.vertex_count() > max_vertices {
        return Err(Error::ResourceLimit(format!(
            "isomorphism check limited to {max_vertices} vertices"
        )));
    }
    if g1.vertex_count() != g2.vertex_count()
        || g1.edge_count() != g2.edge_count()
        || g1.sort() != g2.sort()
    {
        return Ok(false);
    }
    let mut labels1: Vec<(&str, usize)> =
        g1.edges.values().map(|e| (e.label.name(), e.label.arity())).collect();
    let mut labels2: Vec<(&str, usize)> =
        g2.edges.values().map(|e| (e.label.name(), e.label.arity())).collect();
    labels1.sort_unstable();
    labels2.sort_unstable();
    if labels1 != labels2 {
        return Ok(false);
    }

    let sig1 = vertex_signatures(g1);
    let sig2 = vertex_signatures(g2);
    let mut count1: BTreeMap<u64, usize> = BTreeMap::new();
    let mut count2: BTreeMap<u64, usize> = BTreeMap::new();
    for h in sig1.values() {
        *count1.entry(*h).or_default() += 1;
    }
    for h in sig2.values() {
        *count2.entry(*h).or_default() += 1;
    }
    if count1 != count2 {
        return Ok(false);
    }

    // Pre-assign sources: an isomorphism has no choice on them.
    let mut mapping: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    for (s, v1) in g1.sources() {
        let v2 = g2.source(s).expect("sorts already compared");
        if sig1[&v1] != sig2[&v2] {
            return Ok(false);
        }
        if let Some(prev) = mapping.insert(v1, v2) {
            if prev != v2 {
                return Ok(false);
            }
        }
        used.insert(v2);
    }

    let unassigned: Vec<VertexId> =
        g1.vertices().filter(|v| !mapping.contains_key(v)).collect();
    let found = assign(g1, g2, &sig1, &sig2, &unassigned, 0, &mut mapping, &mut used);
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn assign(
    g1: &Graph,
    g2: &Graph,
    sig1: &BTreeMap<VertexId, u64>,
    sig2: &BTreeMap<VertexId, u64>,
    order: &[VertexId],
    depth: usize,
    mapping: &mut BTreeMap<VertexId, VertexId>,
    used: &mut BTreeSet<VertexId>,
) -> bool {
    if depth == order.len() {
        return edges_match(g1, g2, mapping);
    }
    let v1 = order[depth];
    let candidates: Vec<VertexId> = g2
        .vertices()
        .filter(|v2| !used.contains(v2) && sig2[v2] == sig1[&v1])
        .collect();
    for v2 in candidates {
        mapping.insert(v1, v2);
        used.insert(v2);
        if assign(g1, g2, sig1, sig2, order, depth + 1, mapping, used) {
            return true;
        }
        mapping.remove(&v1);
        used.remove(&v2);
    }
    false
}

fn edges_match(g1: &Graph, g2: &Graph, mapping: &BTreeMap<VertexId, VertexId>) -> bool {
    let mut need: BTreeMap<(String, Vec<VertexId>), isize> = BTreeMap::new();
    for e in g1.edges.values() {
        let attach: Vec<VertexId> = e.attach.iter().map(|v| mapping[v]).collect();
        *need.entry((e.label.name().to_string(), attach)).or_default() += 1;
    }
    for e in g2.edges.values() {
        let entry = need.entry((e.label.name().to_string(), e.attach.clone())).or_default();
        *entry -= 1;
        if *entry < 0 {
            return false;
        }
    }
    need.values().all(|n| *n == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{const_edge, const_empty, parallel, restrict};

    fn lbl(name: &str, arity: usize) -> EdgeLabel {
        EdgeLabel::new(name, arity).unwrap()
    }

    fn src(name: &str) -> SourceLabel {
        SourceLabel::new(name).unwrap()
    }

    #[test]
    fn minimal_graph_is_valid() {
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        b.set_source(src("s1"), v);
        let g = b.finish().unwrap();
        assert!(g.validate().is_none());
        assert_eq!(g.vertex_count(), 1);
    }

    #[test]
    fn non_injective_sources_rejected() {
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        b.set_source(src("s1"), v);
        b.set_source(src("s2"), v);
        let err = b.finish().unwrap_err();
        assert!(err.to_string().contains("src not injective"), "{err}");
    }

    #[test]
    fn arity_mismatch_rejected() {
        let mut b = GraphBuilder::new();
        let v1 = b.add_vertex();
        let v2 = b.add_vertex();
        let v3 = b.add_vertex();
        b.add_edge(lbl("a", 2), vec![v1, v2, v3]);
        let err = b.finish().unwrap_err();
        assert!(err.to_string().contains("arity mismatch"), "{err}");
    }

    #[test]
    fn iso_invariant_under_relabeling() {
        let mut b1 = GraphBuilder::new();
        let v1 = b1.add_vertex();
        let v2 = b1.add_vertex();
        b1.add_edge(lbl("a", 2), vec![v1, v2]);
        b1.set_source(src("s1"), v1);
        let g1 = b1.finish().unwrap();

        // same graph, built in the opposite vertex order
        let mut b2 = GraphBuilder::new();
        let w2 = b2.add_vertex();
        let w1 = b2.add_vertex();
        b2.add_edge(lbl("a", 2), vec![w1, w2]);
        b2.set_source(src("s1"), w1);
        let g2 = b2.finish().unwrap();

        assert!(is_isomorphic(&g1, &g2).unwrap());
    }

    #[test]
    fn source_order_matters() {
        let a = lbl("a", 2);
        let g1 = const_edge(&a, &[src("s1"), src("s2")]).unwrap();
        let g2 = const_edge(&a, &[src("s2"), src("s1")]).unwrap();
        assert!(!is_isomorphic(&g1, &g2).unwrap());
        assert!(is_isomorphic(&g1, &g1.clone()).unwrap());
    }

    #[test]
    fn triangle_is_not_a_path() {
        let a = lbl("a", 2);
        let s = |n| src(n);
        let tri = restrict(
            &SortSet::empty(),
            &parallel(
                &parallel(
                    &const_edge(&a, &[s("s1"), s("s2")]).unwrap(),
                    &const_edge(&a, &[s("s2"), s("s3")]).unwrap(),
                ),
                &const_edge(&a, &[s("s3"), s("s1")]).unwrap(),
            ),
        );
        let path = restrict(
            &SortSet::empty(),
            &parallel(
                &parallel(
                    &const_edge(&a, &[s("s1"), s("s2")]).unwrap(),
                    &const_edge(&a, &[s("s2"), s("s3")]).unwrap(),
                ),
                &const_edge(&a, &[s("s3"), s("s4")]).unwrap(),
            ),
        );
        // same counts only when the path has a repeated edge; compare the triangle
        // against a 3-edge path on 4 vertices: vertex counts differ, so extend the
        // triangle with an isolated vertex to equalize them.
        let tri4 = parallel(&tri, &restrict(&SortSet::empty(), &const_empty(&SortSet::from_iter([s("s9")]))));
        assert_eq!(tri4.vertex_count(), path.vertex_count());
        assert_eq!(tri4.edge_count(), path.edge_count());
        assert!(!is_isomorphic(&tri4, &path).unwrap());
    }

    #[test]
    fn vertex_bound_enforced() {
        let g = const_empty(&SortSet::from_iter([src("s1")]));
        assert!(matches!(
            is_isomorphic_bounded(&g, &g, 0),
            Err(Error::ResourceLimit(_))
        ));
    }
}
