//! Tree decompositions: validation, width, exact treewidth by dynamic
//! programming over vertex subsets, the min-fill heuristic, rotation, bag
//! coloring and the decomposition-to-parse-tree construction.

use crate::algebra::SortSet;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::labels::SourceLabel;
use crate::tree::{ParseLabel, ParseTree, Tree};
use crate::{Error, Limits, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type NodeId = u32;

/// A rooted tree of bags over a graph's vertices. The root is the unique
/// node without a parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: BTreeMap<NodeId, BTreeSet<VertexId>>,
    parent: BTreeMap<NodeId, NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecompositionViolation {
    UnknownVertexInBag { node: NodeId, vertex: VertexId },
    EdgeNotCovered(EdgeId),
    VertexNotCovered(VertexId),
    OccurrenceDisconnected(VertexId),
    RootMissesSource(SourceLabel),
}

impl fmt::Display for DecompositionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionViolation::UnknownVertexInBag { node, vertex } => {
                write!(f, "bag of node {node} contains unknown vertex {vertex}")
            }
            DecompositionViolation::EdgeNotCovered(e) => {
                write!(f, "no bag contains all vertices attached to edge {e}")
            }
            DecompositionViolation::VertexNotCovered(v) => {
                write!(f, "vertex {v} appears in no bag")
            }
            DecompositionViolation::OccurrenceDisconnected(v) => {
                write!(f, "the bags containing vertex {v} are not connected")
            }
            DecompositionViolation::RootMissesSource(s) => {
                write!(f, "the root bag misses the {s}-source")
            }
        }
    }
}

impl From<DecompositionViolation> for Error {
    fn from(v: DecompositionViolation) -> Error {
        Error::InvalidDecomposition(v.to_string())
    }
}

impl TreeDecomposition {
    /// Builds a decomposition and checks the tree shape: a nonempty node
    /// set, exactly one root, and all parent chains reaching it.
    pub fn new(
        bags: BTreeMap<NodeId, BTreeSet<VertexId>>,
        parent: BTreeMap<NodeId, NodeId>,
    ) -> Result<TreeDecomposition> {
        if bags.is_empty() {
            return Err(Error::InvalidDecomposition("empty node set".into()));
        }
        for (child, p) in &parent {
            if !bags.contains_key(child) || !bags.contains_key(p) {
                return Err(Error::InvalidDecomposition(format!(
                    "parent pair ({p}, {child}) mentions an unknown node"
                )));
            }
        }
        let roots: Vec<NodeId> = bags.keys().filter(|n| !parent.contains_key(n)).copied().collect();
        if roots.len() != 1 {
            return Err(Error::InvalidDecomposition(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        // every node must reach the root without revisiting
        for start in bags.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = *start;
            while cur != root {
                if !seen.insert(cur) {
                    return Err(Error::InvalidDecomposition("parent cycle".into()));
                }
                cur = parent[&cur];
            }
        }
        Ok(TreeDecomposition { bags, parent })
    }

    pub fn singleton(bag: BTreeSet<VertexId>) -> TreeDecomposition {
        TreeDecomposition {
            bags: BTreeMap::from([(0, bag)]),
            parent: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bags.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    pub fn bag(&self, n: NodeId) -> Option<&BTreeSet<VertexId>> {
        self.bags.get(&n)
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent.get(&n).copied()
    }

    /// (child, parent) pairs.
    pub fn parent_pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parent.iter().map(|(c, p)| (*c, *p))
    }

    pub fn root(&self) -> NodeId {
        self.nodes()
            .find(|n| !self.parent.contains_key(n))
            .expect("validated at construction")
    }

    pub fn children(&self, n: NodeId) -> Vec<NodeId> {
        self.parent
            .iter()
            .filter(|(_, p)| **p == n)
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn depths(&self) -> BTreeMap<NodeId, usize> {
        let mut depths = BTreeMap::from([(self.root(), 0usize)]);
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            let d = depths[&n];
            for c in self.children(n) {
                depths.insert(c, d + 1);
                stack.push(c);
            }
        }
        depths
    }

    /// Max bag size minus one; -1 when all bags are empty.
    pub fn width(&self) -> i64 {
        self.bags.values().map(|b| b.len() as i64).max().unwrap_or(0) - 1
    }

    /// Verifies the three decomposition conditions against `g`: every edge
    /// covered by some bag, every vertex's occurrence set nonempty and
    /// connected, and the root bag containing all sources. Reports the
    /// first failure.
    pub fn check(&self, g: &Graph) -> std::result::Result<(), DecompositionViolation> {
        for (n, bag) in &self.bags {
            for v in bag {
                if !g.contains_vertex(*v) {
                    return Err(DecompositionViolation::UnknownVertexInBag {
                        node: *n,
                        vertex: *v,
                    });
                }
            }
        }
        for (id, e) in g.edges() {
            let covered = self
                .bags
                .values()
                .any(|bag| e.attach.iter().all(|v| bag.contains(v)));
            if !covered {
                return Err(DecompositionViolation::EdgeNotCovered(id));
            }
        }
        for v in g.vertices() {
            let occ: BTreeSet<NodeId> = self
                .bags
                .iter()
                .filter(|(_, bag)| bag.contains(&v))
                .map(|(n, _)| *n)
                .collect();
            if occ.is_empty() {
                return Err(DecompositionViolation::VertexNotCovered(v));
            }
            if !self.connected_within(&occ) {
                return Err(DecompositionViolation::OccurrenceDisconnected(v));
            }
        }
        let root_bag = &self.bags[&self.root()];
        for (s, v) in g.sources() {
            if !root_bag.contains(&v) {
                return Err(DecompositionViolation::RootMissesSource(s.clone()));
            }
        }
        Ok(())
    }

    fn connected_within(&self, nodes: &BTreeSet<NodeId>) -> bool {
        let start = match nodes.first() {
            Some(n) => *n,
            None => return true,
        };
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> =
            nodes.iter().map(|n| (*n, Vec::new())).collect();
        for (c, p) in self.parent_pairs() {
            if nodes.contains(&c) && nodes.contains(&p) {
                adj.get_mut(&c).unwrap().push(p);
                adj.get_mut(&p).unwrap().push(c);
            }
        }
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for m in &adj[&n] {
                if seen.insert(*m) {
                    stack.push(*m);
                }
            }
        }
        seen.len() == nodes.len()
    }

    /// Reverses the parent pointers along the path from the old root to
    /// `new_root`; bags are unchanged. The result is a valid decomposition
    /// of the same graph whenever the new root's bag covers all sources.
    pub fn rotate(&self, new_root: NodeId) -> Result<TreeDecomposition> {
        if !self.bags.contains_key(&new_root) {
            return Err(Error::InvalidDecomposition(format!(
                "unknown node {new_root}"
            )));
        }
        let mut path = vec![new_root];
        let mut cur = new_root;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        let mut parent = self.parent.clone();
        parent.remove(&new_root);
        for pair in path.windows(2) {
            parent.insert(pair[1], pair[0]);
        }
        TreeDecomposition::new(self.bags.clone(), parent)
    }
}

/// Vertex adjacency on which elimination runs: the primal adjacency of the
/// graph, with every edge attachment set and the source set made cliques.
/// A bag containing all sources then always exists, so condition (3) can be
/// met by rotation, and hyperedges are covered by condition (1).
fn elimination_adjacency(g: &Graph) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
    let mut adj = g.primal_adjacency();
    let sources: Vec<VertexId> = g.sources().map(|(_, v)| v).collect();
    for (i, u) in sources.iter().enumerate() {
        for v in &sources[i + 1..] {
            adj.get_mut(u).unwrap().insert(*v);
            adj.get_mut(v).unwrap().insert(*u);
        }
    }
    adj
}

/// Builds the decomposition induced by an elimination order: eliminating a
/// vertex connects its remaining neighbors; its bag is itself plus those
/// neighbors, attached below the bag of the earliest-eliminated of them.
fn decomposition_from_elimination(
    mut adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    order: &[VertexId],
) -> TreeDecomposition {
    let position: BTreeMap<VertexId, usize> =
        order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut bags: BTreeMap<NodeId, BTreeSet<VertexId>> = BTreeMap::new();
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (i, v) in order.iter().enumerate() {
        let neighbors: Vec<VertexId> = adj[v].iter().copied().collect();
        let mut bag: BTreeSet<VertexId> = neighbors.iter().copied().collect();
        bag.insert(*v);
        bags.insert(i as NodeId, bag);
        if let Some(first) = neighbors.iter().min_by_key(|u| position[u]) {
            parent.insert(i as NodeId, position[first] as NodeId);
        } else if i + 1 < order.len() {
            parent.insert(i as NodeId, (i + 1) as NodeId);
        }
        for (j, u) in neighbors.iter().enumerate() {
            for w in &neighbors[j + 1..] {
                adj.get_mut(u).unwrap().insert(*w);
                adj.get_mut(w).unwrap().insert(*u);
            }
        }
        for u in &neighbors {
            adj.get_mut(u).unwrap().remove(v);
        }
        adj.remove(v);
    }
    TreeDecomposition::new(bags, parent).expect("elimination yields a tree")
}

/// Rotates the decomposition so that some bag containing every source
/// becomes the root; such a bag exists for decompositions built over
/// [`elimination_adjacency`].
fn rotate_to_sources(g: &Graph, d: TreeDecomposition) -> Result<TreeDecomposition> {
    let sources: BTreeSet<VertexId> = g.sources().map(|(_, v)| v).collect();
    if sources.is_empty() {
        return Ok(d);
    }
    let target = d
        .nodes()
        .find(|n| sources.is_subset(d.bag(*n).unwrap()))
        .ok_or_else(|| {
            Error::InvalidDecomposition("no bag contains all sources".into())
        })?;
    d.rotate(target)
}

/// Exact treewidth with a witnessing decomposition, under the default
/// vertex bound.
///
/// Dynamic programming over vertex subsets: the cost of eliminating the set
/// S last-vertex-first is `min over v in S of max(cost(S \ v), |Q(S \ v, v)|)`
/// where Q counts the vertices outside S reachable from v through S. The
/// optimal elimination order is recovered from the table and turned into a
/// decomposition whose root bag covers all sources.
pub fn treewidth_exact(g: &Graph) -> Result<(i64, TreeDecomposition)> {
    treewidth_exact_bounded(g, Limits::default().tw_vertex_bound)
}

pub fn treewidth_exact_bounded(g: &Graph, max_vertices: usize) -> Result<(i64, TreeDecomposition)> {
    if let Some(v) = g.validate() {
        return Err(v.into());
    }
    let n = g.vertex_count();
    if n > max_vertices.min(24) {
        return Err(Error::ResourceLimit(format!(
            "exact treewidth limited to {} vertices",
            max_vertices.min(24)
        )));
    }
    if n == 0 {
        return Ok((-1, TreeDecomposition::singleton(BTreeSet::new())));
    }
    let verts: Vec<VertexId> = g.vertices().collect();
    let index: BTreeMap<VertexId, usize> =
        verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let adj_sets = elimination_adjacency(g);
    let adj: Vec<u32> = verts
        .iter()
        .map(|v| {
            adj_sets[v]
                .iter()
                .fold(0u32, |mask, u| mask | 1 << index[u])
        })
        .collect();

    // q(mask, v): neighbors outside mask reachable from v through mask
    let q = |mask: u32, v: usize| -> u32 {
        let mut visited: u32 = 1 << v;
        let mut stack = vec![v];
        let mut out: u32 = 0;
        while let Some(u) = stack.pop() {
            let mut ns = adj[u] & !visited;
            out |= ns & !mask;
            ns &= mask;
            visited |= ns;
            while ns != 0 {
                let w = ns.trailing_zeros() as usize;
                ns &= ns - 1;
                stack.push(w);
            }
        }
        (out & !(1 << v)).count_ones()
    };

    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let mut table: Vec<i32> = vec![0; (full as usize) + 1];
    table[0] = -1;
    for mask in 1..=full {
        let mut best = i32::MAX;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = mask & !(1 << v);
            let cost = table[rest as usize].max(q(rest, v) as i32);
            best = best.min(cost);
        }
        table[mask as usize] = best;
    }
    let width = table[full as usize] as i64;

    // recover an optimal elimination order, last vertex first
    let mut reversed: Vec<usize> = Vec::with_capacity(n);
    let mut mask = full;
    while mask != 0 {
        let mut bits = mask;
        let mut chosen = None;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = mask & !(1 << v);
            let cost = table[rest as usize].max(q(rest, v) as i32);
            if cost == table[mask as usize] {
                chosen = Some(v);
                break;
            }
        }
        let v = chosen.expect("the table minimum is attained");
        reversed.push(v);
        mask &= !(1 << v);
    }
    let order: Vec<VertexId> = reversed.iter().rev().map(|i| verts[*i]).collect();

    let d = decomposition_from_elimination(adj_sets, &order);
    debug_assert_eq!(d.width(), width);
    let d = rotate_to_sources(g, d)?;
    Ok((width, d))
}

/// A valid decomposition from the min-fill elimination heuristic: repeatedly
/// eliminate the vertex whose neighborhood needs the fewest fill edges, ties
/// broken by vertex id. Deterministic; width at least the treewidth.
pub fn decompose_minfill(g: &Graph) -> Result<TreeDecomposition> {
    if let Some(v) = g.validate() {
        return Err(v.into());
    }
    if g.vertex_count() == 0 {
        return Ok(TreeDecomposition::singleton(BTreeSet::new()));
    }
    let adj0 = elimination_adjacency(g);
    let mut adj = adj0.clone();
    let mut order: Vec<VertexId> = Vec::new();
    while !adj.is_empty() {
        let (v, _) = adj
            .iter()
            .map(|(v, ns)| {
                let ns: Vec<VertexId> = ns.iter().copied().collect();
                let mut fill = 0usize;
                for (i, a) in ns.iter().enumerate() {
                    for b in &ns[i + 1..] {
                        if !adj[a].contains(b) {
                            fill += 1;
                        }
                    }
                }
                (*v, fill)
            })
            .min_by_key(|(v, fill)| (*fill, *v))
            .unwrap();
        order.push(v);
        let neighbors: Vec<VertexId> = adj[&v].iter().copied().collect();
        for (i, a) in neighbors.iter().enumerate() {
            for b in &neighbors[i + 1..] {
                adj.get_mut(a).unwrap().insert(*b);
                adj.get_mut(b).unwrap().insert(*a);
            }
        }
        for u in &neighbors {
            adj.get_mut(u).unwrap().remove(&v);
        }
        adj.remove(&v);
    }
    let d = decomposition_from_elimination(adj0, &order);
    rotate_to_sources(g, d)
}

/// A per-vertex assignment of source labels such that each bag sees
/// pairwise-distinct colors and every source carries its own label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    map: BTreeMap<VertexId, SourceLabel>,
}

impl Coloring {
    pub fn color(&self, v: VertexId) -> Option<&SourceLabel> {
        self.map.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &SourceLabel)> {
        self.map.iter().map(|(v, s)| (*v, s))
    }

    pub fn from_map(map: BTreeMap<VertexId, SourceLabel>) -> Coloring {
        Coloring { map }
    }

    /// Checks the three coloring invariants against a graph, decomposition
    /// and label budget.
    pub fn validate(&self, g: &Graph, d: &TreeDecomposition, sort: &SortSet) -> Result<()> {
        for v in g.vertices() {
            match self.map.get(&v) {
                None => {
                    return Err(Error::InvalidColoring(format!(
                        "vertex {v} carries no color"
                    )))
                }
                Some(c) if !sort.contains(c) => {
                    return Err(Error::InvalidColoring(format!(
                        "vertex {v} is colored {c}, outside the label budget {sort}"
                    )))
                }
                _ => {}
            }
        }
        for n in d.nodes() {
            let bag = d.bag(n).unwrap();
            let mut seen: BTreeMap<&SourceLabel, VertexId> = BTreeMap::new();
            for v in bag {
                if let Some(c) = self.map.get(v) {
                    if let Some(u) = seen.insert(c, *v) {
                        return Err(Error::InvalidColoring(format!(
                            "vertices {u} and {v} in the bag of node {n} share color {c}"
                        )));
                    }
                }
            }
        }
        for (s, v) in g.sources() {
            if self.map.get(&v) != Some(s) {
                return Err(Error::InvalidColoring(format!(
                    "the {s}-source must be colored {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Colors the vertices top-down: sources take their own labels at the root,
/// every other vertex takes the smallest label of `sort` unused in the bag
/// where it first appears. Requires the width to fit the label budget and
/// the graph's sort to lie inside it.
pub fn color_decomposition(
    g: &Graph,
    d: &TreeDecomposition,
    sort: &SortSet,
) -> Result<Coloring> {
    d.check(g)?;
    if d.width() + 1 > sort.len() as i64 {
        return Err(Error::SortMismatch(format!(
            "width {} needs at least {} labels, the budget {sort} has {}",
            d.width(),
            d.width() + 1,
            sort.len()
        )));
    }
    if !g.sort().is_subset(sort) {
        return Err(Error::SortMismatch(format!(
            "graph sort {} is not contained in the label budget {sort}",
            g.sort()
        )));
    }
    let mut map: BTreeMap<VertexId, SourceLabel> = BTreeMap::new();
    // the root bag contains every source; color those first
    for (s, v) in g.sources() {
        map.insert(v, s.clone());
    }
    let mut queue = vec![d.root()];
    let mut visit_order = Vec::new();
    while let Some(n) = queue.pop() {
        visit_order.push(n);
        let mut cs = d.children(n);
        cs.sort();
        queue.extend(cs);
    }
    for n in visit_order {
        let bag = d.bag(n).unwrap();
        let used: BTreeSet<SourceLabel> =
            bag.iter().filter_map(|v| map.get(v).cloned()).collect();
        let mut free = sort.iter().filter(|s| !used.contains(*s));
        for v in bag {
            if !map.contains_key(v) {
                let label = free.next().expect("the budget covers the bag").clone();
                map.insert(*v, label);
            }
        }
    }
    let coloring = Coloring { map };
    coloring.validate(g, d, sort)?;
    Ok(coloring)
}

/// The unique node closest to the root whose bag contains all vertices
/// attached to the edge.
fn home_node(d: &TreeDecomposition, depths: &BTreeMap<NodeId, usize>, attach: &[VertexId]) -> NodeId {
    d.nodes()
        .filter(|n| attach.iter().all(|v| d.bag(*n).unwrap().contains(v)))
        .min_by_key(|n| (depths[n], *n))
        .expect("checked: every edge is covered by some bag")
}

/// Builds, bottom-up over the decomposition, the parse tree whose node n
/// contributes a sources-only constant for the colors of its bag and one
/// single-edge constant for each edge homed at n, with a restriction edge
/// to each child keeping exactly the colors shared between the two bags.
/// A final restriction to the graph's own sort makes the evaluation
/// reproduce the graph exactly. Rename symbols are never emitted.
pub fn decomposition_to_parse_tree(
    g: &Graph,
    d: &TreeDecomposition,
    coloring: &Coloring,
    sort: &SortSet,
) -> Result<ParseTree> {
    d.check(g)?;
    coloring.validate(g, d, sort)?;
    let depths = d.depths();
    let mut homed: BTreeMap<NodeId, Vec<EdgeId>> = BTreeMap::new();
    for (id, e) in g.edges() {
        homed
            .entry(home_node(d, &depths, &e.attach))
            .or_default()
            .push(id);
    }

    fn colors_of(coloring: &Coloring, vs: impl IntoIterator<Item = VertexId>) -> SortSet {
        SortSet::from_iter(
            vs.into_iter()
                .map(|v| coloring.color(v).expect("validated: total").clone()),
        )
    }

    fn build(
        g: &Graph,
        d: &TreeDecomposition,
        coloring: &Coloring,
        homed: &BTreeMap<NodeId, Vec<EdgeId>>,
        n: NodeId,
    ) -> Result<Tree> {
        let bag = d.bag(n).unwrap();
        let mut tree = Tree::leaf(
            &ParseLabel::EmptyU(colors_of(coloring, bag.iter().copied())).to_edge_label(),
        )?;
        if let Some(edges) = homed.get(&n) {
            for id in edges {
                let e = g.edge(*id).unwrap();
                let colored: Vec<SourceLabel> = e
                    .attach
                    .iter()
                    .map(|v| coloring.color(*v).expect("validated: total").clone())
                    .collect();
                let leaf = Tree::leaf(
                    &ParseLabel::EdgeU(e.label.clone(), colored).to_edge_label(),
                )?;
                tree = tree.compose(&leaf);
            }
        }
        let mut children = d.children(n);
        children.sort();
        for c in children {
            let shared = colors_of(
                coloring,
                bag.intersection(d.bag(c).unwrap()).copied(),
            );
            let sub = build(g, d, coloring, homed, c)?;
            let appended = Tree::append(&ParseLabel::RestrictB(shared).to_edge_label(), &sub)?;
            tree = tree.compose(&appended);
        }
        Ok(tree)
    }

    let body = build(g, d, coloring, &homed, d.root())?;
    let wrapped = Tree::append(&ParseLabel::RestrictB(g.sort()).to_edge_label(), &body)?;
    ParseTree::new(wrapped, sort.union(&g.sort()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{const_edge, const_empty, parallel, restrict};
    use crate::graph::is_isomorphic;
    use crate::labels::EdgeLabel;

    fn s(name: &str) -> SourceLabel {
        SourceLabel::new(name).unwrap()
    }

    fn lbl(name: &str, arity: usize) -> EdgeLabel {
        EdgeLabel::new(name, arity).unwrap()
    }

    /// v1 -a- v2 -a- v3 as a sourceless path.
    fn path2() -> Graph {
        let a = lbl("a", 2);
        restrict(
            &SortSet::empty(),
            &parallel(
                &const_edge(&a, &[s("s1"), s("s2")]).unwrap(),
                &const_edge(&a, &[s("s2"), s("s3")]).unwrap(),
            ),
        )
    }

    fn td(bags: &[(u32, &[u32])], parents: &[(u32, u32)]) -> TreeDecomposition {
        TreeDecomposition::new(
            bags.iter()
                .map(|(n, vs)| (*n, vs.iter().copied().collect()))
                .collect(),
            parents.iter().copied().collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_bag_decomposition_checks() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap();
        let d = td(&[(0, &[0, 1])], &[]);
        assert!(d.check(&g).is_ok());
        assert_eq!(d.width(), 1);
    }

    #[test]
    fn path_decomposition_checks() {
        let g = path2();
        let d = td(&[(0, &[0, 1]), (1, &[1, 2])], &[(1, 0)]);
        assert!(d.check(&g).is_ok());

        let bad = td(&[(0, &[0, 1]), (1, &[2])], &[(1, 0)]);
        assert!(matches!(
            bad.check(&g),
            Err(DecompositionViolation::EdgeNotCovered(_))
        ));
    }

    #[test]
    fn width_cases() {
        assert_eq!(td(&[(0, &[0, 1])], &[]).width(), 1);
        let g3 = td(
            &[(0, &[0, 1]), (1, &[0, 1, 2]), (2, &[1, 2])],
            &[(1, 0), (2, 1)],
        );
        assert_eq!(g3.width(), 2);
        assert_eq!(td(&[(0, &[])], &[]).width(), -1);
        assert!(TreeDecomposition::new(BTreeMap::new(), BTreeMap::new()).is_err());
    }

    #[test]
    fn treewidth_small_cases() {
        let one = const_empty(&SortSet::singleton(s("s1")));
        let (w, d) = treewidth_exact(&one).unwrap();
        assert_eq!(w, 0);
        assert!(d.check(&one).is_ok());

        let a = lbl("a", 2);
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
        let (w, d) = treewidth_exact(&tri).unwrap();
        assert_eq!(w, 2);
        assert!(d.check(&tri).is_ok());
        assert_eq!(d.width(), 2);
    }

    #[test]
    fn treewidth_bound_enforced() {
        let g = path2();
        assert!(matches!(
            treewidth_exact_bounded(&g, 2),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn minfill_on_tree_and_triangle() {
        let g = path2();
        let d = decompose_minfill(&g).unwrap();
        assert!(d.check(&g).is_ok());
        assert_eq!(d.width(), 1);

        let a = lbl("a", 2);
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
        let d = decompose_minfill(&tri).unwrap();
        assert!(d.check(&tri).is_ok());
        assert_eq!(d.width(), 2);
    }

    #[test]
    fn rotation() {
        let d = td(&[(0, &[0, 1]), (1, &[1, 2])], &[(1, 0)]);
        let same = d.rotate(d.root()).unwrap();
        assert_eq!(same, d);
        let flipped = d.rotate(1).unwrap();
        assert_eq!(flipped.root(), 1);
        assert_eq!(flipped.parent(0), Some(1));
        let back = flipped.rotate(0).unwrap();
        assert_eq!(back, d);
        assert!(d.rotate(9).is_err());
    }

    #[test]
    fn coloring_smallest_free() {
        let g = path2();
        let tau = SortSet::from_iter([s("s1"), s("s2")]);
        let d = td(&[(0, &[0, 1]), (1, &[1, 2])], &[(1, 0)]);
        let col = color_decomposition(&g, &d, &tau).unwrap();
        assert_eq!(col.color(0), Some(&s("s1")));
        assert_eq!(col.color(1), Some(&s("s2")));
        assert_eq!(col.color(2), Some(&s("s1")));

        // a single bag of width 1 with one free edge
        let edge = restrict(&SortSet::empty(), &const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap());
        let d1 = td(&[(0, &[0, 1])], &[]);
        let col = color_decomposition(&edge, &d1, &tau).unwrap();
        assert_eq!(col.color(0), Some(&s("s1")));
        assert_eq!(col.color(1), Some(&s("s2")));

        // pigeonhole: width 2 but only two labels
        let d3 = td(&[(0, &[0, 1, 2])], &[]);
        assert!(matches!(
            color_decomposition(&g, &d3, &tau),
            Err(Error::SortMismatch(_))
        ));
    }

    #[test]
    fn parse_tree_roundtrip_single_edge() {
        let g = restrict(&SortSet::empty(), &const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap());
        let tau = SortSet::from_iter([s("s1"), s("s2")]);
        let d = td(&[(0, &[0, 1])], &[]);
        let col = color_decomposition(&g, &d, &tau).unwrap();
        let pt = decomposition_to_parse_tree(&g, &d, &col, &tau).unwrap();
        let back = pt.val().unwrap();
        assert!(is_isomorphic(&back, &g).unwrap());
    }

    #[test]
    fn parse_tree_roundtrip_sourced() {
        let g = const_empty(&SortSet::singleton(s("s1")));
        let d = td(&[(0, &[0])], &[]);
        let tau = SortSet::singleton(s("s1"));
        let col = color_decomposition(&g, &d, &tau).unwrap();
        let pt = decomposition_to_parse_tree(&g, &d, &col, &tau).unwrap();
        let back = pt.val().unwrap();
        assert_eq!(back.sort(), SortSet::singleton(s("s1")));
        assert!(is_isomorphic(&back, &g).unwrap());
    }

    #[test]
    fn parse_tree_roundtrip_path() {
        let g = path2();
        let tau = SortSet::from_iter([s("s1"), s("s2")]);
        let d = td(&[(0, &[0, 1]), (1, &[1, 2])], &[(1, 0)]);
        let col = color_decomposition(&g, &d, &tau).unwrap();
        let pt = decomposition_to_parse_tree(&g, &d, &col, &tau).unwrap();
        let back = pt.val().unwrap();
        assert!(is_isomorphic(&back, &g).unwrap());
    }
}
