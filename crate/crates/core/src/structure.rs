//! Finite relational structures, the incidence encoding of graphs and tree
//! decompositions, and isomorphism of structures.
//!
//! In the incidence encoding both vertices and edges of a graph are universe
//! elements; each edge label a contributes a relation `r_a` of arity
//! #a + 1 relating an edge element to its attached vertices in order, and
//! each source label s contributes a unary relation `r_s` holding exactly
//! the s-source.

use crate::decomposition::TreeDecomposition;
use crate::graph::Graph;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

pub type ElemId = u32;

/// Relation symbols with their arities.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, usize)>>(pairs: I) -> Signature {
        Signature { arities: pairs.into_iter().collect() }
    }

    pub fn declare(&mut self, name: impl Into<String>, arity: usize) {
        self.arities.insert(name.into(), arity);
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.arities.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    sig: Signature,
    universe: BTreeSet<ElemId>,
    interp: BTreeMap<String, BTreeSet<Vec<ElemId>>>,
}

impl Structure {
    pub fn new(
        sig: Signature,
        universe: BTreeSet<ElemId>,
        interp: BTreeMap<String, BTreeSet<Vec<ElemId>>>,
    ) -> Result<Structure> {
        for (rel, tuples) in &interp {
            let arity = sig
                .arity(rel)
                .ok_or_else(|| Error::UnknownRelation(rel.clone()))?;
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::InvalidFormula(format!(
                        "relation `{rel}` has arity {arity}, found a tuple of length {}",
                        t.len()
                    )));
                }
                for e in t {
                    if !universe.contains(e) {
                        return Err(Error::InvalidFormula(format!(
                            "relation `{rel}` mentions element {e} outside the universe"
                        )));
                    }
                }
            }
        }
        let mut interp = interp;
        for (rel, _) in sig.iter() {
            interp.entry(rel.to_string()).or_default();
        }
        Ok(Structure { sig, universe, interp })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn universe(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.universe.iter().copied()
    }

    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }

    pub fn tuples(&self, rel: &str) -> impl Iterator<Item = &Vec<ElemId>> {
        self.interp.get(rel).into_iter().flatten()
    }

    pub fn tuple_count(&self, rel: &str) -> usize {
        self.interp.get(rel).map_or(0, |t| t.len())
    }

    pub fn holds(&self, rel: &str, tuple: &[ElemId]) -> bool {
        self.interp.get(rel).is_some_and(|t| t.contains(tuple))
    }

    /// The same structure over a restricted signature; relations outside the
    /// target signature are dropped.
    pub fn reduct(&self, sig: &Signature) -> Structure {
        let interp = self
            .interp
            .iter()
            .filter(|(rel, _)| sig.contains(rel))
            .map(|(rel, tuples)| (rel.clone(), tuples.clone()))
            .collect();
        Structure { sig: sig.clone(), universe: self.universe.clone(), interp }
    }
}

fn graph_relation(label: &str) -> String {
    format!("r_{label}")
}

/// Signature of the incidence encoding for the labels and sort of `g`.
pub fn graph_signature(g: &Graph) -> Result<Signature> {
    let mut sig = Signature::new();
    for label in g.alphabet() {
        sig.declare(graph_relation(label.name()), label.arity() + 1);
    }
    for s in &g.sort() {
        let rel = graph_relation(s.name());
        if sig.contains(&rel) {
            return Err(Error::InvalidGraph(format!(
                "edge label and source label both named `{}` clash in the encoding",
                s.name()
            )));
        }
        sig.declare(rel, 1);
    }
    Ok(sig)
}

/// The incidence encoding of a graph.
pub fn encode_graph(g: &Graph) -> Result<Structure> {
    if let Some(v) = g.validate() {
        return Err(v.into());
    }
    let sig = graph_signature(g)?;
    let mut universe: BTreeSet<ElemId> = g.vertices().collect();
    universe.extend(g.edges().map(|(id, _)| id));
    let mut interp: BTreeMap<String, BTreeSet<Vec<ElemId>>> = BTreeMap::new();
    for (id, e) in g.edges() {
        let mut tuple = vec![id];
        tuple.extend(&e.attach);
        interp
            .entry(graph_relation(e.label.name()))
            .or_default()
            .insert(tuple);
    }
    for (s, v) in g.sources() {
        interp
            .entry(graph_relation(s.name()))
            .or_default()
            .insert(vec![v]);
    }
    Structure::new(sig, universe, interp)
}

/// Extends the incidence encoding of `g` with the decomposition relations:
/// `node` holds the decomposition nodes, `bag` relates a vertex to each node
/// whose bag contains it, and `parent` holds (parent, child) node pairs.
pub fn encode_decomposition(g: &Graph, d: &TreeDecomposition) -> Result<Structure> {
    d.check(g).map_err(|v| Error::InvalidDecomposition(v.to_string()))?;
    let base = encode_graph(g)?;
    let mut sig = base.sig.clone();
    sig.declare("node", 1);
    sig.declare("bag", 2);
    sig.declare("parent", 2);

    // decomposition nodes get fresh element ids above the graph's
    let offset = base.universe.iter().max().map(|m| m + 1).unwrap_or(0);
    let node_elem: BTreeMap<u32, ElemId> =
        d.nodes().map(|n| (n, n + offset)).collect();

    let mut universe = base.universe.clone();
    universe.extend(node_elem.values());
    let mut interp = base.interp.clone();
    interp.insert(
        "node".into(),
        node_elem.values().map(|e| vec![*e]).collect(),
    );
    let mut bag_tuples = BTreeSet::new();
    for n in d.nodes() {
        for v in d.bag(n).unwrap() {
            bag_tuples.insert(vec![*v, node_elem[&n]]);
        }
    }
    interp.insert("bag".into(), bag_tuples);
    interp.insert(
        "parent".into(),
        d.parent_pairs()
            .map(|(child, parent)| vec![node_elem[&parent], node_elem[&child]])
            .collect(),
    );
    Structure::new(sig, universe, interp)
}

/// Per-element profile: for each relation and argument position, how many
/// tuples contain the element there. Isomorphisms preserve profiles.
fn element_profiles(s: &Structure) -> BTreeMap<ElemId, Vec<(String, usize, usize)>> {
    let mut prof: BTreeMap<ElemId, BTreeMap<(String, usize), usize>> =
        s.universe().map(|e| (e, BTreeMap::new())).collect();
    for (rel, tuples) in &s.interp {
        for t in tuples {
            for (pos, e) in t.iter().enumerate() {
                *prof.get_mut(e).unwrap().entry((rel.clone(), pos)).or_default() += 1;
            }
        }
    }
    prof.into_iter()
        .map(|(e, counts)| {
            (e, counts.into_iter().map(|((r, p), c)| (r, p, c)).collect())
        })
        .collect()
}

/// Isomorphism of structures: a universe bijection carrying each relation
/// onto its counterpart. Backtracking over profile-compatible candidates.
pub fn structures_isomorphic(s1: &Structure, s2: &Structure) -> bool {
    if s1.sig != s2.sig || s1.universe.len() != s2.universe.len() {
        return false;
    }
    for (rel, _) in s1.sig.iter() {
        if s1.tuple_count(rel) != s2.tuple_count(rel) {
            return false;
        }
    }
    let prof1 = element_profiles(s1);
    let prof2 = element_profiles(s2);
    let mut counts1: BTreeMap<&Vec<(String, usize, usize)>, usize> = BTreeMap::new();
    let mut counts2: BTreeMap<&Vec<(String, usize, usize)>, usize> = BTreeMap::new();
    for p in prof1.values() {
        *counts1.entry(p).or_default() += 1;
    }
    for p in prof2.values() {
        *counts2.entry(p).or_default() += 1;
    }
    if counts1 != counts2 {
        return false;
    }

    let order: Vec<ElemId> = s1.universe().collect();
    let mut mapping: BTreeMap<ElemId, ElemId> = BTreeMap::new();
    let mut used: BTreeSet<ElemId> = BTreeSet::new();
    assign(s1, s2, &prof1, &prof2, &order, 0, &mut mapping, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn assign(
    s1: &Structure,
    s2: &Structure,
    prof1: &BTreeMap<ElemId, Vec<(String, usize, usize)>>,
    prof2: &BTreeMap<ElemId, Vec<(String, usize, usize)>>,
    order: &[ElemId],
    depth: usize,
    mapping: &mut BTreeMap<ElemId, ElemId>,
    used: &mut BTreeSet<ElemId>,
) -> bool {
    if depth == order.len() {
        return relations_match(s1, s2, mapping);
    }
    let e1 = order[depth];
    for e2 in s2.universe() {
        if used.contains(&e2) || prof2[&e2] != prof1[&e1] {
            continue;
        }
        mapping.insert(e1, e2);
        used.insert(e2);
        if assign(s1, s2, prof1, prof2, order, depth + 1, mapping, used) {
            return true;
        }
        mapping.remove(&e1);
        used.remove(&e2);
    }
    false
}

fn relations_match(s1: &Structure, s2: &Structure, mapping: &BTreeMap<ElemId, ElemId>) -> bool {
    for (rel, tuples) in &s1.interp {
        for t in tuples {
            let image: Vec<ElemId> = t.iter().map(|e| mapping[e]).collect();
            if !s2.holds(rel, &image) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{const_edge, const_empty, restrict, parallel, SortSet};
    use crate::labels::{EdgeLabel, SourceLabel};

    fn s(name: &str) -> SourceLabel {
        SourceLabel::new(name).unwrap()
    }

    fn lbl(name: &str, arity: usize) -> EdgeLabel {
        EdgeLabel::new(name, arity).unwrap()
    }

    #[test]
    fn encode_sources_only() {
        let g = const_empty(&SortSet::singleton(s("s1")));
        let st = encode_graph(&g).unwrap();
        assert_eq!(st.universe_size(), 1);
        assert_eq!(st.tuple_count("r_s1"), 1);
    }

    #[test]
    fn encode_single_edge() {
        let g = const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap();
        let st = encode_graph(&g).unwrap();
        assert_eq!(st.universe_size(), 3);
        assert_eq!(st.tuple_count("r_a"), 1);
        let t = st.tuples("r_a").next().unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(st.tuples("r_s1").next().unwrap(), &vec![t[1]]);
        assert_eq!(st.tuples("r_s2").next().unwrap(), &vec![t[2]]);
    }

    #[test]
    fn encode_two_unary_edges_no_sources() {
        let c = lbl("c", 1);
        let g = restrict(
            &SortSet::empty(),
            &parallel(
                &const_edge(&c, &[s("s1")]).unwrap(),
                &const_edge(&c, &[s("s2")]).unwrap(),
            ),
        );
        let st = encode_graph(&g).unwrap();
        assert_eq!(st.tuple_count("r_c"), 2);
        assert!(st.signature().iter().all(|(n, _)| n == "r_c"));
    }

    #[test]
    fn encode_decomposition_examples() {
        use crate::decomposition::TreeDecomposition;
        use std::collections::BTreeMap;

        // one edge, one bag: a single node, two bag pairs, no parent pairs
        let g = restrict(&SortSet::empty(), &const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap());
        let d = TreeDecomposition::new(
            BTreeMap::from([(0, g.vertices().collect())]),
            BTreeMap::new(),
        )
        .unwrap();
        let st = encode_decomposition(&g, &d).unwrap();
        assert_eq!(st.tuple_count("node"), 1);
        assert_eq!(st.tuple_count("bag"), 2);
        assert_eq!(st.tuple_count("parent"), 0);

        // two bags along a two-edge path: exactly one parent pair
        let path = restrict(
            &SortSet::empty(),
            &parallel(
                &const_edge(&lbl("a", 2), &[s("s1"), s("s2")]).unwrap(),
                &const_edge(&lbl("a", 2), &[s("s2"), s("s3")]).unwrap(),
            ),
        );
        let d2 = TreeDecomposition::new(
            BTreeMap::from([
                (0, [0u32, 1].into_iter().collect()),
                (1, [1u32, 2].into_iter().collect()),
            ]),
            BTreeMap::from([(1, 0)]),
        )
        .unwrap();
        let st = encode_decomposition(&path, &d2).unwrap();
        assert_eq!(st.tuple_count("parent"), 1);
        // the graph part of the signature is interpreted exactly as in the
        // plain encoding
        let plain = encode_graph(&path).unwrap();
        for (rel, _) in plain.signature().iter() {
            assert_eq!(st.tuple_count(rel), plain.tuple_count(rel));
        }

        // an invalid decomposition is rejected
        let bad = TreeDecomposition::new(
            BTreeMap::from([(0, [0u32].into_iter().collect())]),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(encode_decomposition(&path, &bad).is_err());
    }

    #[test]
    fn encoding_isomorphic_graphs_gives_isomorphic_structures() {
        let a = lbl("a", 2);
        let g1 = const_edge(&a, &[s("s1"), s("s2")]).unwrap();
        let g2 = {
            // same graph with ids permuted via a rebuilt copy
            let mut b = crate::graph::GraphBuilder::new();
            let v2 = b.add_vertex();
            let v1 = b.add_vertex();
            b.add_edge(a.clone(), vec![v1, v2]);
            b.set_source(s("s1"), v1);
            b.set_source(s("s2"), v2);
            b.finish().unwrap()
        };
        assert!(structures_isomorphic(
            &encode_graph(&g1).unwrap(),
            &encode_graph(&g2).unwrap()
        ));
        let h = const_edge(&a, &[s("s2"), s("s1")]).unwrap();
        assert!(!structures_isomorphic(
            &encode_graph(&g1).unwrap(),
            &encode_graph(&h).unwrap()
        ));
    }
}
