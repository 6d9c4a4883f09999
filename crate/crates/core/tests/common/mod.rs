//! Shared fixtures and generators for the integration suites.

#![allow(dead_code)]

use hralg::algebra::{Permutation, SortSet, Term};
use hralg::grammar::Grammar;
use hralg::graph::{Graph, GraphBuilder};
use hralg::labels::{EdgeLabel, SourceLabel};
use hralg::logic::Formula;
use hralg::recognizer::FiniteAlgebra;
use hralg::structure::{ElemId, Signature, Structure};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn s(name: &str) -> SourceLabel {
    SourceLabel::new(name).unwrap()
}

pub fn lbl(name: &str, arity: usize) -> EdgeLabel {
    EdgeLabel::new(name, arity).unwrap()
}

pub fn sort_of(names: &[&str]) -> SortSet {
    SortSet::from_iter(names.iter().map(|n| s(n)))
}

/// A random concrete graph: up to `max_vertices` vertices, up to
/// `max_edges` edges over the given alphabet, and an injective random
/// source assignment from the pool.
pub fn random_graph(
    rng: &mut StdRng,
    max_vertices: usize,
    max_edges: usize,
    alphabet: &[EdgeLabel],
    source_pool: &[SourceLabel],
) -> Graph {
    let n = rng.random_range(0..=max_vertices);
    let mut b = GraphBuilder::new();
    let vs: Vec<u32> = (0..n).map(|_| b.add_vertex()).collect();
    if n > 0 {
        let m = rng.random_range(0..=max_edges);
        for _ in 0..m {
            let label = &alphabet[rng.random_range(0..alphabet.len())];
            let attach: Vec<u32> = (0..label.arity())
                .map(|_| vs[rng.random_range(0..n)])
                .collect();
            b.add_edge(label.clone(), attach);
        }
        let mut available: Vec<u32> = vs.clone();
        for label in source_pool {
            if available.is_empty() || rng.random_bool(0.5) {
                continue;
            }
            let pick = rng.random_range(0..available.len());
            b.set_source(label.clone(), available.swap_remove(pick));
        }
    }
    b.finish().unwrap()
}

/// A random ground term over the operations restricted to `sort` and the
/// alphabet.
pub fn random_term(
    rng: &mut StdRng,
    sort: &SortSet,
    alphabet: &[EdgeLabel],
    depth: usize,
) -> Term {
    let labels: Vec<SourceLabel> = sort.iter().cloned().collect();
    let leaf = |rng: &mut StdRng| -> Term {
        if rng.random_bool(0.3) {
            let subset = SortSet::from_iter(
                labels.iter().filter(|_| rng.random_bool(0.5)).cloned(),
            );
            Term::Empty(subset)
        } else {
            let label = &alphabet[rng.random_range(0..alphabet.len())];
            let ss: Vec<SourceLabel> = (0..label.arity())
                .map(|_| labels[rng.random_range(0..labels.len())].clone())
                .collect();
            Term::Edge(label.clone(), ss)
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.random_range(0..10) {
        0..=2 => leaf(rng),
        3..=4 => {
            let subset = SortSet::from_iter(
                labels.iter().filter(|_| rng.random_bool(0.6)).cloned(),
            );
            Term::Restrict(subset, Box::new(random_term(rng, sort, alphabet, depth - 1)))
        }
        5 => {
            let a = labels[rng.random_range(0..labels.len())].clone();
            let b = labels[rng.random_range(0..labels.len())].clone();
            Term::Rename(
                Permutation::transposition(a, b),
                Box::new(random_term(rng, sort, alphabet, depth - 1)),
            )
        }
        _ => Term::Parallel(
            Box::new(random_term(rng, sort, alphabet, depth - 1)),
            Box::new(random_term(rng, sort, alphabet, depth - 1)),
        ),
    }
}

/// The standard small alphabet used by the randomized suites.
pub fn small_alphabet() -> Vec<EdgeLabel> {
    vec![lbl("a", 2), lbl("b", 2), lbl("c", 1)]
}

/// X -> a_(s1) | X par X over a unary label a.
pub fn star_grammar() -> Grammar {
    let tau = SortSet::singleton(s("s1"));
    Grammar::new(
        tau.clone(),
        BTreeMap::from([("X".to_string(), tau)]),
        vec![
            ("X".to_string(), Term::Edge(lbl("a", 1), vec![s("s1")])),
            (
                "X".to_string(),
                Term::Parallel(
                    Box::new(Term::Nonterminal("X".into())),
                    Box::new(Term::Nonterminal("X".into())),
                ),
            ),
        ],
    )
    .unwrap()
    .with_starts(vec!["X".into()])
    .unwrap()
}

/// Edge-count parity over the sorts {} and {s1}: elements even0/odd0 of
/// empty sort and even1/odd1 of sort {s1}.
pub fn parity_algebra() -> FiniteAlgebra {
    let tau = SortSet::singleton(s("s1"));
    let empty = SortSet::empty();
    let mut alg = FiniteAlgebra::new(tau.clone());
    alg.declare_element("even0", empty.clone()).unwrap();
    alg.declare_element("odd0", empty.clone()).unwrap();
    alg.declare_element("even1", tau.clone()).unwrap();
    alg.declare_element("odd1", tau.clone()).unwrap();
    alg.set_empty(empty.clone(), "even0").unwrap();
    alg.set_empty(tau.clone(), "even1").unwrap();
    alg.set_edge(lbl("a", 1), vec![s("s1")], "odd1").unwrap();
    let names = ["even0", "odd0", "even1", "odd1"];
    let odd = |n: &str| n.starts_with("odd");
    let mk = |o: bool, one: bool| format!("{}{}", if o { "odd" } else { "even" }, usize::from(one));
    for a in names {
        for b in names {
            alg.set_par(a, b, mk(odd(a) ^ odd(b), a.ends_with('1') || b.ends_with('1')))
                .unwrap();
        }
        alg.set_restrict(empty.clone(), a, mk(odd(a), false)).unwrap();
        alg.set_restrict(tau.clone(), a, a).unwrap();
        alg.set_rename(Permutation::identity(), a, a).unwrap();
    }
    alg
}

/// An n-by-m grid over binary a-edges, no sources.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let a = lbl("a", 2);
    let mut b = GraphBuilder::new();
    let mut ids = vec![vec![0u32; cols]; rows];
    for row in ids.iter_mut() {
        for cell in row.iter_mut() {
            *cell = b.add_vertex();
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                b.add_edge(a.clone(), vec![ids[r][c], ids[r][c + 1]]);
            }
            if r + 1 < rows {
                b.add_edge(a.clone(), vec![ids[r][c], ids[r + 1][c]]);
            }
        }
    }
    b.finish().unwrap()
}

/// All full binary trees with the given number of leaves, as edge lists
/// (parent, child, is_left) over preorder-numbered nodes.
pub fn binary_tree_shapes(leaves: usize) -> Vec<Vec<(usize, usize, bool)>> {
    if leaves == 1 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in 1..leaves {
        for l in binary_tree_shapes(k) {
            for r in binary_tree_shapes(leaves - k) {
                let lsize = 2 * k - 1;
                let mut edges = vec![(0usize, 1usize, true), (0, 1 + lsize, false)];
                for (p, c, d) in &l {
                    edges.push((p + 1, c + 1, *d));
                }
                for (p, c, d) in &r {
                    edges.push((p + 1 + lsize, c + 1 + lsize, *d));
                }
                out.push(edges);
            }
        }
    }
    out
}

/// Builds the graph of a full binary tree shape with left/right edges.
pub fn binary_tree_graph(edges: &[(usize, usize, bool)]) -> Graph {
    let left = lbl("left", 2);
    let right = lbl("right", 2);
    let n_nodes = edges.len() + 1;
    let mut b = GraphBuilder::new();
    let vs: Vec<u32> = (0..n_nodes).map(|_| b.add_vertex()).collect();
    for (p, c, is_left) in edges {
        b.add_edge(
            if *is_left { left.clone() } else { right.clone() },
            vec![vs[*p], vs[*c]],
        );
    }
    b.finish().unwrap()
}

/// A random structure with at most `max_elems` elements over the given
/// signature.
pub fn random_structure(rng: &mut StdRng, sig: &Signature, max_elems: usize) -> Structure {
    let n = rng.random_range(1..=max_elems) as ElemId;
    let universe: BTreeSet<ElemId> = (0..n).collect();
    let mut interp: BTreeMap<String, BTreeSet<Vec<ElemId>>> = BTreeMap::new();
    for (name, arity) in sig.iter() {
        let set = interp.entry(name.to_string()).or_default();
        let count = rng.random_range(0..=(n as usize * 2).min(6));
        for _ in 0..count {
            set.insert((0..arity).map(|_| rng.random_range(0..n)).collect());
        }
    }
    Structure::new(sig.clone(), universe, interp).unwrap()
}

/// A random formula of bounded depth over the signature, with free
/// variables drawn from the given pools.
pub fn random_formula(
    rng: &mut StdRng,
    sig: &Signature,
    fo_vars: &[&str],
    so_vars: &[&str],
    depth: usize,
) -> Formula {
    let rels: Vec<(String, usize)> = sig.iter().map(|(n, a)| (n.to_string(), a)).collect();
    let atom = |rng: &mut StdRng| -> Formula {
        match rng.random_range(0..4) {
            0 => Formula::eq(
                fo_vars[rng.random_range(0..fo_vars.len())],
                fo_vars[rng.random_range(0..fo_vars.len())],
            ),
            1 => {
                let (name, arity) = &rels[rng.random_range(0..rels.len())];
                let args = (0..*arity)
                    .map(|_| fo_vars[rng.random_range(0..fo_vars.len())].to_string())
                    .collect();
                Formula::rel(name, args)
            }
            2 => Formula::member(
                so_vars[rng.random_range(0..so_vars.len())],
                fo_vars[rng.random_range(0..fo_vars.len())],
            ),
            _ => {
                let q = rng.random_range(1..=3);
                let p = rng.random_range(0..q);
                Formula::card(so_vars[rng.random_range(0..so_vars.len())], q, p).unwrap()
            }
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    match rng.random_range(0..8) {
        0..=1 => atom(rng),
        2 => Formula::not(random_formula(rng, sig, fo_vars, so_vars, depth - 1)),
        3..=4 => Formula::and(
            random_formula(rng, sig, fo_vars, so_vars, depth - 1),
            random_formula(rng, sig, fo_vars, so_vars, depth - 1),
        ),
        5..=6 => Formula::exists_fo(
            fo_vars[rng.random_range(0..fo_vars.len())],
            random_formula(rng, sig, fo_vars, so_vars, depth - 1),
        ),
        _ => Formula::exists_so(
            so_vars[rng.random_range(0..so_vars.len())],
            random_formula(rng, sig, fo_vars, so_vars, depth - 1),
        ),
    }
}

/// Direct-definition satisfaction, written straight from the semantic
/// clauses with naive set representations: the independent oracle for the
/// main evaluator.
pub fn naive_satisfies(
    structure: &Structure,
    fo: &BTreeMap<String, ElemId>,
    so: &BTreeMap<String, BTreeSet<ElemId>>,
    formula: &Formula,
) -> bool {
    match formula {
        Formula::EqFO(x, y) => fo[x] == fo[y],
        Formula::Rel(r, args) => {
            let tuple: Vec<ElemId> = args.iter().map(|a| fo[a]).collect();
            structure.holds(r, &tuple)
        }
        Formula::Member(set, x) => so[set].contains(&fo[x]),
        Formula::Card(set, q, p) => (so[set].len() as u32) % q == *p,
        Formula::Not(inner) => !naive_satisfies(structure, fo, so, inner),
        Formula::And(a, b) => {
            naive_satisfies(structure, fo, so, a) && naive_satisfies(structure, fo, so, b)
        }
        Formula::ExistsFO(x, inner) => structure.universe().any(|u| {
            let mut fo2 = fo.clone();
            fo2.insert(x.clone(), u);
            naive_satisfies(structure, &fo2, so, inner)
        }),
        Formula::ExistsSO(set, inner) => {
            let elems: Vec<ElemId> = structure.universe().collect();
            (0u64..(1 << elems.len())).any(|mask| {
                let subset: BTreeSet<ElemId> = elems
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, e)| *e)
                    .collect();
                let mut so2 = so.clone();
                so2.insert(set.clone(), subset);
                naive_satisfies(structure, fo, &so2, inner)
            })
        }
    }
}

/// The fixpoint depth at which a ground term's value is guaranteed to be
/// enumerated by the universal grammar: constants need one stage, each
/// operation one more.
pub fn kleene_depth(t: &Term) -> usize {
    match t {
        Term::Empty(_) | Term::Edge(..) | Term::Nonterminal(_) => 1,
        Term::Restrict(_, inner) | Term::Rename(_, inner) => kleene_depth(inner) + 1,
        Term::Parallel(a, b) => kleene_depth(a).max(kleene_depth(b)) + 1,
    }
}
