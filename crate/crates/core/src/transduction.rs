//! Parameterized multi-copying transduction schemes over finite structures,
//! their application and composition, and the built-in pair of schemes
//! linking the leaves of a binary tree (and unlinking them again).
//!
//! A scheme is a tuple of formulas: a domain sentence over the set
//! parameters, one layer formula per copy selecting the elements kept in
//! that copy, and one output formula per (output symbol, layer tuple)
//! defining the relation among copied elements. Argument positions are
//! named by the fixed variables `x1`, `x2`, ....

use crate::logic::{free_vars, Evaluator, Formula, Store};
use crate::structure::{structures_isomorphic, ElemId, Signature, Structure};
use crate::{Error, Limits, Result};
use std::collections::{BTreeMap, BTreeSet};

/// The conventional name of the i-th argument variable (1-based).
pub fn arg_var(i: usize) -> String {
    format!("x{i}")
}

#[derive(Clone, Debug)]
pub struct TransductionScheme {
    pub input: Signature,
    pub output: Signature,
    pub copies: usize,
    pub params: Vec<String>,
    pub domain: Formula,
    pub layers: Vec<Formula>,
    pub outputs: BTreeMap<(String, Vec<usize>), Formula>,
}

impl TransductionScheme {
    /// Checks the scheme's shape: one layer formula per copy, output keys
    /// inside the output signature with layer indices in range, and free
    /// variables confined to the declared parameters and argument names.
    pub fn validate(&self) -> Result<()> {
        if self.copies == 0 {
            return Err(Error::InvalidScheme("at least one copy is required".into()));
        }
        if self.layers.len() != self.copies {
            return Err(Error::InvalidScheme(format!(
                "{} copies but {} layer formulas",
                self.copies,
                self.layers.len()
            )));
        }
        let params: BTreeSet<&String> = self.params.iter().collect();
        let check_free = |f: &Formula, fo_allowed: usize, what: &str| -> Result<()> {
            let (fo, so) = free_vars(f);
            for x in fo {
                let ok = (1..=fo_allowed).any(|i| arg_var(i) == x);
                if !ok {
                    return Err(Error::InvalidScheme(format!(
                        "{what} has unexpected free first-order variable `{x}`"
                    )));
                }
            }
            for x in so {
                if !params.contains(&x) {
                    return Err(Error::InvalidScheme(format!(
                        "{what} has free set variable `{x}` that is not a parameter"
                    )));
                }
            }
            Ok(())
        };
        check_free(&self.domain, 0, "the domain formula")?;
        for (i, psi) in self.layers.iter().enumerate() {
            check_free(psi, 1, &format!("layer formula {}", i + 1))?;
        }
        for ((symbol, layers), theta) in &self.outputs {
            let arity = self.output.arity(symbol).ok_or_else(|| {
                Error::InvalidScheme(format!(
                    "output formula for `{symbol}` outside the output signature"
                ))
            })?;
            if layers.len() != arity {
                return Err(Error::InvalidScheme(format!(
                    "output formula for `{symbol}` names {} layers, arity is {arity}",
                    layers.len()
                )));
            }
            if layers.iter().any(|l| *l == 0 || *l > self.copies) {
                return Err(Error::InvalidScheme(format!(
                    "output formula for `{symbol}` names a layer outside 1..={}",
                    self.copies
                )));
            }
            check_free(theta, arity, &format!("output formula for `{symbol}`"))?;
        }
        Ok(())
    }
}

/// A valuation of the scheme parameters by element sets.
pub type ParamValuation = BTreeMap<String, BTreeSet<ElemId>>;

/// Applies the scheme under one parameter valuation. `None` means the
/// structure (with these parameters) is outside the scheme's domain.
///
/// The output universe is the set of (element, layer) pairs whose layer
/// formula holds; output tuples are kept only when all their components
/// were kept, even if the output formula holds more widely.
pub fn apply_scheme(
    scheme: &TransductionScheme,
    input: &Structure,
    params: &ParamValuation,
    limits: &Limits,
) -> Result<Option<Structure>> {
    scheme.validate()?;
    if input.signature() != &scheme.input {
        return Err(Error::InvalidScheme(
            "input structure signature differs from the scheme's input signature".into(),
        ));
    }
    for p in &scheme.params {
        if !params.contains_key(p) {
            return Err(Error::UnboundVariable(p.clone()));
        }
    }
    let mut store = Store::new();
    for (p, set) in params {
        store.so.insert(p.clone(), set.clone());
    }
    let mut eval = Evaluator::with_so_bound(input, limits.so_universe_bound);
    if !eval.satisfies(&store, &scheme.domain)? {
        return Ok(None);
    }

    let elems: Vec<ElemId> = input.universe().collect();
    // kept (element, layer) pairs, in (layer, element) order
    let mut kept: BTreeSet<(usize, ElemId)> = BTreeSet::new();
    let mut st = store.clone();
    for (i, psi) in scheme.layers.iter().enumerate() {
        for e in &elems {
            st.fo.insert(arg_var(1), *e);
            if eval.satisfies(&st, psi)? {
                kept.insert((i + 1, *e));
            }
        }
    }
    let ids: BTreeMap<(usize, ElemId), ElemId> = kept
        .iter()
        .enumerate()
        .map(|(fresh, pair)| (*pair, fresh as ElemId))
        .collect();

    let mut interp: BTreeMap<String, BTreeSet<Vec<ElemId>>> = BTreeMap::new();
    for ((symbol, layers), theta) in &scheme.outputs {
        let arity = layers.len();
        let mut tuple = vec![0usize; arity];
        let set = interp.entry(symbol.clone()).or_default();
        if elems.is_empty() && arity > 0 {
            continue;
        }
        let mut st = store.clone();
        loop {
            let pairs: Vec<(usize, ElemId)> = (0..arity)
                .map(|k| (layers[k], elems[tuple[k]]))
                .collect();
            if pairs.iter().all(|p| kept.contains(p)) {
                for (k, (_, e)) in pairs.iter().enumerate() {
                    st.fo.insert(arg_var(k + 1), *e);
                }
                if eval.satisfies(&st, theta)? {
                    set.insert(pairs.iter().map(|p| ids[p]).collect());
                }
            }
            // advance the mixed-radix counter; all-zeros again means done
            let mut pos = arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < elems.len() {
                    break;
                }
                tuple[pos] = 0;
            }
            if tuple.iter().all(|t| *t == 0) {
                break;
            }
        }
    }
    let universe: BTreeSet<ElemId> = ids.values().copied().collect();
    Ok(Some(Structure::new(scheme.output.clone(), universe, interp)?))
}

/// Applies the scheme under every parameter valuation and deduplicates the
/// outputs up to structure isomorphism, in a canonical order.
pub fn enumerate_outputs(
    scheme: &TransductionScheme,
    input: &Structure,
    limits: &Limits,
) -> Result<Vec<Structure>> {
    scheme.validate()?;
    let n = input.universe_size();
    if scheme.params.is_empty() {
        let out = apply_scheme(scheme, input, &ParamValuation::new(), limits)?;
        return Ok(out.into_iter().collect());
    }
    if n > limits.param_enum_bound {
        return Err(Error::ResourceLimit(format!(
            "parameter enumeration limited to universes of {} elements, structure has {n}",
            limits.param_enum_bound
        )));
    }
    let elems: Vec<ElemId> = input.universe().collect();
    let subsets: Vec<BTreeSet<ElemId>> = (0u64..(1u64 << n))
        .map(|mask| {
            elems
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| *e)
                .collect()
        })
        .collect();
    let mut outputs: Vec<Structure> = Vec::new();
    let mut valuation_index = vec![0usize; scheme.params.len()];
    loop {
        let valuation: ParamValuation = scheme
            .params
            .iter()
            .zip(&valuation_index)
            .map(|(p, i)| (p.clone(), subsets[*i].clone()))
            .collect();
        if let Some(out) = apply_scheme(scheme, input, &valuation, limits)? {
            if !outputs.iter().any(|o| structures_isomorphic(o, &out)) {
                outputs.push(out);
            }
        }
        let mut pos = valuation_index.len();
        loop {
            if pos == 0 {
                sort_structures(&mut outputs);
                return Ok(outputs);
            }
            pos -= 1;
            valuation_index[pos] += 1;
            if valuation_index[pos] < subsets.len() {
                break;
            }
            valuation_index[pos] = 0;
        }
    }
}

fn sort_structures(outputs: &mut [Structure]) {
    outputs.sort_by_key(|s| {
        let rels: Vec<(String, usize)> = s
            .signature()
            .iter()
            .map(|(r, _)| (r.to_string(), s.tuple_count(r)))
            .collect();
        (s.universe_size(), rels)
    });
}

/// An ordered sequence of schemes where each stage's output signature
/// matches the next stage's input signature.
#[derive(Clone, Debug)]
pub struct Pipeline {
    stages: Vec<TransductionScheme>,
}

impl Pipeline {
    pub fn new(stages: Vec<TransductionScheme>) -> Result<Pipeline> {
        for window in stages.windows(2) {
            if window[0].output != window[1].input {
                return Err(Error::InvalidScheme(
                    "pipeline stages have mismatched signatures".into(),
                ));
            }
        }
        Ok(Pipeline { stages })
    }

    pub fn stages(&self) -> &[TransductionScheme] {
        &self.stages
    }
}

/// Relational composition of the stages: every output of stage j feeds
/// stage j+1; results are deduplicated up to isomorphism.
pub fn pipeline_apply(
    pipeline: &Pipeline,
    input: &Structure,
    limits: &Limits,
) -> Result<Vec<Structure>> {
    let mut current = vec![input.clone()];
    for stage in &pipeline.stages {
        let mut next: Vec<Structure> = Vec::new();
        for s in &current {
            for out in enumerate_outputs(stage, s, limits)? {
                if !next.iter().any(|o| structures_isomorphic(o, &out)) {
                    next.push(out);
                }
            }
        }
        current = next;
    }
    sort_structures(&mut current);
    Ok(current)
}

// ---------------------------------------------------------------------------
// Built-in schemes: linking the leaves of a binary tree in lexicographic
// order, and removing the links again.
//
// The input encodes a binary tree over ternary incidence relations r_left
// and r_right: the first argument is the edge element, then the parent and
// child nodes. The forward scheme is 2-copying and parameterless: layer 1
// keeps everything, layer 2 keeps every leaf that has a successor, and each
// kept layer-2 leaf becomes the edge element of one next-link.
// ---------------------------------------------------------------------------

fn tll_input_signature() -> Signature {
    Signature::from_pairs([("r_left".to_string(), 3), ("r_right".to_string(), 3)])
}

fn tll_output_signature() -> Signature {
    Signature::from_pairs([
        ("r_left".to_string(), 3),
        ("r_right".to_string(), 3),
        ("r_next".to_string(), 3),
    ])
}

fn rel3(r: &str, e: &str, p: &str, c: &str) -> Formula {
    Formula::rel(r, vec![e.into(), p.into(), c.into()])
}

/// x is an edge element: the first component of some incidence triple.
fn is_edge(x: &str) -> Formula {
    Formula::exists_fo(
        "ep",
        Formula::exists_fo(
            "ec",
            Formula::or(rel3("r_left", x, "ep", "ec"), rel3("r_right", x, "ep", "ec")),
        ),
    )
}

fn is_node(x: &str) -> Formula {
    Formula::not(is_edge(x))
}

/// p is the parent of c through some edge element.
fn parent_of(p: &str, c: &str) -> Formula {
    Formula::exists_fo(
        "pe",
        Formula::or(rel3("r_left", "pe", p, c), rel3("r_right", "pe", p, c)),
    )
}

fn left_child(p: &str, c: &str) -> Formula {
    Formula::exists_fo("le", rel3("r_left", "le", p, c))
}

fn right_child(p: &str, c: &str) -> Formula {
    Formula::exists_fo("re", rel3("r_right", "re", p, c))
}

fn leaf(x: &str) -> Formula {
    Formula::and(
        is_node(x),
        Formula::not(Formula::exists_fo("lc", parent_of(x, "lc"))),
    )
}

fn is_root(x: &str) -> Formula {
    Formula::and(
        is_node(x),
        Formula::not(Formula::exists_fo("rp", parent_of("rp", x))),
    )
}

/// The domain sentence of the forward scheme: the structure encodes a
/// binary tree with at least one edge, where every edge element carries
/// exactly one incidence triple between distinct nodes, there is exactly
/// one root, every other node has exactly one incoming edge, every
/// non-leaf has exactly one left and one right child, and every node is
/// reachable from the root.
pub fn tree_domain_formula() -> Formula {
    let wellformed_edges = Formula::forall_fo(
        "e",
        Formula::forall_fo(
            "p",
            Formula::forall_fo(
                "c",
                Formula::implies(
                    Formula::or(rel3("r_left", "e", "p", "c"), rel3("r_right", "e", "p", "c")),
                    Formula::and_all(vec![
                        is_node("p"),
                        is_node("c"),
                        Formula::not(Formula::eq("p", "c")),
                        Formula::forall_fo(
                            "p2",
                            Formula::forall_fo(
                                "c2",
                                Formula::implies(
                                    Formula::or(
                                        rel3("r_left", "e", "p2", "c2"),
                                        rel3("r_right", "e", "p2", "c2"),
                                    ),
                                    Formula::and(Formula::eq("p", "p2"), Formula::eq("c", "c2")),
                                ),
                            ),
                        ),
                        Formula::not(Formula::and(
                            rel3("r_left", "e", "p", "c"),
                            rel3("r_right", "e", "p", "c"),
                        )),
                    ]),
                ),
            ),
        ),
    );
    let unique_root = Formula::and(
        Formula::exists_fo("r1", is_root("r1")),
        Formula::forall_fo(
            "r1",
            Formula::forall_fo(
                "r2",
                Formula::implies(
                    Formula::and(is_root("r1"), is_root("r2")),
                    Formula::eq("r1", "r2"),
                ),
            ),
        ),
    );
    let one_incoming = Formula::forall_fo(
        "n",
        Formula::implies(
            Formula::and(is_node("n"), Formula::not(is_root("n"))),
            Formula::forall_fo(
                "e",
                Formula::forall_fo(
                    "p",
                    Formula::implies(
                        Formula::or(
                            rel3("r_left", "e", "p", "n"),
                            rel3("r_right", "e", "p", "n"),
                        ),
                        Formula::forall_fo(
                            "e2",
                            Formula::forall_fo(
                                "p2",
                                Formula::implies(
                                    Formula::or(
                                        rel3("r_left", "e2", "p2", "n"),
                                        rel3("r_right", "e2", "p2", "n"),
                                    ),
                                    Formula::eq("e", "e2"),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    );
    let exactly_one = |rel: &str| {
        Formula::and(
            Formula::exists_fo("e", Formula::exists_fo("c", rel3(rel, "e", "n", "c"))),
            Formula::forall_fo(
                "e",
                Formula::forall_fo(
                    "c",
                    Formula::implies(
                        rel3(rel, "e", "n", "c"),
                        Formula::forall_fo(
                            "e2",
                            Formula::forall_fo(
                                "c2",
                                Formula::implies(
                                    rel3(rel, "e2", "n", "c2"),
                                    Formula::and(Formula::eq("e", "e2"), Formula::eq("c", "c2")),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        )
    };
    let binary_shape = Formula::forall_fo(
        "n",
        Formula::implies(
            is_node("n"),
            Formula::or(
                leaf("n"),
                Formula::and(exactly_one("r_left"), exactly_one("r_right")),
            ),
        ),
    );
    let connected = Formula::forall_fo(
        "n",
        Formula::implies(
            is_node("n"),
            Formula::exists_fo(
                "r1",
                Formula::and(is_root("r1"), descends_to(&parent_of, "reach", "r1", "n")),
            ),
        ),
    );
    let nonempty = Formula::exists_fo("e", is_edge("e"));
    Formula::and_all(vec![
        nonempty,
        wellformed_edges,
        unique_root,
        one_incoming,
        binary_shape,
        connected,
    ])
}

/// Chains are unrolled to this many steps. Every structure within the
/// evaluator's set-quantification range (64 elements) is far below it, so
/// the unrolled chains agree with unbounded reachability on every input
/// the engine accepts.
const CHAIN_DEPTH: usize = 64;

/// z lies on the descent from `from` along edges admitted by `step`,
/// within `CHAIN_DEPTH` steps. `step(parent, child)` names the edge
/// relation; `prefix` keeps the chain variables distinct per call site.
fn descends_to(
    step: &dyn Fn(&str, &str) -> Formula,
    prefix: &str,
    from: &str,
    to: &str,
) -> Formula {
    fn level(
        step: &dyn Fn(&str, &str) -> Formula,
        prefix: &str,
        from: &str,
        to: &str,
        depth: usize,
    ) -> Formula {
        if depth == 0 {
            return Formula::eq(from, to);
        }
        let child = format!("{prefix}{depth}");
        Formula::or(
            Formula::eq(from, to),
            Formula::exists_fo(
                child.clone(),
                Formula::and(
                    step(from, &child),
                    level(step, prefix, &child, to, depth - 1),
                ),
            ),
        )
    }
    level(step, prefix, from, to, CHAIN_DEPTH)
}

/// z is the leaf ending the all-right descent from `top` — the rightmost
/// leaf of the subtree rooted there.
fn rightmost_leaf(top: &str, z: &str) -> Formula {
    Formula::and(leaf(z), descends_to(&right_child, "rspine", top, z))
}

fn leftmost_leaf(top: &str, z: &str) -> Formula {
    Formula::and(leaf(z), descends_to(&left_child, "lspine", top, z))
}

/// x and y are leaves and y directly follows x in the left-to-right leaf
/// order: at their lowest common branch point, x ends the all-right
/// descent of the left child and y ends the all-left descent of the right
/// child.
pub fn leaf_successor_formula(x: &str, y: &str) -> Formula {
    Formula::and_all(vec![
        leaf(x),
        leaf(y),
        Formula::not(Formula::eq(x, y)),
        Formula::exists_fo(
            "apex",
            Formula::exists_fo(
                "lchild",
                Formula::and(
                    left_child("apex", "lchild"),
                    Formula::and(
                        rightmost_leaf("lchild", x),
                        Formula::exists_fo(
                            "rchild",
                            Formula::and(
                                right_child("apex", "rchild"),
                                leftmost_leaf("rchild", y),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    ])
}

/// The 2-copying parameterless scheme that links consecutive leaves of a
/// binary tree with next-edges, paired with the copyless scheme that
/// removes them again.
pub fn builtin_tll() -> (TransductionScheme, TransductionScheme) {
    let copy_rel = |r: &str| {
        (
            (r.to_string(), vec![1, 1, 1]),
            rel3(r, "x1", "x2", "x3"),
        )
    };
    let theta_next = Formula::and_all(vec![
        Formula::eq("x1", "x2"),
        leaf("x2"),
        leaf("x3"),
        leaf_successor_formula("x2", "x3"),
    ]);
    let psi2 = Formula::and(
        leaf("x1"),
        Formula::exists_fo(
            "nx",
            Formula::and(leaf("nx"), leaf_successor_formula("x1", "nx")),
        ),
    );
    let forward = TransductionScheme {
        input: tll_input_signature(),
        output: tll_output_signature(),
        copies: 2,
        params: Vec::new(),
        domain: tree_domain_formula(),
        layers: vec![Formula::tru(), psi2],
        outputs: BTreeMap::from([
            copy_rel("r_left"),
            copy_rel("r_right"),
            (("r_next".to_string(), vec![2, 1, 1]), theta_next),
        ]),
    };

    let keep_non_next = Formula::forall_fo(
        "ny",
        Formula::forall_fo(
            "nz",
            Formula::not(Formula::rel("r_next", vec!["x1".into(), "ny".into(), "nz".into()])),
        ),
    );
    let backward = TransductionScheme {
        input: tll_output_signature(),
        output: tll_input_signature(),
        copies: 1,
        params: Vec::new(),
        domain: Formula::tru(),
        layers: vec![keep_non_next],
        outputs: BTreeMap::from([copy_rel("r_left"), copy_rel("r_right")]),
    };
    (forward, backward)
}
