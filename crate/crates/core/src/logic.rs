//! Counting monadic second-order formulas and brute-force satisfaction over
//! finite structures.
//!
//! The core grammar is equality, relation atoms, set membership, modular
//! cardinality constraints, negation, conjunction and the two existential
//! quantifiers. Everything else (disjunction, implication, universals,
//! truth constants) is desugared by the constructors and the file parser.
//!
//! First-order quantifiers range over the universe; second-order
//! quantifiers enumerate all subsets, which is the definitional semantics
//! and the reason for the universe bound. The evaluator compiles formulas
//! to an arena with integer variable slots and memoizes quantified
//! subformulas without free set variables, so repeated queries against one
//! structure stay cheap.

use crate::structure::{ElemId, Structure};
use crate::{Error, Limits, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    /// x = y
    EqFO(String, String),
    /// r(x1, ..., xk)
    Rel(String, Vec<String>),
    /// X(x)
    Member(String, String),
    /// card(X) = kq + p for some k
    Card(String, u32, u32),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    ExistsFO(String, Box<Formula>),
    ExistsSO(String, Box<Formula>),
}

impl Formula {
    pub fn eq(x: impl Into<String>, y: impl Into<String>) -> Formula {
        Formula::EqFO(x.into(), y.into())
    }

    pub fn rel(r: impl Into<String>, args: Vec<String>) -> Formula {
        Formula::Rel(r.into(), args)
    }

    pub fn member(set: impl Into<String>, x: impl Into<String>) -> Formula {
        Formula::Member(set.into(), x.into())
    }

    /// Requires q >= 1 and p in [0, q-1].
    pub fn card(set: impl Into<String>, q: u32, p: u32) -> Result<Formula> {
        if q == 0 || p >= q {
            return Err(Error::InvalidFormula(format!(
                "cardinality constraint needs q >= 1 and p in [0, q-1], got q={q}, p={p}"
            )));
        }
        Ok(Formula::Card(set.into(), q, p))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn exists_fo(x: impl Into<String>, f: Formula) -> Formula {
        Formula::ExistsFO(x.into(), Box::new(f))
    }

    pub fn exists_so(x: impl Into<String>, f: Formula) -> Formula {
        Formula::ExistsSO(x.into(), Box::new(f))
    }

    pub fn forall_fo(x: impl Into<String>, f: Formula) -> Formula {
        Formula::not(Formula::exists_fo(x, Formula::not(f)))
    }

    pub fn forall_so(x: impl Into<String>, f: Formula) -> Formula {
        Formula::not(Formula::exists_so(x, Formula::not(f)))
    }

    /// Always satisfied.
    pub fn tru() -> Formula {
        Formula::not(Formula::exists_fo("_t", Formula::not(Formula::eq("_t", "_t"))))
    }

    pub fn fals() -> Formula {
        Formula::not(Formula::tru())
    }

    /// Conjunction of many formulas, balanced so evaluation reaches the
    /// first conjunct quickly.
    pub fn and_all(fs: Vec<Formula>) -> Formula {
        fn build(fs: &mut std::vec::IntoIter<Formula>, n: usize) -> Formula {
            match n {
                0 => Formula::tru(),
                1 => fs.next().unwrap(),
                _ => {
                    let left = build(fs, n / 2);
                    let right = build(fs, n - n / 2);
                    Formula::and(left, right)
                }
            }
        }
        let n = fs.len();
        build(&mut fs.into_iter(), n)
    }

    pub fn or_all(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::fals(),
            _ => Formula::not(Formula::and_all(
                fs.into_iter().map(Formula::not).collect(),
            )),
        }
    }

    pub fn is_sentence(&self) -> bool {
        let (fo, so) = free_vars(self);
        fo.is_empty() && so.is_empty()
    }
}

/// The free first-order and second-order variables of a formula.
pub fn free_vars(f: &Formula) -> (BTreeSet<String>, BTreeSet<String>) {
    fn walk(f: &Formula, fo: &mut BTreeSet<String>, so: &mut BTreeSet<String>) {
        match f {
            Formula::EqFO(x, y) => {
                fo.insert(x.clone());
                fo.insert(y.clone());
            }
            Formula::Rel(_, args) => fo.extend(args.iter().cloned()),
            Formula::Member(set, x) => {
                so.insert(set.clone());
                fo.insert(x.clone());
            }
            Formula::Card(set, _, _) => {
                so.insert(set.clone());
            }
            Formula::Not(inner) => walk(inner, fo, so),
            Formula::And(a, b) => {
                walk(a, fo, so);
                walk(b, fo, so);
            }
            Formula::ExistsFO(x, inner) => {
                let mut inner_fo = BTreeSet::new();
                walk(inner, &mut inner_fo, so);
                inner_fo.remove(x);
                fo.extend(inner_fo);
            }
            Formula::ExistsSO(set, inner) => {
                let mut inner_so = BTreeSet::new();
                walk(inner, fo, &mut inner_so);
                inner_so.remove(set);
                so.extend(inner_so);
            }
        }
    }
    let mut fo = BTreeSet::new();
    let mut so = BTreeSet::new();
    walk(f, &mut fo, &mut so);
    (fo, so)
}

fn has_so_quantifier(f: &Formula) -> bool {
    match f {
        Formula::ExistsSO(..) => true,
        Formula::EqFO(..) | Formula::Rel(..) | Formula::Member(..) | Formula::Card(..) => false,
        Formula::Not(inner) | Formula::ExistsFO(_, inner) => has_so_quantifier(inner),
        Formula::And(a, b) => has_so_quantifier(a) || has_so_quantifier(b),
    }
}

fn relations_used(f: &Formula, out: &mut BTreeMap<String, usize>) {
    match f {
        Formula::Rel(r, args) => {
            out.insert(r.clone(), args.len());
        }
        Formula::EqFO(..) | Formula::Member(..) | Formula::Card(..) => {}
        Formula::Not(inner) | Formula::ExistsFO(_, inner) | Formula::ExistsSO(_, inner) => {
            relations_used(inner, out)
        }
        Formula::And(a, b) => {
            relations_used(a, out);
            relations_used(b, out);
        }
    }
}

/// Variable assignments: first-order variables to elements, second-order
/// variables to element sets.
#[derive(Clone, Debug, Default)]
pub struct Store {
    pub fo: BTreeMap<String, ElemId>,
    pub so: BTreeMap<String, BTreeSet<ElemId>>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }
}

// --------------------------------------------------------------------------
// Compiled programs
// --------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum CNode {
    Eq(u32, u32),
    Rel { rel: u32, args: Vec<u32> },
    Member { set: u32, x: u32 },
    Card { set: u32, q: u32, p: u32 },
    Not(u32),
    And(u32, u32),
    ExistsFO { slot: u32, body: u32 },
    ExistsSO { slot: u32, body: u32 },
}

/// Per-node memo plan: quantified nodes with no free set variables and at
/// most four free first-order slots cache their results.
#[derive(Clone, Debug)]
enum Memo {
    No,
    Key(Vec<u32>),
}

struct Compiled {
    nodes: Vec<CNode>,
    memo: Vec<Memo>,
    root: u32,
    free_fo: Vec<(String, u32)>,
    free_so: Vec<(String, u32)>,
    fo_slots: usize,
    so_slots: usize,
    needs_so: bool,
}

enum RelData {
    /// arity <= 4, universe indexable in 16 bits
    Packed(HashSet<u64>),
    General(HashSet<Vec<u32>>),
}

impl RelData {
    fn contains(&self, tuple: &[u32]) -> bool {
        match self {
            RelData::Packed(set) => set.contains(&pack_tuple(tuple)),
            RelData::General(set) => set.contains(tuple),
        }
    }
}

fn pack_tuple(tuple: &[u32]) -> u64 {
    let mut packed: u64 = (tuple.len() as u64) << 60;
    for (i, t) in tuple.iter().enumerate() {
        packed |= (*t as u64 & 0xffff) << (16 * i);
    }
    packed
}

struct Compiler<'a> {
    nodes: Vec<CNode>,
    memo_fo: Vec<Option<Vec<u32>>>, // free fo slots per node, None = has free so
    fo_scope: Vec<(String, u32)>,
    so_scope: Vec<(String, u32)>,
    fo_slots: usize,
    so_slots: usize,
    rel_index: &'a BTreeMap<String, u32>,
}

impl<'a> Compiler<'a> {
    fn fo_slot(&self, name: &str) -> Result<u32> {
        self.fo_scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))
    }

    fn so_slot(&self, name: &str) -> Result<u32> {
        self.so_scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))
    }

    /// Emits the node and returns (id, free fo slots, has free so).
    fn emit(&mut self, f: &Formula) -> Result<(u32, Vec<u32>, bool)> {
        let (node, mut fo, so) = match f {
            Formula::EqFO(x, y) => {
                let (a, b) = (self.fo_slot(x)?, self.fo_slot(y)?);
                (CNode::Eq(a, b), vec![a, b], false)
            }
            Formula::Rel(r, args) => {
                let rel = *self.rel_index.get(r).ok_or_else(|| {
                    Error::UnknownRelation(r.clone())
                })?;
                let slots = args
                    .iter()
                    .map(|a| self.fo_slot(a))
                    .collect::<Result<Vec<u32>>>()?;
                (CNode::Rel { rel, args: slots.clone() }, slots, false)
            }
            Formula::Member(set, x) => {
                let (s, a) = (self.so_slot(set)?, self.fo_slot(x)?);
                (CNode::Member { set: s, x: a }, vec![a], true)
            }
            Formula::Card(set, q, p) => {
                let s = self.so_slot(set)?;
                (CNode::Card { set: s, q: *q, p: *p }, Vec::new(), true)
            }
            Formula::Not(inner) => {
                let (id, fo, so) = self.emit(inner)?;
                (CNode::Not(id), fo, so)
            }
            Formula::And(a, b) => {
                let (ida, mut foa, soa) = self.emit(a)?;
                let (idb, fob, sob) = self.emit(b)?;
                foa.extend(fob);
                (CNode::And(ida, idb), foa, soa || sob)
            }
            Formula::ExistsFO(x, inner) => {
                let slot = self.fo_slots as u32;
                self.fo_slots += 1;
                self.fo_scope.push((x.clone(), slot));
                let (id, fo, so) = self.emit(inner)?;
                self.fo_scope.pop();
                let fo = fo.into_iter().filter(|s| *s != slot).collect();
                (CNode::ExistsFO { slot, body: id }, fo, so)
            }
            Formula::ExistsSO(x, inner) => {
                let slot = self.so_slots as u32;
                self.so_slots += 1;
                self.so_scope.push((x.clone(), slot));
                let (id, fo, so_inner) = self.emit(inner)?;
                self.so_scope.pop();
                // the quantified set is bound here; free-so only when the
                // body mentions an outer set variable
                let so = so_inner && self.body_mentions_outer_so(inner, x);
                (CNode::ExistsSO { slot, body: id }, fo, so)
            }
        };
        fo.sort_unstable();
        fo.dedup();
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.memo_fo.push(if so { None } else { Some(fo.clone()) });
        Ok((id, fo, so))
    }

    fn body_mentions_outer_so(&self, body: &Formula, bound: &str) -> bool {
        let (_, so) = free_vars(body);
        so.iter().any(|name| name != bound)
    }
}

/// Reusable evaluator over one structure. Formulas are compiled once per
/// evaluator; quantified subformulas without free set variables are
/// memoized across queries, keyed by the values of their free first-order
/// variables. Caches are internal to the evaluator and never shared.
///
/// The `'f` lifetime ties every queried formula to the evaluator, so the
/// pointer-keyed compilation cache never observes a recycled allocation.
pub struct Evaluator<'s, 'f> {
    structure: &'s Structure,
    universe: Vec<ElemId>,
    index: BTreeMap<ElemId, usize>,
    rel_index: BTreeMap<String, u32>,
    rel_data: Vec<RelData>,
    so_bound: usize,
    compiled: HashMap<usize, usize>,
    programs: Vec<Compiled>,
    memo: HashMap<(u32, u32, u64), bool>,
    _formulas: std::marker::PhantomData<&'f Formula>,
}

impl<'s, 'f> Evaluator<'s, 'f> {
    pub fn new(structure: &'s Structure) -> Evaluator<'s, 'f> {
        Evaluator::with_so_bound(structure, Limits::default().so_universe_bound)
    }

    pub fn with_so_bound(structure: &'s Structure, so_bound: usize) -> Evaluator<'s, 'f> {
        let universe: Vec<ElemId> = structure.universe().collect();
        let index: BTreeMap<ElemId, usize> =
            universe.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut rel_index = BTreeMap::new();
        let mut rel_data = Vec::new();
        for (name, arity) in structure.signature().iter() {
            let indexed = |t: &Vec<ElemId>| -> Vec<u32> {
                t.iter().map(|e| index[e] as u32).collect()
            };
            let data = if arity <= 4 && universe.len() <= 0xffff {
                RelData::Packed(
                    structure
                        .tuples(name)
                        .map(|t| pack_tuple(&indexed(t)))
                        .collect(),
                )
            } else {
                RelData::General(structure.tuples(name).map(indexed).collect())
            };
            rel_index.insert(name.to_string(), rel_data.len() as u32);
            rel_data.push(data);
        }
        Evaluator {
            structure,
            universe,
            index,
            rel_index,
            rel_data,
            so_bound: so_bound.min(64),
            compiled: HashMap::new(),
            programs: Vec::new(),
            memo: HashMap::new(),
            _formulas: std::marker::PhantomData,
        }
    }

    /// Exact satisfaction under the given store.
    pub fn satisfies(&mut self, store: &Store, formula: &'f Formula) -> Result<bool> {
        let pid = self.compile(formula)?;
        let program = &self.programs[pid];
        let n = self.universe.len();
        if program.needs_so && n > self.so_bound {
            return Err(Error::ResourceLimit(format!(
                "second-order evaluation limited to universes of {} elements, structure has {n}",
                self.so_bound
            )));
        }
        let mut fo_env = vec![0u32; program.fo_slots];
        let mut so_env = vec![0u64; program.so_slots];
        for (name, slot) in &program.free_fo {
            let e = store
                .fo
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            let idx = self.index.get(e).ok_or_else(|| {
                Error::InvalidFormula(format!(
                    "store maps `{name}` to element {e} outside the universe"
                ))
            })?;
            fo_env[*slot as usize] = *idx as u32;
        }
        for (name, slot) in &program.free_so {
            let set = store
                .so
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            let mut mask = 0u64;
            for e in set {
                let idx = self.index.get(e).ok_or_else(|| {
                    Error::InvalidFormula(format!(
                        "store maps `{name}` to a set containing element {e} outside the universe"
                    ))
                })?;
                mask |= 1u64 << idx;
            }
            so_env[*slot as usize] = mask;
        }
        let mut run = Run {
            program: &self.programs[pid],
            pid: pid as u32,
            n,
            rel_data: &self.rel_data,
            memo: &mut self.memo,
        };
        let root = run.program.root;
        Ok(run.eval(root, &mut fo_env, &mut so_env))
    }

    fn compile(&mut self, formula: &'f Formula) -> Result<usize> {
        let key = formula as *const Formula as usize;
        if let Some(pid) = self.compiled.get(&key) {
            return Ok(*pid);
        }
        let mut rels = BTreeMap::new();
        relations_used(formula, &mut rels);
        for (r, arity) in rels {
            match self.structure.signature().arity(&r) {
                None => return Err(Error::UnknownRelation(r)),
                Some(a) if a != arity => {
                    return Err(Error::InvalidFormula(format!(
                        "relation `{r}` has arity {a}, used with {arity} arguments"
                    )))
                }
                _ => {}
            }
        }
        let (free_fo_names, free_so_names) = free_vars(formula);
        let mut comp = Compiler {
            nodes: Vec::new(),
            memo_fo: Vec::new(),
            fo_scope: Vec::new(),
            so_scope: Vec::new(),
            fo_slots: 0,
            so_slots: 0,
            rel_index: &self.rel_index,
        };
        let mut free_fo = Vec::new();
        for name in &free_fo_names {
            let slot = comp.fo_slots as u32;
            comp.fo_slots += 1;
            comp.fo_scope.push((name.clone(), slot));
            free_fo.push((name.clone(), slot));
        }
        let mut free_so = Vec::new();
        for name in &free_so_names {
            let slot = comp.so_slots as u32;
            comp.so_slots += 1;
            comp.so_scope.push((name.clone(), slot));
            free_so.push((name.clone(), slot));
        }
        let (root, _, _) = comp.emit(formula)?;
        // memoize only quantifier nodes with few key slots; keys pack
        // element indices in 16 bits each
        let packable = self.universe.len() <= 0xffff;
        let memo = comp
            .nodes
            .iter()
            .zip(&comp.memo_fo)
            .map(|(node, plan)| match (node, plan) {
                (CNode::ExistsFO { .. } | CNode::ExistsSO { .. }, Some(slots))
                    if packable && slots.len() <= 4 =>
                {
                    Memo::Key(slots.clone())
                }
                _ => Memo::No,
            })
            .collect();
        let program = Compiled {
            nodes: comp.nodes,
            memo,
            root,
            free_fo,
            free_so,
            fo_slots: comp.fo_slots,
            so_slots: comp.so_slots,
            needs_so: has_so_quantifier(formula) || !free_so_names.is_empty(),
        };
        let pid = self.programs.len();
        self.programs.push(program);
        self.compiled.insert(key, pid);
        Ok(pid)
    }
}

struct Run<'a> {
    program: &'a Compiled,
    pid: u32,
    n: usize,
    rel_data: &'a [RelData],
    memo: &'a mut HashMap<(u32, u32, u64), bool>,
}

impl<'a> Run<'a> {
    fn eval(&mut self, node: u32, fo_env: &mut [u32], so_env: &mut [u64]) -> bool {
        let memo_key = match &self.program.memo[node as usize] {
            Memo::No => None,
            Memo::Key(slots) => {
                let mut key: u64 = 0;
                for (i, s) in slots.iter().enumerate() {
                    key |= (fo_env[*s as usize] as u64 & 0xffff) << (16 * i);
                }
                Some(key)
            }
        };
        if let Some(key) = memo_key {
            if let Some(hit) = self.memo.get(&(self.pid, node, key)) {
                return *hit;
            }
        }
        let value = match &self.program.nodes[node as usize] {
            CNode::Eq(a, b) => fo_env[*a as usize] == fo_env[*b as usize],
            CNode::Rel { rel, args } => {
                let mut tuple = [0u32; 8];
                if args.len() <= 8 {
                    for (i, a) in args.iter().enumerate() {
                        tuple[i] = fo_env[*a as usize];
                    }
                    self.rel_data[*rel as usize].contains(&tuple[..args.len()])
                } else {
                    let long: Vec<u32> =
                        args.iter().map(|a| fo_env[*a as usize]).collect();
                    self.rel_data[*rel as usize].contains(&long)
                }
            }
            CNode::Member { set, x } => so_env[*set as usize] >> fo_env[*x as usize] & 1 == 1,
            CNode::Card { set, q, p } => so_env[*set as usize].count_ones() % *q == *p,
            CNode::Not(inner) => {
                let inner = *inner;
                !self.eval(inner, fo_env, so_env)
            }
            CNode::And(a, b) => {
                let (a, b) = (*a, *b);
                self.eval(a, fo_env, so_env) && self.eval(b, fo_env, so_env)
            }
            CNode::ExistsFO { slot, body } => {
                let (slot, body) = (*slot as usize, *body);
                let mut found = false;
                for i in 0..self.n {
                    fo_env[slot] = i as u32;
                    if self.eval(body, fo_env, so_env) {
                        found = true;
                        break;
                    }
                }
                found
            }
            CNode::ExistsSO { slot, body } => {
                let (slot, body) = (*slot as usize, *body);
                // scan all subsets in a full-period scrambled order so that a
                // witness (or refutation, under negation) with scattered
                // members is reached early on average
                let count: u128 = 1u128 << self.n;
                let wrap: u64 = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
                let mut state: u64 = 0;
                let mut found = false;
                let mut steps: u128 = 0;
                while steps < count {
                    so_env[slot] = state;
                    if self.eval(body, fo_env, so_env) {
                        found = true;
                        break;
                    }
                    state = state.wrapping_mul(5).wrapping_add(1) & wrap;
                    steps += 1;
                }
                found
            }
        };
        if let Some(key) = memo_key {
            self.memo.insert((self.pid, node, key), value);
        }
        value
    }
}

/// One-shot satisfaction under the default bounds.
pub fn satisfies(structure: &Structure, store: &Store, formula: &Formula) -> Result<bool> {
    Evaluator::new(structure).satisfies(store, formula)
}

/// Satisfaction of a sentence.
pub fn models(structure: &Structure, formula: &Formula) -> Result<bool> {
    models_bounded(structure, formula, Limits::default().so_universe_bound)
}

pub fn models_bounded(structure: &Structure, formula: &Formula, so_bound: usize) -> Result<bool> {
    let (fo, so) = free_vars(formula);
    if let Some(x) = fo.iter().chain(so.iter()).next() {
        return Err(Error::NotASentence(x.clone()));
    }
    Evaluator::with_so_bound(structure, so_bound).satisfies(&Store::new(), formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn small_structure(n: u32, rel: &[(&str, usize, Vec<Vec<u32>>)]) -> Structure {
        let mut sig = Signature::new();
        let mut interp = BTreeMap::new();
        for (name, arity, tuples) in rel {
            sig.declare(*name, *arity);
            interp.insert(name.to_string(), tuples.iter().cloned().collect());
        }
        Structure::new(sig, (0..n).collect(), interp).unwrap()
    }

    #[test]
    fn free_vars_cases() {
        let (fo, so) = free_vars(&Formula::eq("x", "y"));
        assert_eq!(fo.len(), 2);
        assert!(so.is_empty());

        let f = Formula::exists_fo("x", Formula::member("X", "x"));
        let (fo, so) = free_vars(&f);
        assert!(fo.is_empty());
        assert_eq!(so, BTreeSet::from(["X".to_string()]));

        let g = Formula::exists_so("X", Formula::card("X", 2, 0).unwrap());
        assert!(g.is_sentence());
    }

    #[test]
    fn satisfies_relation_atom() {
        let s = small_structure(2, &[("r_s1", 1, vec![vec![0]])]);
        let f = Formula::exists_fo("x", Formula::rel("r_s1", vec!["x".into()]));
        assert!(models(&s, &f).unwrap());
    }

    #[test]
    fn source_atom_over_a_real_encoding() {
        use crate::algebra::const_edge;
        use crate::labels::{EdgeLabel, SourceLabel};
        let g = const_edge(
            &EdgeLabel::new("a", 2).unwrap(),
            &[SourceLabel::new("s1").unwrap(), SourceLabel::new("s2").unwrap()],
        )
        .unwrap();
        let st = crate::structure::encode_graph(&g).unwrap();
        let f = Formula::exists_fo("x", Formula::rel("r_s1", vec!["x".into()]));
        assert!(models(&st, &f).unwrap());
    }

    #[test]
    fn card_semantics() {
        let s = small_structure(4, &[]);
        let mut store = Store::new();
        store.so.insert("X".into(), BTreeSet::new());
        assert!(satisfies(&s, &store, &Formula::card("X", 3, 0).unwrap()).unwrap());

        store.so.insert("X".into(), (0..4).collect());
        assert!(!satisfies(&s, &store, &Formula::card("X", 2, 1).unwrap()).unwrap());
        assert!(satisfies(&s, &store, &Formula::card("X", 1, 0).unwrap()).unwrap());
    }

    #[test]
    fn models_on_empty_universe() {
        let s = small_structure(0, &[]);
        let f = Formula::exists_fo("x", Formula::eq("x", "x"));
        assert!(!models(&s, &f).unwrap());
        let s1 = small_structure(1, &[]);
        assert!(models(&s1, &f).unwrap());
    }

    #[test]
    fn models_rejects_non_sentences() {
        let s = small_structure(1, &[]);
        assert!(matches!(
            models(&s, &Formula::eq("x", "y")),
            Err(Error::NotASentence(_))
        ));
    }

    #[test]
    fn card_constructor_validates() {
        assert!(Formula::card("X", 0, 0).is_err());
        assert!(Formula::card("X", 2, 2).is_err());
        assert!(Formula::card("X", 2, 1).is_ok());
    }

    #[test]
    fn so_bound_enforced() {
        let s = small_structure(20, &[]);
        let f = Formula::exists_so("X", Formula::card("X", 2, 0).unwrap());
        assert!(matches!(models(&s, &f), Err(Error::ResourceLimit(_))));
        assert!(models_bounded(&s, &f, 24).unwrap());
    }

    #[test]
    fn unknown_relation_rejected() {
        let s = small_structure(1, &[]);
        let f = Formula::exists_fo("x", Formula::rel("nope", vec!["x".into()]));
        assert!(matches!(models(&s, &f), Err(Error::UnknownRelation(_))));
    }

    #[test]
    fn variable_shadowing() {
        // exists x. rel(x) and (exists x. not rel(x)): needs both witnesses
        let s = small_structure(2, &[("m", 1, vec![vec![0]])]);
        let f = Formula::exists_fo(
            "x",
            Formula::and(
                Formula::rel("m", vec!["x".into()]),
                Formula::exists_fo("x", Formula::not(Formula::rel("m", vec!["x".into()]))),
            ),
        );
        assert!(models(&s, &f).unwrap());
    }

    #[test]
    fn so_quantifier_matches_subset_enumeration() {
        let s = small_structure(4, &[]);
        let f = Formula::exists_so(
            "X",
            Formula::and(
                Formula::card("X", 2, 1).unwrap(),
                Formula::exists_fo("x", Formula::member("X", "x")),
            ),
        );
        assert!(models(&s, &f).unwrap());
        let empty = small_structure(0, &[]);
        assert!(!models(&empty, &f).unwrap());
    }

    #[test]
    fn desugared_connectives() {
        let s = small_structure(2, &[]);
        assert!(models(&s, &Formula::tru()).unwrap());
        assert!(!models(&s, &Formula::fals()).unwrap());
        let all_eq = Formula::forall_fo("x", Formula::forall_fo("y", Formula::eq("x", "y")));
        assert!(!models(&s, &all_eq).unwrap());
        let one = small_structure(1, &[]);
        assert!(models(&one, &all_eq).unwrap());
    }

    #[test]
    fn evaluator_reuse_across_stores() {
        let s = small_structure(3, &[("m", 1, vec![vec![1]])]);
        let f = Formula::rel("m", vec!["x".into()]);
        let mut eval = Evaluator::new(&s);
        for (e, expected) in [(0u32, false), (1, true), (2, false)] {
            let mut store = Store::new();
            store.fo.insert("x".into(), e);
            assert_eq!(eval.satisfies(&store, &f).unwrap(), expected);
        }
    }

    #[test]
    fn unbound_variable_rejected() {
        let s = small_structure(2, &[]);
        let f = Formula::eq("x", "y");
        let mut store = Store::new();
        store.fo.insert("x".into(), 0);
        assert!(matches!(
            satisfies(&s, &store, &f),
            Err(Error::UnboundVariable(_))
        ));
    }
}
