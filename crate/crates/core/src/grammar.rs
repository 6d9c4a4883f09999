//! Graph grammars: bounded least-fixpoint enumeration, bounded membership,
//! the universal grammar of a finite signature, and the product
//! construction filtering a grammar through a finite recognizer.

use crate::algebra::{eval_term, SortSet, Term};
use crate::graph::{is_isomorphic, iso_key, Graph};
use crate::labels::{EdgeLabel, SourceLabel};
use crate::recognizer::FiniteAlgebra;
use crate::{Error, Limits, Result};
use std::collections::{BTreeMap, HashMap};

/// A finite set of rules nonterminal -> term, with a declared sort bound
/// per nonterminal and an overall label budget. Rule terms must stay inside
/// the budget and their sort bound inside the nonterminal's.
#[derive(Clone, Debug)]
pub struct Grammar {
    sort: SortSet,
    nonterminals: BTreeMap<String, SortSet>,
    rules: Vec<(String, Term)>,
    starts: Vec<String>,
}

impl Grammar {
    pub fn new(
        sort: SortSet,
        nonterminals: BTreeMap<String, SortSet>,
        rules: Vec<(String, Term)>,
    ) -> Result<Grammar> {
        for (nt, nt_sort) in &nonterminals {
            if !nt_sort.is_subset(&sort) {
                return Err(Error::InvalidGrammar(format!(
                    "nonterminal `{nt}` declares sort {nt_sort} outside the grammar sort {sort}"
                )));
            }
        }
        for (lhs, term) in &rules {
            let lhs_sort = nonterminals.get(lhs).ok_or_else(|| {
                Error::InvalidGrammar(format!("rule for undeclared nonterminal `{lhs}`"))
            })?;
            let used = term.labels_used();
            if !used.is_subset(&sort) {
                return Err(Error::InvalidGrammar(format!(
                    "rule for `{lhs}` uses source labels {} outside the grammar sort {sort}",
                    used.difference(&sort)
                )));
            }
            let bound = term.sort_bound(&nonterminals)?;
            if !bound.is_subset(lhs_sort) {
                return Err(Error::InvalidGrammar(format!(
                    "rule for `{lhs}` can produce sort {bound}, outside the declared {lhs_sort}"
                )));
            }
        }
        Ok(Grammar { sort, nonterminals, rules, starts: Vec::new() })
    }

    pub fn with_starts(mut self, starts: Vec<String>) -> Result<Grammar> {
        for s in &starts {
            if !self.nonterminals.contains_key(s) {
                return Err(Error::InvalidGrammar(format!(
                    "start symbol `{s}` is not a nonterminal"
                )));
            }
        }
        self.starts = starts;
        Ok(self)
    }

    pub fn sort(&self) -> &SortSet {
        &self.sort
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = (&str, &SortSet)> {
        self.nonterminals.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn rules(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.rules.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn starts(&self) -> &[String] {
        &self.starts
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }
}

/// Graphs derived per nonterminal after a number of fixpoint stages,
/// deduplicated up to isomorphism.
#[derive(Clone, Debug)]
pub struct LanguageSample {
    pub depth: usize,
    pub graphs: BTreeMap<String, Vec<Graph>>,
}

impl LanguageSample {
    pub fn of(&self, nonterminal: &str) -> &[Graph] {
        self.graphs.get(nonterminal).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Union over several nonterminals, deduplicated up to isomorphism.
    pub fn union_of(&self, nonterminals: &[String]) -> Result<Vec<Graph>> {
        let mut out = IsoSet::new(usize::MAX);
        for nt in nonterminals {
            for g in self.of(nt) {
                out.insert(g.clone())?;
            }
        }
        Ok(out.into_vec())
    }
}

/// A set of graphs up to isomorphism, bucketed by a cheap invariant key.
struct IsoSet {
    cap: usize,
    len: usize,
    buckets: HashMap<u64, Vec<Graph>>,
}

impl IsoSet {
    fn new(cap: usize) -> IsoSet {
        IsoSet { cap, len: 0, buckets: HashMap::new() }
    }

    fn insert(&mut self, g: Graph) -> Result<bool> {
        let key = iso_key(&g);
        let bucket = self.buckets.entry(key).or_default();
        for other in bucket.iter() {
            if is_isomorphic(other, &g)? {
                return Ok(false);
            }
        }
        if self.len >= self.cap {
            return Err(Error::ResourceLimit(format!(
                "enumeration exceeded the stage cap of {} graphs",
                self.cap
            )));
        }
        bucket.push(g);
        self.len += 1;
        Ok(true)
    }

    fn contains(&self, g: &Graph) -> Result<bool> {
        let key = iso_key(g);
        if let Some(bucket) = self.buckets.get(&key) {
            for other in bucket {
                if is_isomorphic(other, g)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn into_vec(self) -> Vec<Graph> {
        let mut out: Vec<Graph> = self.buckets.into_values().flatten().collect();
        out.sort_by_key(|g| (g.vertex_count(), g.edge_count(), iso_key(g)));
        out
    }
}

/// Evaluates a rule term under every combination of choices for its
/// nonterminal leaves, drawn from the previous stage.
fn expand(
    term: &Term,
    stage: &BTreeMap<String, Vec<Graph>>,
    out: &mut Vec<Graph>,
) -> Result<()> {
    match term.nonterminals().first() {
        None => {
            out.push(eval_term(term)?);
            Ok(())
        }
        Some(_) => {
            let nts = term.nonterminals();
            let occurrences = nts.len();
            let choices: Vec<&[Graph]> = nts
                .iter()
                .map(|n| stage.get(*n).map(Vec::as_slice).unwrap_or(&[]))
                .collect();
            if choices.iter().any(|c| c.is_empty()) {
                return Ok(());
            }
            let mut picks = vec![0usize; occurrences];
            loop {
                let graphs: Vec<&Graph> =
                    picks.iter().zip(&choices).map(|(i, c)| &c[*i]).collect();
                let mut counter = 0usize;
                out.push(substitute_eval(term, &graphs, &mut counter)?);
                // advance the mixed-radix counter
                let mut pos = occurrences;
                loop {
                    if pos == 0 {
                        return Ok(());
                    }
                    pos -= 1;
                    picks[pos] += 1;
                    if picks[pos] < choices[pos].len() {
                        break;
                    }
                    picks[pos] = 0;
                }
            }
        }
    }
}

/// Evaluates a term whose i-th nonterminal occurrence (in-order) is
/// replaced by the i-th graph.
fn substitute_eval(term: &Term, graphs: &[&Graph], counter: &mut usize) -> Result<Graph> {
    match term {
        Term::Nonterminal(_) => {
            let g = graphs[*counter].clone();
            *counter += 1;
            Ok(g)
        }
        Term::Empty(sort) => Ok(crate::algebra::const_empty(sort)),
        Term::Edge(label, ss) => crate::algebra::const_edge(label, ss),
        Term::Restrict(sort, inner) => Ok(crate::algebra::restrict(
            sort,
            &substitute_eval(inner, graphs, counter)?,
        )),
        Term::Rename(perm, inner) => Ok(crate::algebra::rename(
            perm,
            &substitute_eval(inner, graphs, counter)?,
        )),
        Term::Parallel(a, b) => {
            let left = substitute_eval(a, graphs, counter)?;
            let right = substitute_eval(b, graphs, counter)?;
            Ok(crate::algebra::parallel(&left, &right))
        }
    }
}

/// Fixpoint iteration: stage 0 is empty everywhere, stage d+1 applies every
/// rule with nonterminal choices drawn from stage d. The per-nonterminal
/// sets grow monotonically and are deduplicated up to isomorphism.
pub fn enumerate_language(grammar: &Grammar, depth: usize) -> Result<LanguageSample> {
    enumerate_language_capped(grammar, depth, Limits::default().stage_cap)
}

pub fn enumerate_language_capped(
    grammar: &Grammar,
    depth: usize,
    cap: usize,
) -> Result<LanguageSample> {
    let mut stage: BTreeMap<String, Vec<Graph>> = grammar
        .nonterminals
        .keys()
        .map(|n| (n.clone(), Vec::new()))
        .collect();
    for _ in 0..depth {
        let mut next: BTreeMap<String, IsoSet> = grammar
            .nonterminals
            .keys()
            .map(|n| (n.clone(), IsoSet::new(cap)))
            .collect();
        // stages are cumulative
        for (nt, graphs) in &stage {
            let set = next.get_mut(nt).unwrap();
            for g in graphs {
                set.insert(g.clone())?;
            }
        }
        for (lhs, term) in &grammar.rules {
            let mut produced = Vec::new();
            expand(term, &stage, &mut produced)?;
            let set = next.get_mut(lhs).unwrap();
            for g in produced {
                set.insert(g)?;
            }
        }
        stage = next.into_iter().map(|(n, set)| (n, set.into_vec())).collect();
    }
    Ok(LanguageSample { depth, graphs: stage })
}

/// Bounded membership: true iff `g` is isomorphic to a graph enumerated
/// for the nonterminal within `depth` stages. A false answer is only
/// depth-bounded evidence, not a proof of non-membership.
pub fn member(grammar: &Grammar, nonterminal: &str, g: &Graph, depth: usize) -> Result<bool> {
    let sample = enumerate_language(grammar, depth)?;
    let mut set = IsoSet::new(usize::MAX);
    for h in sample.of(nonterminal) {
        set.insert(h.clone())?;
    }
    set.contains(g)
}

/// The grammar with a single nonterminal generating every graph buildable
/// from the operations over `sort` and the given edge labels: all empty
/// constants over subsets, all edge constants with sources in `sort`,
/// restriction to each subset, renaming by each transposition (identity
/// when the sort has fewer than two labels), and composition.
pub fn universal_grammar(sort: &SortSet, alphabet: &[EdgeLabel]) -> Result<Grammar> {
    let x = "X".to_string();
    let nt = Term::Nonterminal(x.clone());
    let mut rules: Vec<(String, Term)> = Vec::new();
    for tau in sort.subsets() {
        rules.push((x.clone(), Term::Empty(tau)));
    }
    let labels: Vec<SourceLabel> = sort.iter().cloned().collect();
    for label in alphabet {
        for combo in tuples_over(&labels, label.arity()) {
            rules.push((x.clone(), Term::Edge(label.clone(), combo)));
        }
    }
    for tau in sort.subsets() {
        rules.push((x.clone(), Term::Restrict(tau, Box::new(nt.clone()))));
    }
    let mut swaps: Vec<crate::algebra::Permutation> = Vec::new();
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            swaps.push(crate::algebra::Permutation::transposition(a.clone(), b.clone()));
        }
    }
    if swaps.is_empty() {
        swaps.push(crate::algebra::Permutation::identity());
    }
    for p in swaps {
        rules.push((x.clone(), Term::Rename(p, Box::new(nt.clone()))));
    }
    rules.push((
        x.clone(),
        Term::Parallel(Box::new(nt.clone()), Box::new(nt)),
    ));
    Grammar::new(
        sort.clone(),
        BTreeMap::from([(x.clone(), sort.clone())]),
        rules,
    )?
    .with_starts(vec![x])
}

fn tuples_over(labels: &[SourceLabel], len: usize) -> Vec<Vec<SourceLabel>> {
    let mut out: Vec<Vec<SourceLabel>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for prefix in out {
            for l in labels {
                let mut p = prefix.clone();
                p.push(l.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn product_name(nonterminal: &str, element: &str) -> String {
    format!("{nonterminal}@{element}")
}

/// The product construction: nonterminals (U, q) for algebra elements q,
/// with a rule (U, q) -> t[(V_i, q_i)] whenever evaluating t in the algebra
/// with arguments q_i yields q. The start symbols are the pairs of the
/// original start symbols (or all nonterminals when none are designated)
/// with the accepting elements, so the filtered language is the original
/// one cut down to terms the recognizer accepts.
pub fn filter_grammar(
    grammar: &Grammar,
    algebra: &FiniteAlgebra,
    accept: &[String],
) -> Result<Grammar> {
    if !grammar.sort().is_subset(algebra.sort()) {
        return Err(Error::SortMismatch(format!(
            "grammar sort {} is not covered by the algebra sort {}",
            grammar.sort(),
            algebra.sort()
        )));
    }
    for a in accept {
        if !algebra.contains_element(a) {
            return Err(Error::InvalidAlgebra(format!(
                "accepting element `{a}` is not in the carrier"
            )));
        }
    }
    let elements: Vec<String> = algebra.elements().map(|e| e.name).collect();
    let mut nonterminals: BTreeMap<String, SortSet> = BTreeMap::new();
    for (nt, nt_sort) in grammar.nonterminals() {
        for q in &elements {
            let q_sort = algebra.element_sort(q).unwrap();
            if q_sort.is_subset(nt_sort) {
                nonterminals.insert(product_name(nt, q), q_sort.clone());
            }
        }
    }
    let mut rules: Vec<(String, Term)> = Vec::new();
    for (lhs, term) in grammar.rules() {
        let occurrences = term.nonterminals().len();
        for assignment in tuples_over_str(&elements, occurrences) {
            // the i-th occurrence must be a pair that exists
            let nts = term.nonterminals();
            let compatible = assignment.iter().zip(&nts).all(|(q, v)| {
                nonterminals.contains_key(&product_name(v, q))
            });
            if !compatible {
                continue;
            }
            match eval_in_algebra(term, algebra, &assignment, &mut 0) {
                Ok(value) => {
                    let lhs_pair = product_name(lhs, &value);
                    if !nonterminals.contains_key(&lhs_pair) {
                        continue;
                    }
                    let rewritten = rewrite_term(term, &assignment, &mut 0);
                    rules.push((lhs_pair, rewritten));
                }
                Err(Error::MissingTableEntry(_)) | Err(Error::SortMismatch(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let base_starts: Vec<String> = if grammar.starts().is_empty() {
        grammar.nonterminals().map(|(n, _)| n.to_string()).collect()
    } else {
        grammar.starts().to_vec()
    };
    let starts: Vec<String> = base_starts
        .iter()
        .flat_map(|nt| accept.iter().map(move |q| product_name(nt, q)))
        .filter(|name| nonterminals.contains_key(name))
        .collect();
    Grammar::new(grammar.sort().clone(), nonterminals, rules)?.with_starts(starts)
}

fn tuples_over_str(items: &[String], len: usize) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for prefix in out {
            for item in items {
                let mut p = prefix.clone();
                p.push(item.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Evaluates a rule term in the algebra with the i-th nonterminal
/// occurrence standing for the i-th assigned element.
fn eval_in_algebra(
    term: &Term,
    algebra: &FiniteAlgebra,
    assignment: &[String],
    counter: &mut usize,
) -> Result<String> {
    match term {
        Term::Nonterminal(_) => {
            let q = assignment[*counter].clone();
            *counter += 1;
            Ok(q)
        }
        Term::Empty(sort) => algebra.empty_entry(sort),
        Term::Edge(label, ss) => algebra.edge_entry(label, ss),
        Term::Restrict(sort, inner) => {
            let q = eval_in_algebra(inner, algebra, assignment, counter)?;
            algebra.restrict_entry(sort, &q)
        }
        Term::Rename(perm, inner) => {
            let q = eval_in_algebra(inner, algebra, assignment, counter)?;
            algebra.rename_entry(perm, &q)
        }
        Term::Parallel(a, b) => {
            let left = eval_in_algebra(a, algebra, assignment, counter)?;
            let right = eval_in_algebra(b, algebra, assignment, counter)?;
            algebra.par_entry(&left, &right)
        }
    }
}

/// Replaces the i-th nonterminal occurrence with its product name.
fn rewrite_term(term: &Term, assignment: &[String], counter: &mut usize) -> Term {
    match term {
        Term::Nonterminal(v) => {
            let q = &assignment[*counter];
            *counter += 1;
            Term::Nonterminal(product_name(v, q))
        }
        Term::Empty(_) | Term::Edge(..) => term.clone(),
        Term::Restrict(sort, inner) => Term::Restrict(
            sort.clone(),
            Box::new(rewrite_term(inner, assignment, counter)),
        ),
        Term::Rename(perm, inner) => Term::Rename(
            perm.clone(),
            Box::new(rewrite_term(inner, assignment, counter)),
        ),
        Term::Parallel(a, b) => {
            let left = rewrite_term(a, assignment, counter);
            let right = rewrite_term(b, assignment, counter);
            Term::Parallel(Box::new(left), Box::new(right))
        }
    }
}
