//! Finite algebras over the graph operations, used as recognizers:
//! homomorphic evaluation of ground terms through explicit operation
//! tables, acceptance against a designated element set, and bounded
//! syntactic-congruence testing through restricted contexts.

use crate::algebra::{parallel, restrict, rename, Permutation, SortSet, Term};
use crate::graph::Graph;
use crate::labels::{EdgeLabel, SourceLabel};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// A carrier element name together with its sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub sort: SortSet,
}

/// A finite algebra interpreting graph operation symbols by lookup tables.
/// Tables must be well-sorted; entries outside the declared carrier are
/// rejected at construction, missing entries surface at evaluation time.
#[derive(Clone, Debug, Default)]
pub struct FiniteAlgebra {
    sort: SortSet,
    elements: BTreeMap<String, SortSet>,
    empties: BTreeMap<SortSet, String>,
    edges: BTreeMap<(EdgeLabel, Vec<SourceLabel>), String>,
    restricts: BTreeMap<(SortSet, String), String>,
    renames: BTreeMap<(Permutation, String), String>,
    par: BTreeMap<(String, String), String>,
}

impl FiniteAlgebra {
    pub fn new(sort: SortSet) -> FiniteAlgebra {
        FiniteAlgebra { sort, ..FiniteAlgebra::default() }
    }

    pub fn sort(&self) -> &SortSet {
        &self.sort
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.elements
            .iter()
            .map(|(name, sort)| Element { name: name.clone(), sort: sort.clone() })
    }

    pub fn element_sort(&self, name: &str) -> Option<&SortSet> {
        self.elements.get(name)
    }

    pub fn contains_element(&self, name: &str) -> bool {
        self.elements.contains_key(name)
    }

    pub fn declare_element(&mut self, name: impl Into<String>, sort: SortSet) -> Result<()> {
        let name = name.into();
        if !sort.is_subset(&self.sort) {
            return Err(Error::InvalidAlgebra(format!(
                "element `{name}` has sort {sort} outside the algebra sort {}",
                self.sort
            )));
        }
        if self.elements.insert(name.clone(), sort).is_some() {
            return Err(Error::InvalidAlgebra(format!("element `{name}` declared twice")));
        }
        Ok(())
    }

    fn check_element(&self, name: &str) -> Result<&SortSet> {
        self.elements
            .get(name)
            .ok_or_else(|| Error::InvalidAlgebra(format!("undeclared element `{name}`")))
    }

    pub fn set_empty(&mut self, sort: SortSet, result: impl Into<String>) -> Result<()> {
        let result = result.into();
        let rs = self.check_element(&result)?;
        if *rs != sort {
            return Err(Error::InvalidAlgebra(format!(
                "empty constant of sort {sort} maps to `{result}` of sort {rs}"
            )));
        }
        self.empties.insert(sort, result);
        Ok(())
    }

    pub fn set_edge(
        &mut self,
        label: EdgeLabel,
        ss: Vec<SourceLabel>,
        result: impl Into<String>,
    ) -> Result<()> {
        let result = result.into();
        let rs = self.check_element(&result)?;
        let expected = SortSet::from_iter(ss.iter().cloned());
        if *rs != expected {
            return Err(Error::InvalidAlgebra(format!(
                "edge constant over {expected} maps to `{result}` of sort {rs}"
            )));
        }
        self.edges.insert((label, ss), result);
        Ok(())
    }

    pub fn set_restrict(
        &mut self,
        sort: SortSet,
        arg: impl Into<String>,
        result: impl Into<String>,
    ) -> Result<()> {
        let (arg, result) = (arg.into(), result.into());
        let arg_sort = self.check_element(&arg)?.clone();
        let rs = self.check_element(&result)?;
        let expected = sort.intersection(&arg_sort);
        if *rs != expected {
            return Err(Error::InvalidAlgebra(format!(
                "restrict to {sort} on `{arg}` must land in sort {expected}, `{result}` has {rs}"
            )));
        }
        self.restricts.insert((sort, arg), result);
        Ok(())
    }

    pub fn set_rename(
        &mut self,
        perm: Permutation,
        arg: impl Into<String>,
        result: impl Into<String>,
    ) -> Result<()> {
        let (arg, result) = (arg.into(), result.into());
        let arg_sort = self.check_element(&arg)?.clone();
        let rs = self.check_element(&result)?;
        let expected = perm.preimage(&arg_sort);
        if *rs != expected {
            return Err(Error::InvalidAlgebra(format!(
                "rename on `{arg}` must land in sort {expected}, `{result}` has {rs}"
            )));
        }
        self.renames.insert((perm, arg), result);
        Ok(())
    }

    pub fn set_par(
        &mut self,
        left: impl Into<String>,
        right: impl Into<String>,
        result: impl Into<String>,
    ) -> Result<()> {
        let (left, right, result) = (left.into(), right.into(), result.into());
        let ls = self.check_element(&left)?.clone();
        let rs_arg = self.check_element(&right)?.clone();
        let rs = self.check_element(&result)?;
        let expected = ls.union(&rs_arg);
        if *rs != expected {
            return Err(Error::InvalidAlgebra(format!(
                "composition of `{left}` and `{right}` must land in sort {expected}, `{result}` has {rs}"
            )));
        }
        self.par.insert((left, right), result);
        Ok(())
    }

    pub fn empty_entry(&self, sort: &SortSet) -> Result<String> {
        self.empties.get(sort).cloned().ok_or_else(|| {
            Error::MissingTableEntry(format!("empty constant of sort {sort}"))
        })
    }

    pub fn edge_entry(&self, label: &EdgeLabel, ss: &[SourceLabel]) -> Result<String> {
        self.edges
            .get(&(label.clone(), ss.to_vec()))
            .cloned()
            .ok_or_else(|| Error::MissingTableEntry(format!("edge constant `{label}`")))
    }

    pub fn restrict_entry(&self, sort: &SortSet, arg: &str) -> Result<String> {
        self.restricts
            .get(&(sort.clone(), arg.to_string()))
            .cloned()
            .ok_or_else(|| {
                Error::MissingTableEntry(format!("restrict to {sort} on `{arg}`"))
            })
    }

    pub fn rename_entry(&self, perm: &Permutation, arg: &str) -> Result<String> {
        self.renames
            .get(&(perm.clone(), arg.to_string()))
            .cloned()
            .ok_or_else(|| Error::MissingTableEntry(format!("rename on `{arg}`")))
    }

    pub fn par_entry(&self, left: &str, right: &str) -> Result<String> {
        self.par
            .get(&(left.to_string(), right.to_string()))
            .cloned()
            .ok_or_else(|| {
                Error::MissingTableEntry(format!("composition of `{left}` and `{right}`"))
            })
    }

    /// Whether the composition table is symmetric under argument swap.
    pub fn par_table_commutative(&self) -> bool {
        self.par.iter().all(|((a, b), r)| {
            self.par.get(&(b.clone(), a.clone())).map(String::as_str) == Some(r)
        })
    }
}

/// Bottom-up table evaluation of a ground term.
pub fn hom_eval(algebra: &FiniteAlgebra, term: &Term) -> Result<String> {
    match term {
        Term::Empty(sort) => algebra.empty_entry(sort),
        Term::Edge(label, ss) => algebra.edge_entry(label, ss),
        Term::Restrict(sort, inner) => {
            let arg = hom_eval(algebra, inner)?;
            algebra.restrict_entry(sort, &arg)
        }
        Term::Rename(perm, inner) => {
            let arg = hom_eval(algebra, inner)?;
            algebra.rename_entry(perm, &arg)
        }
        Term::Parallel(a, b) => {
            let left = hom_eval(algebra, a)?;
            let right = hom_eval(algebra, b)?;
            algebra.par_entry(&left, &right)
        }
        Term::Nonterminal(n) => Err(Error::NonGround(n.clone())),
    }
}

/// Whether the term's value lands in the accepting set.
pub fn accepts(algebra: &FiniteAlgebra, accept: &[String], term: &Term) -> Result<bool> {
    let value = hom_eval(algebra, term)?;
    Ok(accept.contains(&value))
}

/// Outcome of the bounded congruence test.
#[derive(Clone, Debug)]
pub enum CongruenceVerdict {
    /// No tested context separates the two graphs.
    Indistinguishable,
    /// A separating context: the language answers differ on
    /// rename(restrict(g_i composed with the context)).
    DistinguishedBy {
        context: Graph,
        restrict_to: SortSet,
        rename_by: Option<Permutation>,
    },
}

impl CongruenceVerdict {
    pub fn is_congruent(&self) -> bool {
        matches!(self, CongruenceVerdict::Indistinguishable)
    }
}

impl fmt::Display for CongruenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CongruenceVerdict::Indistinguishable => write!(f, "indistinguishable"),
            CongruenceVerdict::DistinguishedBy { restrict_to, rename_by, .. } => {
                write!(f, "distinguished by a context with restriction to {restrict_to}")?;
                if let Some(p) = rename_by {
                    if !p.is_identity() {
                        write!(f, " and a renaming of {}", p.support())?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Bounded refutation of syntactic congruence: for each context graph G and
/// each restriction target inside `sort_limit`, compare membership of
/// `restrict(tau, g1 composed with G)` and the same for `g2`. A
/// `DistinguishedBy` answer is a proof of inequivalence; `Indistinguishable`
/// only says the tested contexts cannot tell the graphs apart.
///
/// With `include_rename`, contexts of the shape rename after restrict are
/// tested too, quantifying over the permutations of `sort_limit`; for
/// languages of sourceless graphs the rename component is redundant and off
/// by default.
pub fn congruent_bounded(
    member: &mut dyn FnMut(&Graph) -> Result<bool>,
    g1: &Graph,
    g2: &Graph,
    contexts: &[Graph],
    sort_limit: &SortSet,
    include_rename: bool,
) -> Result<CongruenceVerdict> {
    if g1.sort() != g2.sort() {
        return Err(Error::SortMismatch(format!(
            "congruence is defined on equal sorts: {} vs {}",
            g1.sort(),
            g2.sort()
        )));
    }
    let perms: Vec<Permutation> = if include_rename {
        permutations_of(sort_limit)
    } else {
        vec![Permutation::identity()]
    };
    for context in contexts {
        let left = parallel(g1, context);
        let right = parallel(g2, context);
        for tau in sort_limit.subsets() {
            let l = restrict(&tau, &left);
            let r = restrict(&tau, &right);
            for perm in &perms {
                let (l, r) = if perm.is_identity() {
                    (l.clone(), r.clone())
                } else {
                    (rename(perm, &l), rename(perm, &r))
                };
                if member(&l)? != member(&r)? {
                    return Ok(CongruenceVerdict::DistinguishedBy {
                        context: context.clone(),
                        restrict_to: tau,
                        rename_by: if include_rename { Some(perm.clone()) } else { None },
                    });
                }
            }
        }
    }
    Ok(CongruenceVerdict::Indistinguishable)
}

/// All permutations of the given labels, identity first.
pub fn permutations_of(sort: &SortSet) -> Vec<Permutation> {
    let labels: Vec<SourceLabel> = sort.iter().cloned().collect();
    let mut images: Vec<Vec<SourceLabel>> = vec![Vec::new()];
    for _ in 0..labels.len() {
        let mut next = Vec::new();
        for prefix in images {
            for l in &labels {
                if !prefix.contains(l) {
                    let mut p = prefix.clone();
                    p.push(l.clone());
                    next.push(p);
                }
            }
        }
        images = next;
    }
    let mut out: Vec<Permutation> = images
        .into_iter()
        .map(|img| {
            let map: BTreeMap<SourceLabel, SourceLabel> =
                labels.iter().cloned().zip(img).collect();
            Permutation::from_mapping(map).expect("images are permutations")
        })
        .collect();
    out.sort_by_key(|p| !p.is_identity());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{const_empty, eval_term};

    fn s(name: &str) -> SourceLabel {
        SourceLabel::new(name).unwrap()
    }

    fn lbl(name: &str, arity: usize) -> EdgeLabel {
        EdgeLabel::new(name, arity).unwrap()
    }

    /// Edge-count parity over the sorts {} and {s1}, with elements
    /// even0/odd0 (sort {}) and even1/odd1 (sort {s1}).
    fn parity_algebra() -> FiniteAlgebra {
        let tau = SortSet::singleton(s("s1"));
        let mut alg = FiniteAlgebra::new(tau.clone());
        let empty = SortSet::empty();
        alg.declare_element("even0", empty.clone()).unwrap();
        alg.declare_element("odd0", empty.clone()).unwrap();
        alg.declare_element("even1", tau.clone()).unwrap();
        alg.declare_element("odd1", tau.clone()).unwrap();
        alg.set_empty(empty.clone(), "even0").unwrap();
        alg.set_empty(tau.clone(), "even1").unwrap();
        alg.set_edge(lbl("a", 1), vec![s("s1")], "odd1").unwrap();
        let parity = |name: &str| name.starts_with("odd");
        let sorted = |odd: bool, one: bool| -> String {
            format!("{}{}", if odd { "odd" } else { "even" }, if one { "1" } else { "0" })
        };
        let names = ["even0", "odd0", "even1", "odd1"];
        for a in names {
            for b in names {
                let odd = parity(a) ^ parity(b);
                let one = a.ends_with('1') || b.ends_with('1');
                alg.set_par(a, b, sorted(odd, one)).unwrap();
            }
            let odd = parity(a);
            let one = a.ends_with('1');
            alg.set_restrict(empty.clone(), a, sorted(odd, false)).unwrap();
            alg.set_restrict(tau.clone(), a, sorted(odd, one)).unwrap();
            alg.set_rename(Permutation::identity(), a, a).unwrap();
        }
        alg
    }

    #[test]
    fn parity_hom_eval() {
        let alg = parity_algebra();
        let even = hom_eval(&alg, &Term::Empty(SortSet::singleton(s("s1")))).unwrap();
        assert_eq!(even, "even1");
        let odd = hom_eval(&alg, &Term::Edge(lbl("a", 1), vec![s("s1")])).unwrap();
        assert_eq!(odd, "odd1");
        let two = Term::Parallel(
            Box::new(Term::Edge(lbl("a", 1), vec![s("s1")])),
            Box::new(Term::Edge(lbl("a", 1), vec![s("s1")])),
        );
        assert_eq!(hom_eval(&alg, &two).unwrap(), "even1");
        assert!(alg.par_table_commutative());
    }

    #[test]
    fn accepts_cases() {
        let alg = parity_algebra();
        let two = Term::Parallel(
            Box::new(Term::Edge(lbl("a", 1), vec![s("s1")])),
            Box::new(Term::Edge(lbl("a", 1), vec![s("s1")])),
        );
        assert!(accepts(&alg, &["even1".into()], &two).unwrap());
        assert!(!accepts(&alg, &[], &two).unwrap());
        let all: Vec<String> = alg.elements().map(|e| e.name).collect();
        assert!(accepts(&alg, &all, &two).unwrap());
    }

    #[test]
    fn missing_entry_reported() {
        let alg = parity_algebra();
        let t = Term::Empty(SortSet::from_iter([s("s1"), s("s2")]));
        assert!(matches!(hom_eval(&alg, &t), Err(Error::MissingTableEntry(_))));
    }

    #[test]
    fn congruence_parity_language() {
        // L = sourceless graphs with an even number of edges
        let mut member = |g: &Graph| -> Result<bool> {
            Ok(g.sort().is_empty() && g.edge_count().is_multiple_of(2))
        };
        let tau = SortSet::singleton(s("s1"));
        let zero_s1 = const_empty(&tau);
        let one_edge = eval_term(&Term::Edge(lbl("a", 1), vec![s("s1")])).unwrap();
        let two_edges = eval_term(&Term::Parallel(
            Box::new(Term::Edge(lbl("a", 1), vec![s("s1")])),
            Box::new(Term::Edge(lbl("a", 1), vec![s("s1")])),
        ))
        .unwrap();
        let contexts = vec![zero_s1.clone(), one_edge.clone(), two_edges.clone()];

        // zero edges vs two edges: same parity, indistinguishable here
        let v = congruent_bounded(&mut member, &zero_s1, &two_edges, &contexts, &tau, false)
            .unwrap();
        assert!(v.is_congruent());

        // zero vs one edge: parities differ
        let v = congruent_bounded(&mut member, &zero_s1, &one_edge, &contexts, &tau, false)
            .unwrap();
        match v {
            CongruenceVerdict::DistinguishedBy { context, restrict_to, .. } => {
                assert!(crate::graph::is_isomorphic(&context, &zero_s1).unwrap());
                assert!(restrict_to.is_empty());
            }
            other => panic!("expected a separation, got {other}"),
        }

        // reflexivity
        let v = congruent_bounded(&mut member, &one_edge, &one_edge, &contexts, &tau, false)
            .unwrap();
        assert!(v.is_congruent());
    }

    #[test]
    fn sort_mismatch_rejected() {
        let mut member = |_: &Graph| Ok(true);
        let g1 = const_empty(&SortSet::singleton(s("s1")));
        let g2 = const_empty(&SortSet::empty());
        assert!(congruent_bounded(&mut member, &g1, &g2, &[], &SortSet::empty(), false).is_err());
    }

    #[test]
    fn permutations_count() {
        let tau = SortSet::from_iter([s("s1"), s("s2"), s("s3")]);
        let ps = permutations_of(&tau);
        assert_eq!(ps.len(), 6);
        assert!(ps[0].is_identity());
    }
}
