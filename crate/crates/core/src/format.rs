//! Textual file formats. Everything is line-oriented s-expressions with
//! `;` comments, UTF-8 only:
//!
//! - graph: `(graph (vertices v1 ...) (edges (e1 a v1 v2) ...) (sources (s1 v1) ...))`
//! - term: `(par t1 t2)`, `(restrict (s1 ...) t)`, `(rename ((s1 s2) ...) t)`,
//!   `(empty (s1 ...))`, `(edge a s1 ...)`, `(nt X)`
//! - parse tree: `(parsetree (sort (s1 ...)) (node (u <label>) (b <label> <node>) ...))`
//! - decomposition: `(td (node n1 (bag v1 ...)) ... (parent n1 n2) (root n1))`
//! - structure: `(structure (signature (r 2) ...) (universe u1 ...) (rel r (u1 u2) ...))`
//! - formula file: `(mso (signature (r 2) ...) <formula>)`
//! - scheme: `(scheme (input ...) (output ...) (copies k) (params X ...)
//!   (domain f) (layer i f) (out q (i1 ...) f))`
//! - grammar: `(grammar (sort (s1 ...)) (nonterminal X (s1 ...)) (rule X t) (start X ...))`
//! - algebra: `(algebra (sort (s1 ...)) (carrier (s1 ...) e1 ...) (op <sym> ((args) -> e) ...))`

use crate::algebra::{Permutation, SortSet, Term};
use crate::decomposition::TreeDecomposition;
use crate::grammar::Grammar;
use crate::graph::{Graph, GraphBuilder, VertexId};
use crate::labels::{EdgeLabel, SourceLabel};
use crate::logic::Formula;
use crate::recognizer::FiniteAlgebra;
use crate::sexpr::{parse_many, parse_one, pretty, Sexpr};
use crate::structure::{ElemId, Signature, Structure};
use crate::transduction::TransductionScheme;
use crate::tree::{ParseLabel, ParseTree, Tree};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

fn atom(s: impl Into<String>) -> Sexpr {
    Sexpr::atom(s)
}

fn list(items: Vec<Sexpr>) -> Sexpr {
    Sexpr::list(items)
}

fn tagged(tag: &str, mut items: Vec<Sexpr>) -> Sexpr {
    let mut all = vec![atom(tag)];
    all.append(&mut items);
    list(all)
}

// --------------------------------------------------------------------------
// sorts, labels, permutations
// --------------------------------------------------------------------------

fn sort_to_sexpr(sort: &SortSet) -> Sexpr {
    list(sort.iter().map(|s| atom(s.name())).collect())
}

fn sort_from_sexpr(e: &Sexpr) -> Result<SortSet> {
    let items = e.as_list()?;
    let mut sort = SortSet::empty();
    for i in items {
        sort.insert(SourceLabel::new(i.as_atom()?)?);
    }
    Ok(sort)
}

fn perm_to_sexpr(p: &Permutation) -> Sexpr {
    list(
        p.to_transpositions()
            .into_iter()
            .map(|(a, b)| list(vec![atom(a.name()), atom(b.name())]))
            .collect(),
    )
}

fn perm_from_sexpr(e: &Sexpr) -> Result<Permutation> {
    let mut swaps = Vec::new();
    for pair in e.as_list()? {
        let items = pair.as_list()?;
        if items.len() != 2 {
            return Err(Error::Syntax("a transposition is a pair of labels".into()));
        }
        swaps.push((
            SourceLabel::new(items[0].as_atom()?)?,
            SourceLabel::new(items[1].as_atom()?)?,
        ));
    }
    Ok(Permutation::from_transpositions(&swaps))
}

// --------------------------------------------------------------------------
// graphs
// --------------------------------------------------------------------------

pub fn graph_to_text(g: &Graph) -> String {
    let vertices: Vec<Sexpr> = g.vertices().map(|v| atom(format!("v{v}"))).collect();
    let edges: Vec<Sexpr> = g
        .edges()
        .map(|(id, e)| {
            let mut items = vec![atom(format!("e{id}")), atom(e.label.name())];
            items.extend(e.attach.iter().map(|v| atom(format!("v{v}"))));
            list(items)
        })
        .collect();
    let sources: Vec<Sexpr> = g
        .sources()
        .map(|(s, v)| list(vec![atom(s.name()), atom(format!("v{v}"))]))
        .collect();
    let expr = tagged(
        "graph",
        vec![
            tagged("vertices", vertices),
            tagged("edges", edges),
            tagged("sources", sources),
        ],
    );
    pretty(&expr) + "\n"
}

pub fn graph_from_text(text: &str) -> Result<Graph> {
    graph_from_sexpr(&parse_one(text)?)
}

fn graph_from_sexpr(e: &Sexpr) -> Result<Graph> {
    let sections = e.as_tagged("graph")?;
    let mut builder = GraphBuilder::new();
    let mut vertex_ids: BTreeMap<String, VertexId> = BTreeMap::new();
    let mut edge_names: BTreeSet<String> = BTreeSet::new();
    let mut label_arity: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen_sources: BTreeSet<String> = BTreeSet::new();
    for section in sections {
        match section.head() {
            Some("vertices") => {
                for v in section.as_tagged("vertices")? {
                    let name = v.as_atom()?.to_string();
                    if vertex_ids.contains_key(&name) {
                        return Err(Error::Syntax(format!("duplicate vertex `{name}`")));
                    }
                    let id = builder.add_vertex();
                    vertex_ids.insert(name, id);
                }
            }
            Some("edges") => {
                for edge in section.as_tagged("edges")? {
                    let items = edge.as_list()?;
                    if items.len() < 3 {
                        return Err(Error::Syntax(
                            "an edge is (<id> <label> <vertex>...)".into(),
                        ));
                    }
                    let ename = items[0].as_atom()?.to_string();
                    if !edge_names.insert(ename.clone()) {
                        return Err(Error::Syntax(format!("duplicate edge `{ename}`")));
                    }
                    let label_name = items[1].as_atom()?.to_string();
                    let attach = items[2..]
                        .iter()
                        .map(|v| {
                            let name = v.as_atom()?;
                            vertex_ids.get(name).copied().ok_or_else(|| {
                                Error::Syntax(format!("unknown vertex `{name}`"))
                            })
                        })
                        .collect::<Result<Vec<VertexId>>>()?;
                    let arity = attach.len();
                    if let Some(prev) = label_arity.insert(label_name.clone(), arity) {
                        if prev != arity {
                            return Err(Error::Syntax(format!(
                                "label `{label_name}` used with arities {prev} and {arity}"
                            )));
                        }
                    }
                    builder.add_edge(EdgeLabel::new(label_name, arity)?, attach);
                }
            }
            Some("sources") => {
                for source in section.as_tagged("sources")? {
                    let items = source.as_list()?;
                    if items.len() != 2 {
                        return Err(Error::Syntax("a source is (<label> <vertex>)".into()));
                    }
                    let sname = items[0].as_atom()?.to_string();
                    if !seen_sources.insert(sname.clone()) {
                        return Err(Error::Syntax(format!("duplicate source `{sname}`")));
                    }
                    let vname = items[1].as_atom()?;
                    let v = vertex_ids.get(vname).copied().ok_or_else(|| {
                        Error::Syntax(format!("unknown vertex `{vname}`"))
                    })?;
                    builder.set_source(SourceLabel::new(sname)?, v);
                }
            }
            other => {
                return Err(Error::Syntax(format!(
                    "unknown graph section `{}`",
                    other.unwrap_or("?")
                )))
            }
        }
    }
    builder.finish()
}

/// DOT rendering: vertices as circles, hyperedges as boxes with numbered
/// connectors.
pub fn graph_to_dot(g: &Graph) -> String {
    let mut out = String::from("digraph g {\n");
    for v in g.vertices() {
        let label = match g.source_label_of(v) {
            Some(s) => format!("v{v} ({s})"),
            None => format!("v{v}"),
        };
        out.push_str(&format!("  v{v} [shape=circle, label=\"{label}\"];\n"));
    }
    for (id, e) in g.edges() {
        out.push_str(&format!(
            "  e{id} [shape=box, label=\"{}\"];\n",
            e.label.name()
        ));
        for (pos, v) in e.attach.iter().enumerate() {
            out.push_str(&format!("  e{id} -> v{v} [label=\"{}\"];\n", pos + 1));
        }
    }
    out.push_str("}\n");
    out
}

// --------------------------------------------------------------------------
// terms
// --------------------------------------------------------------------------

pub fn term_to_sexpr(t: &Term) -> Sexpr {
    match t {
        Term::Empty(sort) => tagged("empty", vec![sort_to_sexpr(sort)]),
        Term::Edge(label, ss) => {
            let mut items = vec![atom(label.name())];
            items.extend(ss.iter().map(|s| atom(s.name())));
            tagged("edge", items)
        }
        Term::Restrict(sort, inner) => {
            tagged("restrict", vec![sort_to_sexpr(sort), term_to_sexpr(inner)])
        }
        Term::Rename(p, inner) => {
            tagged("rename", vec![perm_to_sexpr(p), term_to_sexpr(inner)])
        }
        Term::Parallel(a, b) => tagged("par", vec![term_to_sexpr(a), term_to_sexpr(b)]),
        Term::Nonterminal(n) => tagged("nt", vec![atom(n)]),
    }
}

pub fn term_to_text(t: &Term) -> String {
    pretty(&term_to_sexpr(t)) + "\n"
}

pub fn term_from_sexpr(e: &Sexpr) -> Result<Term> {
    let items = e.as_list()?;
    let head = e
        .head()
        .ok_or_else(|| Error::Syntax("a term starts with an operation name".into()))?;
    match head {
        "empty" => {
            if items.len() != 2 {
                return Err(Error::Syntax("(empty (<labels>))".into()));
            }
            Ok(Term::Empty(sort_from_sexpr(&items[1])?))
        }
        "edge" => {
            if items.len() < 2 {
                return Err(Error::Syntax("(edge <label> <source>...)".into()));
            }
            let ss = items[2..]
                .iter()
                .map(|s| SourceLabel::new(s.as_atom()?))
                .collect::<Result<Vec<_>>>()?;
            let label = EdgeLabel::new(items[1].as_atom()?, ss.len())?;
            Ok(Term::Edge(label, ss))
        }
        "restrict" => {
            if items.len() != 3 {
                return Err(Error::Syntax("(restrict (<labels>) <term>)".into()));
            }
            Ok(Term::Restrict(
                sort_from_sexpr(&items[1])?,
                Box::new(term_from_sexpr(&items[2])?),
            ))
        }
        "rename" => {
            if items.len() != 3 {
                return Err(Error::Syntax("(rename ((a b)...) <term>)".into()));
            }
            Ok(Term::Rename(
                perm_from_sexpr(&items[1])?,
                Box::new(term_from_sexpr(&items[2])?),
            ))
        }
        "par" => {
            if items.len() != 3 {
                return Err(Error::Syntax("(par <term> <term>)".into()));
            }
            Ok(Term::Parallel(
                Box::new(term_from_sexpr(&items[1])?),
                Box::new(term_from_sexpr(&items[2])?),
            ))
        }
        "nt" => {
            if items.len() != 2 {
                return Err(Error::Syntax("(nt <name>)".into()));
            }
            Ok(Term::Nonterminal(items[1].as_atom()?.to_string()))
        }
        other => Err(Error::Syntax(format!("unknown term operation `{other}`"))),
    }
}

pub fn term_from_text(text: &str) -> Result<Term> {
    term_from_sexpr(&parse_one(text)?)
}

// --------------------------------------------------------------------------
// parse trees
// --------------------------------------------------------------------------

fn parse_label_to_sexpr(l: &ParseLabel) -> Sexpr {
    match l {
        ParseLabel::EmptyU(sort) => tagged("empty", vec![sort_to_sexpr(sort)]),
        ParseLabel::EdgeU(label, ss) => {
            let mut items = vec![atom(label.name())];
            items.extend(ss.iter().map(|s| atom(s.name())));
            tagged("edge", items)
        }
        ParseLabel::RestrictB(sort) => tagged("restrict", vec![sort_to_sexpr(sort)]),
        ParseLabel::RenameB(p) => tagged("rename", vec![perm_to_sexpr(p)]),
    }
}

fn parse_label_from_sexpr(e: &Sexpr) -> Result<ParseLabel> {
    let items = e.as_list()?;
    match e.head() {
        Some("empty") if items.len() == 2 => {
            Ok(ParseLabel::EmptyU(sort_from_sexpr(&items[1])?))
        }
        Some("edge") if items.len() >= 2 => {
            let ss = items[2..]
                .iter()
                .map(|s| SourceLabel::new(s.as_atom()?))
                .collect::<Result<Vec<_>>>()?;
            Ok(ParseLabel::EdgeU(
                EdgeLabel::new(items[1].as_atom()?, ss.len())?,
                ss,
            ))
        }
        Some("restrict") if items.len() == 2 => {
            Ok(ParseLabel::RestrictB(sort_from_sexpr(&items[1])?))
        }
        Some("rename") if items.len() == 2 => {
            Ok(ParseLabel::RenameB(perm_from_sexpr(&items[1])?))
        }
        _ => Err(Error::Syntax(format!("unknown parse symbol `{e}`"))),
    }
}

fn parse_tree_node_to_sexpr(pt: &ParseTree, v: VertexId) -> Sexpr {
    let tree = pt.tree();
    let mut unaries: Vec<(String, Sexpr)> = Vec::new();
    let mut binaries: Vec<(String, String, Sexpr)> = Vec::new();
    for (id, e) in tree.graph().edges() {
        if e.attach.len() == 1 && e.attach[0] == v {
            let label = pt.label(id);
            unaries.push((
                label.to_edge_label().name().to_string(),
                tagged("u", vec![parse_label_to_sexpr(label)]),
            ));
        }
        if e.attach.len() == 2 && e.attach[0] == v {
            let label = pt.label(id);
            let sub = parse_tree_node_to_sexpr(pt, e.attach[1]);
            binaries.push((
                label.to_edge_label().name().to_string(),
                sub.to_string(),
                tagged("b", vec![parse_label_to_sexpr(label), sub]),
            ));
        }
    }
    unaries.sort_by(|a, b| a.0.cmp(&b.0));
    binaries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut items: Vec<Sexpr> = unaries.into_iter().map(|(_, e)| e).collect();
    items.extend(binaries.into_iter().map(|(_, _, e)| e));
    tagged("node", items)
}

pub fn parse_tree_to_text(pt: &ParseTree) -> String {
    let expr = tagged(
        "parsetree",
        vec![
            tagged("sort", vec![sort_to_sexpr(pt.sort())]),
            parse_tree_node_to_sexpr(pt, pt.tree().root()),
        ],
    );
    pretty(&expr) + "\n"
}

fn parse_tree_node_from_sexpr(e: &Sexpr) -> Result<Tree> {
    let items = e.as_tagged("node")?;
    let mut parts: Vec<Tree> = Vec::new();
    for item in items {
        match item.head() {
            Some("u") => {
                let inner = item.as_tagged("u")?;
                if inner.len() != 1 {
                    return Err(Error::Syntax("(u <label>)".into()));
                }
                let label = parse_label_from_sexpr(&inner[0])?;
                parts.push(Tree::leaf(&label.to_edge_label())?);
            }
            Some("b") => {
                let inner = item.as_tagged("b")?;
                if inner.len() != 2 {
                    return Err(Error::Syntax("(b <label> <node>)".into()));
                }
                let label = parse_label_from_sexpr(&inner[0])?;
                let sub = parse_tree_node_from_sexpr(&inner[1])?;
                parts.push(Tree::append(&label.to_edge_label(), &sub)?);
            }
            _ => return Err(Error::Syntax(format!("unknown node item `{item}`"))),
        }
    }
    parts
        .into_iter()
        .reduce(|acc, t| acc.compose(&t))
        .ok_or_else(|| Error::Syntax("a node needs at least one item".into()))
}

pub fn parse_tree_from_text(text: &str) -> Result<ParseTree> {
    let e = parse_one(text)?;
    let sections = e.as_tagged("parsetree")?;
    if sections.len() != 2 {
        return Err(Error::Syntax("(parsetree (sort ...) (node ...))".into()));
    }
    let sort_items = sections[0].as_tagged("sort")?;
    if sort_items.len() != 1 {
        return Err(Error::Syntax("(sort (<labels>))".into()));
    }
    let sort = sort_from_sexpr(&sort_items[0])?;
    let tree = parse_tree_node_from_sexpr(&sections[1])?;
    ParseTree::new(tree, sort)
}

// --------------------------------------------------------------------------
// tree decompositions
// --------------------------------------------------------------------------

pub fn decomposition_to_text(d: &TreeDecomposition) -> String {
    let mut items: Vec<Sexpr> = Vec::new();
    for n in d.nodes() {
        let bag: Vec<Sexpr> = d
            .bag(n)
            .unwrap()
            .iter()
            .map(|v| atom(format!("v{v}")))
            .collect();
        items.push(tagged(
            "node",
            vec![atom(format!("n{n}")), tagged("bag", bag)],
        ));
    }
    for (child, parent) in d.parent_pairs() {
        items.push(tagged(
            "parent",
            vec![atom(format!("n{parent}")), atom(format!("n{child}"))],
        ));
    }
    items.push(tagged("root", vec![atom(format!("n{}", d.root()))]));
    pretty(&tagged("td", items)) + "\n"
}

/// Decomposition files name graph vertices by the same `v<i>` names the
/// graph file writer emits.
pub fn decomposition_from_text(text: &str, g: &Graph) -> Result<TreeDecomposition> {
    let vertex_by_name: BTreeMap<String, VertexId> =
        g.vertices().map(|v| (format!("v{v}"), v)).collect();
    let e = parse_one(text)?;
    let sections = e.as_tagged("td")?;
    let mut bags: BTreeMap<u32, BTreeSet<VertexId>> = BTreeMap::new();
    let mut names: BTreeMap<String, u32> = BTreeMap::new();
    let mut parents: Vec<(String, String)> = Vec::new();
    let mut declared_root: Option<String> = None;
    for section in sections {
        match section.head() {
            Some("node") => {
                let items = section.as_tagged("node")?;
                if items.len() != 2 {
                    return Err(Error::Syntax("(node <id> (bag <vertex>...))".into()));
                }
                let name = items[0].as_atom()?.to_string();
                if names.contains_key(&name) {
                    return Err(Error::Syntax(format!("duplicate node `{name}`")));
                }
                let id = names.len() as u32;
                names.insert(name, id);
                let mut bag = BTreeSet::new();
                for v in items[1].as_tagged("bag")? {
                    let vname = v.as_atom()?;
                    let vid = vertex_by_name.get(vname).copied().ok_or_else(|| {
                        Error::Syntax(format!("unknown vertex `{vname}` in a bag"))
                    })?;
                    bag.insert(vid);
                }
                bags.insert(id, bag);
            }
            Some("parent") => {
                let items = section.as_tagged("parent")?;
                if items.len() != 2 {
                    return Err(Error::Syntax("(parent <parent> <child>)".into()));
                }
                parents.push((
                    items[0].as_atom()?.to_string(),
                    items[1].as_atom()?.to_string(),
                ));
            }
            Some("root") => {
                let items = section.as_tagged("root")?;
                if items.len() != 1 {
                    return Err(Error::Syntax("(root <node>)".into()));
                }
                declared_root = Some(items[0].as_atom()?.to_string());
            }
            other => {
                return Err(Error::Syntax(format!(
                    "unknown decomposition section `{}`",
                    other.unwrap_or("?")
                )))
            }
        }
    }
    let mut parent_map: BTreeMap<u32, u32> = BTreeMap::new();
    for (p, c) in parents {
        let pid = *names
            .get(&p)
            .ok_or_else(|| Error::Syntax(format!("unknown node `{p}`")))?;
        let cid = *names
            .get(&c)
            .ok_or_else(|| Error::Syntax(format!("unknown node `{c}`")))?;
        if parent_map.insert(cid, pid).is_some() {
            return Err(Error::Syntax(format!("node `{c}` has two parents")));
        }
    }
    let d = TreeDecomposition::new(bags, parent_map)?;
    if let Some(root_name) = declared_root {
        let rid = *names
            .get(&root_name)
            .ok_or_else(|| Error::Syntax(format!("unknown node `{root_name}`")))?;
        if d.root() != rid {
            return Err(Error::Syntax(format!(
                "declared root `{root_name}` differs from the parent structure"
            )));
        }
    }
    Ok(d)
}

// --------------------------------------------------------------------------
// structures
// --------------------------------------------------------------------------

pub fn structure_to_text(s: &Structure) -> String {
    let sig: Vec<Sexpr> = s
        .signature()
        .iter()
        .map(|(name, arity)| list(vec![atom(name), atom(arity.to_string())]))
        .collect();
    let universe: Vec<Sexpr> = s.universe().map(|u| atom(format!("u{u}"))).collect();
    let mut items = vec![tagged("signature", sig), tagged("universe", universe)];
    for (name, _) in s.signature().iter() {
        let tuples: Vec<Sexpr> = s
            .tuples(name)
            .map(|t| list(t.iter().map(|u| atom(format!("u{u}"))).collect()))
            .collect();
        let mut rel = vec![atom(name)];
        rel.extend(tuples);
        items.push(tagged("rel", rel));
    }
    pretty(&tagged("structure", items)) + "\n"
}

pub fn structure_from_text(text: &str) -> Result<Structure> {
    let e = parse_one(text)?;
    let sections = e.as_tagged("structure")?;
    let mut sig = Signature::new();
    let mut universe: BTreeSet<ElemId> = BTreeSet::new();
    let mut names: BTreeMap<String, ElemId> = BTreeMap::new();
    let mut interp: BTreeMap<String, BTreeSet<Vec<ElemId>>> = BTreeMap::new();
    for section in sections {
        match section.head() {
            Some("signature") => {
                for decl in section.as_tagged("signature")? {
                    let items = decl.as_list()?;
                    if items.len() != 2 {
                        return Err(Error::Syntax("(signature (<name> <arity>)...)".into()));
                    }
                    sig.declare(items[0].as_atom()?, items[1].as_usize()?);
                }
            }
            Some("universe") => {
                for u in section.as_tagged("universe")? {
                    let name = u.as_atom()?.to_string();
                    if names.contains_key(&name) {
                        return Err(Error::Syntax(format!("duplicate element `{name}`")));
                    }
                    let id = names.len() as ElemId;
                    names.insert(name, id);
                    universe.insert(id);
                }
            }
            Some("rel") => {
                let items = section.as_tagged("rel")?;
                if items.is_empty() {
                    return Err(Error::Syntax("(rel <name> (<elem>...)...)".into()));
                }
                let rel = items[0].as_atom()?.to_string();
                let set = interp.entry(rel).or_default();
                for tuple in &items[1..] {
                    let t = tuple
                        .as_list()?
                        .iter()
                        .map(|u| {
                            let name = u.as_atom()?;
                            names.get(name).copied().ok_or_else(|| {
                                Error::Syntax(format!("unknown element `{name}`"))
                            })
                        })
                        .collect::<Result<Vec<ElemId>>>()?;
                    set.insert(t);
                }
            }
            other => {
                return Err(Error::Syntax(format!(
                    "unknown structure section `{}`",
                    other.unwrap_or("?")
                )))
            }
        }
    }
    Structure::new(sig, universe, interp)
}

// --------------------------------------------------------------------------
// formulas
// --------------------------------------------------------------------------

const RESERVED_HEADS: &[&str] = &[
    "=", "rel", "member", "card", "not", "and", "or", "implies", "iff", "exists-fo",
    "exists-so", "forall-fo", "forall-so", "true", "false",
];

pub fn formula_from_sexpr(e: &Sexpr) -> Result<Formula> {
    if let Ok(a) = e.as_atom() {
        return match a {
            "true" => Ok(Formula::tru()),
            "false" => Ok(Formula::fals()),
            other => Err(Error::Syntax(format!("unexpected atom `{other}`"))),
        };
    }
    let items = e.as_list()?;
    let head = e
        .head()
        .ok_or_else(|| Error::Syntax("a formula starts with a connective".into()))?;
    let sub = |i: usize| formula_from_sexpr(&items[i]);
    let expect = |n: usize, shape: &str| -> Result<()> {
        if items.len() != n {
            return Err(Error::Syntax(format!("expected {shape}")));
        }
        Ok(())
    };
    match head {
        "=" => {
            expect(3, "(= x y)")?;
            Ok(Formula::eq(items[1].as_atom()?, items[2].as_atom()?))
        }
        "member" => {
            expect(3, "(member X x)")?;
            Ok(Formula::member(items[1].as_atom()?, items[2].as_atom()?))
        }
        "card" => {
            expect(4, "(card X q p)")?;
            Formula::card(
                items[1].as_atom()?,
                items[2].as_usize()? as u32,
                items[3].as_usize()? as u32,
            )
        }
        "not" => {
            expect(2, "(not f)")?;
            Ok(Formula::not(sub(1)?))
        }
        "and" => {
            let fs = items[1..].iter().map(formula_from_sexpr).collect::<Result<Vec<_>>>()?;
            Ok(Formula::and_all(fs))
        }
        "or" => {
            let fs = items[1..].iter().map(formula_from_sexpr).collect::<Result<Vec<_>>>()?;
            Ok(Formula::or_all(fs))
        }
        "implies" => {
            expect(3, "(implies f g)")?;
            Ok(Formula::implies(sub(1)?, sub(2)?))
        }
        "iff" => {
            expect(3, "(iff f g)")?;
            Ok(Formula::iff(sub(1)?, sub(2)?))
        }
        "exists-fo" => {
            expect(3, "(exists-fo x f)")?;
            Ok(Formula::exists_fo(items[1].as_atom()?, sub(2)?))
        }
        "exists-so" => {
            expect(3, "(exists-so X f)")?;
            Ok(Formula::exists_so(items[1].as_atom()?, sub(2)?))
        }
        "forall-fo" => {
            expect(3, "(forall-fo x f)")?;
            Ok(Formula::forall_fo(items[1].as_atom()?, sub(2)?))
        }
        "forall-so" => {
            expect(3, "(forall-so X f)")?;
            Ok(Formula::forall_so(items[1].as_atom()?, sub(2)?))
        }
        "true" => Ok(Formula::tru()),
        "false" => Ok(Formula::fals()),
        "rel" => {
            if items.len() < 2 {
                return Err(Error::Syntax("(rel r x...)".into()));
            }
            let args = items[2..]
                .iter()
                .map(|a| Ok(a.as_atom()?.to_string()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Formula::rel(items[1].as_atom()?, args))
        }
        relation => {
            // bare relation atom: any non-reserved head
            if RESERVED_HEADS.contains(&relation) {
                return Err(Error::Syntax(format!("malformed `{relation}` form")));
            }
            let args = items[1..]
                .iter()
                .map(|a| Ok(a.as_atom()?.to_string()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Formula::rel(relation, args))
        }
    }
}

/// A formula file: `(mso (signature (r 2) ...) <formula>)`.
pub fn formula_file_from_text(text: &str) -> Result<(Signature, Formula)> {
    let e = parse_one(text)?;
    let sections = e.as_tagged("mso")?;
    if sections.len() != 2 {
        return Err(Error::Syntax("(mso (signature ...) <formula>)".into()));
    }
    let mut sig = Signature::new();
    for decl in sections[0].as_tagged("signature")? {
        let items = decl.as_list()?;
        if items.len() != 2 {
            return Err(Error::Syntax("(signature (<name> <arity>)...)".into()));
        }
        sig.declare(items[0].as_atom()?, items[1].as_usize()?);
    }
    let formula = formula_from_sexpr(&sections[1])?;
    Ok((sig, formula))
}

// --------------------------------------------------------------------------
// transduction schemes
// --------------------------------------------------------------------------

fn signature_from_decls(decls: &[Sexpr]) -> Result<Signature> {
    let mut sig = Signature::new();
    for decl in decls {
        let items = decl.as_list()?;
        if items.len() != 2 {
            return Err(Error::Syntax("((<name> <arity>)...)".into()));
        }
        sig.declare(items[0].as_atom()?, items[1].as_usize()?);
    }
    Ok(sig)
}

pub fn scheme_from_text(text: &str) -> Result<TransductionScheme> {
    let e = parse_one(text)?;
    let sections = e.as_tagged("scheme")?;
    let mut input = None;
    let mut output = None;
    let mut copies = None;
    let mut params: Vec<String> = Vec::new();
    let mut domain = None;
    let mut layers: BTreeMap<usize, Formula> = BTreeMap::new();
    let mut outputs: BTreeMap<(String, Vec<usize>), Formula> = BTreeMap::new();
    for section in sections {
        match section.head() {
            Some("input") => input = Some(signature_from_decls(section.as_tagged("input")?)?),
            Some("output") => {
                output = Some(signature_from_decls(section.as_tagged("output")?)?)
            }
            Some("copies") => {
                let items = section.as_tagged("copies")?;
                if items.len() != 1 {
                    return Err(Error::Syntax("(copies <k>)".into()));
                }
                copies = Some(items[0].as_usize()?);
            }
            Some("params") => {
                for p in section.as_tagged("params")? {
                    params.push(p.as_atom()?.to_string());
                }
            }
            Some("domain") => {
                let items = section.as_tagged("domain")?;
                if items.len() != 1 {
                    return Err(Error::Syntax("(domain <formula>)".into()));
                }
                domain = Some(formula_from_sexpr(&items[0])?);
            }
            Some("layer") => {
                let items = section.as_tagged("layer")?;
                if items.len() != 2 {
                    return Err(Error::Syntax("(layer <i> <formula>)".into()));
                }
                layers.insert(items[0].as_usize()?, formula_from_sexpr(&items[1])?);
            }
            Some("out") => {
                let items = section.as_tagged("out")?;
                if items.len() != 3 {
                    return Err(Error::Syntax("(out <q> (<layers>) <formula>)".into()));
                }
                let symbol = items[0].as_atom()?.to_string();
                let layer_tuple = items[1]
                    .as_list()?
                    .iter()
                    .map(|i| i.as_usize())
                    .collect::<Result<Vec<usize>>>()?;
                outputs.insert((symbol, layer_tuple), formula_from_sexpr(&items[2])?);
            }
            other => {
                return Err(Error::Syntax(format!(
                    "unknown scheme section `{}`",
                    other.unwrap_or("?")
                )))
            }
        }
    }
    let copies = copies.ok_or_else(|| Error::Syntax("missing (copies <k>)".into()))?;
    let mut layer_vec = Vec::new();
    for i in 1..=copies {
        layer_vec.push(layers.remove(&i).ok_or_else(|| {
            Error::Syntax(format!("missing (layer {i} <formula>)"))
        })?);
    }
    if let Some((i, _)) = layers.into_iter().next() {
        return Err(Error::Syntax(format!("layer {i} is outside 1..={copies}")));
    }
    let scheme = TransductionScheme {
        input: input.ok_or_else(|| Error::Syntax("missing (input ...)".into()))?,
        output: output.ok_or_else(|| Error::Syntax("missing (output ...)".into()))?,
        copies,
        params,
        domain: domain.ok_or_else(|| Error::Syntax("missing (domain ...)".into()))?,
        layers: layer_vec,
        outputs,
    };
    scheme.validate()?;
    Ok(scheme)
}

// --------------------------------------------------------------------------
// grammars
// --------------------------------------------------------------------------

pub fn grammar_to_text(g: &Grammar) -> String {
    let mut items = vec![tagged("sort", vec![sort_to_sexpr(g.sort())])];
    for (nt, sort) in g.nonterminals() {
        items.push(tagged("nonterminal", vec![atom(nt), sort_to_sexpr(sort)]));
    }
    for (nt, term) in g.rules() {
        items.push(tagged("rule", vec![atom(nt), term_to_sexpr(term)]));
    }
    if !g.starts().is_empty() {
        items.push(tagged(
            "start",
            g.starts().iter().map(atom).collect(),
        ));
    }
    pretty(&tagged("grammar", items)) + "\n"
}

pub fn grammar_from_text(text: &str) -> Result<Grammar> {
    let e = parse_one(text)?;
    let sections = e.as_tagged("grammar")?;
    let mut sort = SortSet::empty();
    let mut nonterminals: BTreeMap<String, SortSet> = BTreeMap::new();
    let mut rules: Vec<(String, Term)> = Vec::new();
    let mut starts: Vec<String> = Vec::new();
    for section in sections {
        match section.head() {
            Some("sort") => {
                let items = section.as_tagged("sort")?;
                if items.len() != 1 {
                    return Err(Error::Syntax("(sort (<labels>))".into()));
                }
                sort = sort_from_sexpr(&items[0])?;
            }
            Some("nonterminal") => {
                let items = section.as_tagged("nonterminal")?;
                if items.len() != 2 {
                    return Err(Error::Syntax("(nonterminal <name> (<labels>))".into()));
                }
                nonterminals.insert(
                    items[0].as_atom()?.to_string(),
                    sort_from_sexpr(&items[1])?,
                );
            }
            Some("rule") => {
                let items = section.as_tagged("rule")?;
                if items.len() != 2 {
                    return Err(Error::Syntax("(rule <nonterminal> <term>)".into()));
                }
                rules.push((
                    items[0].as_atom()?.to_string(),
                    term_from_sexpr(&items[1])?,
                ));
            }
            Some("start") => {
                for s in section.as_tagged("start")? {
                    starts.push(s.as_atom()?.to_string());
                }
            }
            other => {
                return Err(Error::Syntax(format!(
                    "unknown grammar section `{}`",
                    other.unwrap_or("?")
                )))
            }
        }
    }
    Grammar::new(sort, nonterminals, rules)?.with_starts(starts)
}

// --------------------------------------------------------------------------
// finite algebras
// --------------------------------------------------------------------------

/// Operation symbols in algebra files: `(empty (<labels>))`,
/// `(edge <label> <source>...)`, `(restrict (<labels>))`,
/// `(rename ((a b)...))` or `par`.
pub fn algebra_from_text(text: &str) -> Result<FiniteAlgebra> {
    let e = parse_one(text)?;
    let sections = e.as_tagged("algebra")?;
    let mut sort = SortSet::empty();
    for section in sections {
        if section.head() == Some("sort") {
            let items = section.as_tagged("sort")?;
            if items.len() != 1 {
                return Err(Error::Syntax("(sort (<labels>))".into()));
            }
            sort = sort_from_sexpr(&items[0])?;
        }
    }
    let mut algebra = FiniteAlgebra::new(sort);
    for section in sections {
        if section.head() == Some("carrier") {
            let items = section.as_tagged("carrier")?;
            if items.is_empty() {
                return Err(Error::Syntax("(carrier (<labels>) <element>...)".into()));
            }
            let elem_sort = sort_from_sexpr(&items[0])?;
            for name in &items[1..] {
                algebra.declare_element(name.as_atom()?, elem_sort.clone())?;
            }
        }
    }
    for section in sections {
        match section.head() {
            Some("sort") | Some("carrier") => {}
            Some("op") => {
                let items = section.as_tagged("op")?;
                if items.len() < 2 {
                    return Err(Error::Syntax("(op <symbol> ((<args>) -> <elem>)...)".into()));
                }
                for entry in &items[1..] {
                    let parts = entry.as_list()?;
                    if parts.len() != 3 || parts[1].as_atom()? != "->" {
                        return Err(Error::Syntax(
                            "an op entry is ((<args>) -> <elem>)".into(),
                        ));
                    }
                    let args: Vec<String> = parts[0]
                        .as_list()?
                        .iter()
                        .map(|a| Ok(a.as_atom()?.to_string()))
                        .collect::<Result<Vec<_>>>()?;
                    let result = parts[2].as_atom()?.to_string();
                    apply_op_entry(&mut algebra, &items[0], &args, result)?;
                }
            }
            other => {
                return Err(Error::Syntax(format!(
                    "unknown algebra section `{}`",
                    other.unwrap_or("?")
                )))
            }
        }
    }
    Ok(algebra)
}

fn apply_op_entry(
    algebra: &mut FiniteAlgebra,
    symbol: &Sexpr,
    args: &[String],
    result: String,
) -> Result<()> {
    if let Ok(a) = symbol.as_atom() {
        if a == "par" {
            if args.len() != 2 {
                return Err(Error::Syntax("par takes two arguments".into()));
            }
            return algebra.set_par(args[0].clone(), args[1].clone(), result);
        }
        return Err(Error::Syntax(format!("unknown operation `{a}`")));
    }
    let items = symbol.as_list()?;
    match symbol.head() {
        Some("empty") if items.len() == 2 => {
            if !args.is_empty() {
                return Err(Error::Syntax("constants take no arguments".into()));
            }
            algebra.set_empty(sort_from_sexpr(&items[1])?, result)
        }
        Some("edge") if items.len() >= 2 => {
            if !args.is_empty() {
                return Err(Error::Syntax("constants take no arguments".into()));
            }
            let ss = items[2..]
                .iter()
                .map(|s| SourceLabel::new(s.as_atom()?))
                .collect::<Result<Vec<_>>>()?;
            let label = EdgeLabel::new(items[1].as_atom()?, ss.len())?;
            algebra.set_edge(label, ss, result)
        }
        Some("restrict") if items.len() == 2 => {
            if args.len() != 1 {
                return Err(Error::Syntax("restrict takes one argument".into()));
            }
            algebra.set_restrict(sort_from_sexpr(&items[1])?, args[0].clone(), result)
        }
        Some("rename") if items.len() == 2 => {
            if args.len() != 1 {
                return Err(Error::Syntax("rename takes one argument".into()));
            }
            algebra.set_rename(perm_from_sexpr(&items[1])?, args[0].clone(), result)
        }
        _ => Err(Error::Syntax(format!("unknown operation `{symbol}`"))),
    }
}

/// Several graphs in one file, as consecutive top-level forms.
pub fn graphs_from_text(text: &str) -> Result<Vec<Graph>> {
    parse_many(text)?.iter().map(graph_from_sexpr).collect()
}

pub fn graphs_to_text(graphs: &[Graph]) -> String {
    graphs.iter().map(graph_to_text).collect::<Vec<_>>().join("\n")
}
