//! Command-line front end: terms, graphs, decompositions, parse trees,
//! structures, formulas, transduction schemes, grammars and recognizers,
//! all as s-expression files.
//!
//! Exit codes: 0 success, 1 negative verdict (not isomorphic, not
//! satisfied, invalid decomposition, distinguished), 2 input error,
//! 3 resource bound exceeded.

use clap::{Parser, Subcommand};
use hralg::algebra::{const_edge, const_empty, parallel};
use hralg::decomposition::{
    color_decomposition, decompose_minfill, decomposition_to_parse_tree, treewidth_exact_bounded,
    TreeDecomposition,
};
use hralg::format;
use hralg::grammar::{enumerate_language_capped, filter_grammar};
use hralg::graph::{is_isomorphic_bounded, iso_key};
use hralg::logic::models_bounded;
use hralg::recognizer::{congruent_bounded, CongruenceVerdict};
use hralg::sexpr;
use hralg::structure::{encode_decomposition, encode_graph};
use hralg::transduction::{builtin_tll, enumerate_outputs, TransductionScheme};
use hralg::{Error, Graph, Limits, Result, SortSet, SourceLabel};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hralg", version, about = "graph algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a ground term file into a graph
    Eval {
        term: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide isomorphism of two graph files; prints true or false
    Iso {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_vertices: usize,
    },
    /// Encode a graph (optionally together with a decomposition) as a
    /// relational structure
    Encode {
        graph: PathBuf,
        #[arg(long)]
        td: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact treewidth; prints the width and writes the witnessing
    /// decomposition with --out
    Tw {
        graph: PathBuf,
        #[arg(long)]
        max_vertices: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a decomposition file against a graph
    TdCheck { graph: PathBuf, td: PathBuf },
    /// Parse a graph into a parse tree whose evaluation reproduces it
    Parse {
        graph: PathBuf,
        /// label budget, e.g. "(t1 t2 s1)"; chosen automatically if absent
        #[arg(long)]
        sort: Option<String>,
        /// decompose exactly instead of with the min-fill heuristic
        #[arg(long)]
        exact: bool,
        /// decompose with the min-fill heuristic (the default)
        #[arg(long)]
        minfill: bool,
        #[arg(long)]
        max_vertices: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a parse tree file back into a graph
    Val {
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model-check a sentence over a structure; prints true or false
    Mc { structure: PathBuf, formula: PathBuf },
    /// Apply a transduction scheme to a structure
    Transduce {
        structure: PathBuf,
        #[arg(long, conflicts_with = "builtin")]
        scheme: Option<PathBuf>,
        /// a built-in scheme: `tll` links the leaves of a binary tree in
        /// order, `tll-inverse` removes the links
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the graphs a grammar derives for a nonterminal
    Enum {
        grammar: PathBuf,
        nonterminal: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter a grammar through a finite recognizer algebra
    Filter {
        grammar: PathBuf,
        algebra: PathBuf,
        /// accepting carrier elements
        #[arg(long, value_delimiter = ',')]
        accept: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounded congruence test of two graphs against a grammar language
    Congr {
        first: PathBuf,
        second: PathBuf,
        grammar: PathBuf,
        nonterminal: String,
        /// fixpoint depth of the membership oracle
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// restriction/renaming label budget, e.g. "(s1 s2)"; defaults to
        /// the grammar sort
        #[arg(long)]
        sort: Option<String>,
        /// context graphs carry at most this many edges
        #[arg(long, default_value_t = 2)]
        max_context_edges: usize,
        /// also quantify over renamings of the label budget
        #[arg(long)]
        rename: bool,
    },
    /// Render a graph file as DOT
    Dot {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::Io)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Error::Io),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_sort_arg(text: &str) -> Result<SortSet> {
    let e = sexpr::parse_one(text)?;
    let mut sort = SortSet::empty();
    for item in e.as_list()? {
        sort.insert(SourceLabel::new(item.as_atom()?)?);
    }
    Ok(sort)
}

/// The graph's own sort plus fresh labels t1, t2, ... until `extra` new
/// labels are available for coloring.
fn auto_sort(g: &Graph, extra: usize) -> SortSet {
    let mut sort = g.sort();
    let target = g.sort().len() + extra;
    let mut i = 1;
    while sort.len() < target {
        let candidate = SourceLabel::new(format!("t{i}")).unwrap();
        i += 1;
        if !sort.contains(&candidate) {
            sort.insert(candidate);
        }
    }
    sort
}

fn run(cli: Cli, limits: &Limits) -> Result<i32> {
    match cli.command {
        Command::Eval { term, out } => {
            let t = format::term_from_text(&read(&term)?)?;
            let g = hralg::eval_term(&t)?;
            emit(&out, &format::graph_to_text(&g))?;
            Ok(0)
        }
        Command::Iso { first, second, max_vertices } => {
            let g1 = format::graph_from_text(&read(&first)?)?;
            let g2 = format::graph_from_text(&read(&second)?)?;
            let same = is_isomorphic_bounded(&g1, &g2, max_vertices)?;
            println!("{same}");
            Ok(if same { 0 } else { 1 })
        }
        Command::Encode { graph, td, out } => {
            let g = format::graph_from_text(&read(&graph)?)?;
            let structure = match td {
                Some(td_path) => {
                    let d = format::decomposition_from_text(&read(&td_path)?, &g)?;
                    encode_decomposition(&g, &d)?
                }
                None => encode_graph(&g)?,
            };
            emit(&out, &format::structure_to_text(&structure))?;
            Ok(0)
        }
        Command::Tw { graph, max_vertices, out } => {
            let g = format::graph_from_text(&read(&graph)?)?;
            let bound = max_vertices.unwrap_or(limits.tw_vertex_bound);
            let (width, d) = treewidth_exact_bounded(&g, bound)?;
            println!("{width}");
            if out.is_some() {
                emit(&out, &format::decomposition_to_text(&d))?;
            }
            Ok(0)
        }
        Command::TdCheck { graph, td } => {
            let g = format::graph_from_text(&read(&graph)?)?;
            let d = format::decomposition_from_text(&read(&td)?, &g)?;
            match d.check(&g) {
                Ok(()) => {
                    println!("ok, width {}", d.width());
                    Ok(0)
                }
                Err(violation) => {
                    println!("violation: {violation}");
                    Ok(1)
                }
            }
        }
        Command::Parse { graph, sort, exact, minfill, max_vertices, out } => {
            if exact && minfill {
                return Err(Error::Syntax("choose one of --exact and --minfill".into()));
            }
            let g = format::graph_from_text(&read(&graph)?)?;
            let d: TreeDecomposition = if exact {
                let bound = max_vertices.unwrap_or(limits.tw_vertex_bound);
                treewidth_exact_bounded(&g, bound)?.1
            } else {
                decompose_minfill(&g)?
            };
            let width = d.width().max(0) as usize;
            let budget = match sort {
                Some(text) => parse_sort_arg(&text)?,
                None => auto_sort(&g, width + 1),
            };
            let coloring = color_decomposition(&g, &d, &budget)?;
            let pt = decomposition_to_parse_tree(&g, &d, &coloring, &budget)?;
            eprintln!("tau: {budget}");
            emit(&out, &format::parse_tree_to_text(&pt))?;
            Ok(0)
        }
        Command::Val { tree, out } => {
            let pt = format::parse_tree_from_text(&read(&tree)?)?;
            let g = pt.val()?;
            emit(&out, &format::graph_to_text(&g))?;
            Ok(0)
        }
        Command::Mc { structure, formula } => {
            let s = format::structure_from_text(&read(&structure)?)?;
            let (sig, f) = format::formula_file_from_text(&read(&formula)?)?;
            for (name, arity) in sig.iter() {
                match s.signature().arity(name) {
                    Some(a) if a == arity => {}
                    Some(a) => {
                        return Err(Error::InvalidFormula(format!(
                            "relation `{name}` declared with arity {arity}, structure has {a}"
                        )))
                    }
                    None => return Err(Error::UnknownRelation(name.to_string())),
                }
            }
            let holds = models_bounded(&s, &f, limits.so_universe_bound)?;
            println!("{holds}");
            Ok(if holds { 0 } else { 1 })
        }
        Command::Transduce { structure, scheme, builtin, out } => {
            let s = format::structure_from_text(&read(&structure)?)?;
            let scheme: TransductionScheme = match (scheme, builtin.as_deref()) {
                (Some(path), None) => format::scheme_from_text(&read(&path)?)?,
                (None, Some("tll")) => builtin_tll().0,
                (None, Some("tll-inverse")) => builtin_tll().1,
                (None, Some(other)) => {
                    return Err(Error::Syntax(format!("unknown builtin `{other}`")))
                }
                _ => {
                    return Err(Error::Syntax(
                        "provide exactly one of --scheme and --builtin".into(),
                    ))
                }
            };
            let outputs = enumerate_outputs(&scheme, &s, limits)?;
            let mut text = String::new();
            for o in &outputs {
                text.push_str(&format::structure_to_text(o));
                text.push('\n');
            }
            eprintln!("{} output(s)", outputs.len());
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Enum { grammar, nonterminal, depth, out } => {
            let g = format::grammar_from_text(&read(&grammar)?)?;
            let sample = enumerate_language_capped(&g, depth, limits.stage_cap)?;
            let graphs = sample.of(&nonterminal);
            let mut text = String::new();
            for graph in graphs {
                text.push_str(&format::graph_to_text(graph));
                text.push('\n');
            }
            eprintln!("{} graph(s) at depth {depth}", graphs.len());
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Filter { grammar, algebra, accept, out } => {
            let g = format::grammar_from_text(&read(&grammar)?)?;
            let a = format::algebra_from_text(&read(&algebra)?)?;
            let filtered = filter_grammar(&g, &a, &accept)?;
            emit(&out, &format::grammar_to_text(&filtered))?;
            Ok(0)
        }
        Command::Congr {
            first,
            second,
            grammar,
            nonterminal,
            depth,
            sort,
            max_context_edges,
            rename,
        } => {
            let g1 = format::graph_from_text(&read(&first)?)?;
            let g2 = format::graph_from_text(&read(&second)?)?;
            let gr = format::grammar_from_text(&read(&grammar)?)?;
            let budget = match sort {
                Some(text) => parse_sort_arg(&text)?,
                None => gr.sort().clone(),
            };
            let contexts = context_family(&gr, &budget, max_context_edges)?;
            // the membership oracle is consulted once per context and
            // restriction; enumerate the language a single time up front
            let sample = enumerate_language_capped(&gr, depth, limits.stage_cap)?;
            let language = sample.of(&nonterminal).to_vec();
            let mut oracle = |g: &Graph| -> Result<bool> {
                for h in &language {
                    if hralg::is_isomorphic(h, g)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            };
            let verdict = congruent_bounded(&mut oracle, &g1, &g2, &contexts, &budget, rename)?;
            match verdict {
                CongruenceVerdict::Indistinguishable => {
                    println!(
                        "indistinguishable over {} contexts (bounded evidence)",
                        contexts.len()
                    );
                    Ok(0)
                }
                CongruenceVerdict::DistinguishedBy { context, restrict_to, rename_by } => {
                    println!("distinguished");
                    println!("; restrict to {restrict_to}");
                    if let Some(p) = rename_by {
                        if !p.is_identity() {
                            println!("; after renaming {}", p.support());
                        }
                    }
                    print!("{}", format::graph_to_text(&context));
                    Ok(1)
                }
            }
        }
        Command::Dot { graph, out } => {
            let g = format::graph_from_text(&read(&graph)?)?;
            emit(&out, &format::graph_to_dot(&g))?;
            Ok(0)
        }
    }
}

/// Context graphs for the bounded congruence test: parallel compositions
/// of at most `max_edges` edge constants over the grammar's alphabet with
/// sources from the label budget, together with the bare sources-only
/// graphs, deduplicated up to isomorphism.
fn context_family(
    grammar: &hralg::grammar::Grammar,
    budget: &SortSet,
    max_edges: usize,
) -> Result<Vec<Graph>> {
    let mut alphabet: Vec<hralg::EdgeLabel> = Vec::new();
    for (_, term) in grammar.rules() {
        collect_labels(term, &mut alphabet);
    }
    alphabet.sort();
    alphabet.dedup();
    let labels: Vec<SourceLabel> = budget.iter().cloned().collect();
    let mut constants: Vec<Graph> = Vec::new();
    for label in &alphabet {
        let mut tuples: Vec<Vec<SourceLabel>> = vec![Vec::new()];
        for _ in 0..label.arity() {
            let mut next = Vec::new();
            for prefix in tuples {
                for l in &labels {
                    let mut p = prefix.clone();
                    p.push(l.clone());
                    next.push(p);
                }
            }
            tuples = next;
        }
        for t in tuples {
            constants.push(const_edge(label, &t)?);
        }
    }
    let mut contexts: Vec<Graph> = Vec::new();
    for tau in budget.subsets() {
        contexts.push(const_empty(&tau));
    }
    let mut layer = contexts.clone();
    for _ in 0..max_edges {
        let mut next = Vec::new();
        for base in &layer {
            for c in &constants {
                next.push(parallel(base, c));
            }
        }
        contexts.extend(next.iter().cloned());
        layer = next;
    }
    let mut kept: Vec<Graph> = Vec::new();
    let mut keys: Vec<u64> = Vec::new();
    for g in contexts {
        let key = iso_key(&g);
        let mut dup = false;
        for (i, k) in keys.iter().enumerate() {
            if *k == key && hralg::is_isomorphic(&kept[i], &g)? {
                dup = true;
                break;
            }
        }
        if !dup {
            keys.push(key);
            kept.push(g);
        }
    }
    Ok(kept)
}

fn collect_labels(term: &hralg::Term, out: &mut Vec<hralg::EdgeLabel>) {
    match term {
        hralg::Term::Edge(label, _) => out.push(label.clone()),
        hralg::Term::Empty(_) | hralg::Term::Nonterminal(_) => {}
        hralg::Term::Restrict(_, inner) | hralg::Term::Rename(_, inner) => {
            collect_labels(inner, out)
        }
        hralg::Term::Parallel(a, b) => {
            collect_labels(a, out);
            collect_labels(b, out);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = Limits::from_env();
    match run(cli, &limits) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceLimit(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
