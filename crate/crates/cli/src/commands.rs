use std::collections::BTreeSet;
use std::path::PathBuf;

use ckgraph::batch;
use ckgraph::bhk::KGroups;
use ckgraph::bigraph::{BiGraph, EdgeId, Orientation, SubgraphSelection};
use ckgraph::ends::{self, EndsError, GraphDescription};
use ckgraph::format;
use ckgraph::random;
use ckgraph::reduce::{self, ReduceError, RoseTree};
use ckgraph::verify::{self, VerifyError};

use crate::{json, read_input, Failure, Mode};

fn load(path: &PathBuf) -> Result<GraphDescription, Failure> {
    let desc = format::parse(&read_input(path)?)?;
    desc.validate()?;
    Ok(desc)
}

fn finite(desc: &GraphDescription, what: &str) -> Result<BiGraph, Failure> {
    match desc {
        GraphDescription::Finite(g) => Ok(BiGraph::associate(g)),
        _ => Err(Failure::Input(format!("{what} needs a finite graph"))),
    }
}

fn reduce_failure(e: ReduceError) -> Failure {
    match e {
        e @ ReduceError::KMismatch { .. } => Failure::Verification(e.to_string()),
        e => Failure::Input(e.to_string()),
    }
}

fn ends_failure(e: EndsError) -> Failure {
    match e {
        e @ EndsError::RouteMismatch { .. } => Failure::Verification(e.to_string()),
        EndsError::Reduce(e) => reduce_failure(e),
        e => Failure::Input(e.to_string()),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn info(path: &PathBuf) -> Result<(), Failure> {
    let desc = load(path)?;
    let trunc = ends::truncate_tagged(&desc, 1);
    let g = BiGraph::associate(&trunc.graph);
    let tips: BTreeSet<u32> = trunc.tips.iter().map(|&t| t as u32).collect();
    let dead: Vec<&str> = g.dead_ends().into_iter().filter(|a| !tips.contains(&a.0)).map(|a| g.label(a)).collect();
    let rose = BiGraph::associate(desc.base()).is_rose_tree();
    let gamma = ends::valency_set(&desc).map_err(ends_failure)?.gamma;
    println!("axes={} links={} rays={}", desc.base().vertices().len(), desc.base().links().len(), desc.rays().len());
    println!("beta={} gamma={} rose-tree={}", ends::betti(&desc), gamma, yes_no(rose));
    println!("dead-ends: {}", if dead.is_empty() { "none".to_string() } else { dead.join(" ") });
    Ok(())
}

pub fn kgroups(path: &PathBuf, as_json: bool) -> Result<(), Failure> {
    let desc = load(path)?;
    let k = ends::k_groups(&desc).map_err(ends_failure)?;
    if as_json {
        println!("{}", json::k_groups(&k));
    } else {
        println!("{k}");
    }
    Ok(())
}

fn stage_lines(groups: &Option<[KGroups; 4]>) -> Vec<String> {
    let names = ["E", "E-hat", "E-check", "E-tilde"];
    match groups {
        Some(g) => names.iter().zip(g).map(|(n, k)| format!("{n}: {k}")).collect(),
        None => Vec::new(),
    }
}

fn rose_line(r: &RoseTree) -> String {
    let loops: u64 = r.axes().iter().map(|a| a.loops).sum();
    let mut s = format!("rose-tree: axes={} loops={} tails={}", r.axes().len(), loops, r.tails().len());
    for t in r.tails() {
        let tpl: Vec<String> = t.template.iter().map(u64::to_string).collect();
        s.push_str(&format!(" {}@{}[{}]", t.label, r.axes()[t.attach].label, tpl.join(",")));
    }
    s
}

pub fn reduce(path: &PathBuf, depth: usize, emit: bool) -> Result<(), Failure> {
    let desc = load(path)?;
    let mut summary = Vec::new();
    let rose = match &desc {
        GraphDescription::Finite(m) => {
            let g = BiGraph::associate(m);
            let r = reduce::reduce_finite(&g, None, true).map_err(reduce_failure)?;
            summary.push(format!("layers: {}", r.layering.len()));
            summary.extend(stage_lines(&r.stage_groups));
            summary.push(format!("certified: {}", yes_no(r.tilde.graph.is_rose_tree())));
            r.rose().prune_dead_branches()
        }
        GraphDescription::RayExtended { .. } => {
            let r = reduce::reduce_description(&desc, depth).map_err(reduce_failure)?;
            summary.push(format!("truncated at {} periods", r.periods));
            summary.push(format!("layers: {}", r.truncated.layering.len()));
            summary.extend(stage_lines(&r.truncated.stage_groups));
            summary.push(format!("certified: {}", yes_no(r.truncated.tilde.graph.is_rose_tree())));
            let pruned = r.rose.prune_dead_branches();
            let k0 = reduce::rose_tree_k0(&pruned).map_err(reduce_failure)?;
            summary.push(format!("rose K0 = {k0}, K1 = {}", reduce::rose_tree_k1(&pruned)));
            pruned
        }
    };
    summary.push(rose_line(&rose));
    if emit {
        print!("{}", format::emit(&format::rose_description(&rose)));
        for line in summary {
            eprintln!("{line}");
        }
    } else {
        for line in summary {
            println!("{line}");
        }
    }
    Ok(())
}

/// Bi-trees named by their links, `a,b,c` per tree.
fn named_trees(g: &BiGraph, specs: &[String]) -> Result<Vec<SubgraphSelection>, Failure> {
    specs
        .iter()
        .map(|spec| {
            let edges = spec
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|name| {
                    g.edges()
                        .find(|(id, e)| e.orientation == Orientation::Forward && g.link_name(*id) == name)
                        .map(|(id, _)| id)
                        .ok_or_else(|| Failure::Input(format!("unknown link {name}")))
                })
                .collect::<Result<Vec<EdgeId>, _>>()?;
            Ok(SubgraphSelection::from_edges(g, edges)?)
        })
        .collect()
}

struct Outcome {
    label: String,
    passed: bool,
    detail: String,
}

fn outcome(label: String, r: Result<(bool, String), VerifyError>) -> Outcome {
    match r {
        Ok((passed, detail)) => Outcome { label, passed, detail },
        Err(e) => Outcome { label, passed: false, detail: format!("error: {e}") },
    }
}

fn report(mode: &str, outcomes: Vec<Outcome>) -> Result<(), Failure> {
    let passed = outcomes.iter().filter(|o| o.passed).count();
    for o in &outcomes {
        println!("{}: {} {}", o.label, if o.passed { "pass" } else { "FAIL" }, o.detail);
    }
    println!("{mode}: {passed}/{} passed", outcomes.len());
    if passed == outcomes.len() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{mode}: {} of {} failed", outcomes.len() - passed, outcomes.len())))
    }
}

fn formula(g: &BiGraph) -> Result<(bool, String), VerifyError> {
    let c = verify::check_finite_formula(g)?;
    Ok((c.passed(), format!("beta={} links={} {}", c.beta, c.links, c.computed)))
}

fn shrink(g: &BiGraph, trees: &[SubgraphSelection]) -> Result<(bool, String), VerifyError> {
    let c = verify::check_shrink(g, trees)?;
    Ok((
        c.passed(),
        format!("trees={} J={} Pi={} {}", c.trees, yes_no(c.j.all_true()), yes_no(c.pi.all_true()), c.after),
    ))
}

fn cycles(g: &BiGraph) -> Result<(bool, String), VerifyError> {
    Ok((verify::check_k1_cycles(g)?, format!("beta={}", g.betti())))
}

fn valency(d: &GraphDescription, k: usize, z: &[SubgraphSelection]) -> Result<(bool, String), VerifyError> {
    let c = verify::check_valency(d, k, z)?;
    Ok((c.passed(), format!("depth={} pieces={} gamma {} -> {}", c.depth, c.pieces, c.before.gamma, c.after.gamma)))
}

pub fn verify(
    mode: Mode,
    file: Option<&PathBuf>,
    seed: u64,
    count: u64,
    trees: &[String],
    depth: usize,
) -> Result<(), Failure> {
    if file.is_none() && !trees.is_empty() {
        return Err(Failure::Input("--tree needs a graph file".into()));
    }
    let seeds = seed..seed + count;
    let label = |s: u64| format!("seed {s}");
    match (mode, file) {
        (Mode::FiniteFormula, Some(p)) => {
            let g = finite(&load(p)?, "finite-formula")?;
            let c = verify::check_finite_formula(&g).map_err(|e| Failure::Input(e.to_string()))?;
            report(
                "finite-formula",
                vec![Outcome { label: p.display().to_string(), passed: c.passed(), detail: c.computed.to_string() }],
            )
        }
        (Mode::FiniteFormula, None) => {
            report("finite-formula", batch::map(seeds, |s| outcome(label(s), formula(&verify::finite_graph(s)))))
        }
        (Mode::Shrink, Some(p)) => {
            let g = finite(&load(p)?, "shrink")?;
            let pieces = if trees.is_empty() {
                random::disjoint_bitrees(&mut random::rng(seed), &g, 4, 4)
            } else {
                named_trees(&g, trees)?
            };
            let c = verify::check_shrink(&g, &pieces).map_err(|e| Failure::Input(e.to_string()))?;
            let detail = format!("trees={} J={} Pi={}", c.trees, yes_no(c.j.all_true()), yes_no(c.pi.all_true()));
            report("shrink", vec![Outcome { label: p.display().to_string(), passed: c.passed(), detail }])
        }
        (Mode::Shrink, None) => report(
            "shrink",
            batch::map(seeds, |s| {
                let (g, t) = verify::shrink_instance(s);
                outcome(label(s), shrink(&g, &t))
            }),
        ),
        (Mode::K1Cycles, Some(p)) => {
            let g = finite(&load(p)?, "k1-cycles")?;
            report("k1-cycles", vec![outcome(p.display().to_string(), cycles(&g))])
        }
        (Mode::K1Cycles, None) => {
            report("k1-cycles", batch::map(seeds, |s| outcome(label(s), cycles(&verify::finite_graph(s)))))
        }
        (Mode::Valency, Some(p)) => {
            let d = load(p)?;
            let host = BiGraph::associate(&ends::truncate(&d, depth));
            let pieces = if trees.is_empty() {
                random::disjoint_subgraphs(&mut random::rng(seed), &host, 3, 3)
            } else {
                named_trees(&host, trees)?
            };
            report("valency", vec![outcome(p.display().to_string(), valency(&d, depth, &pieces))])
        }
        (Mode::Valency, None) => report(
            "valency",
            batch::map(seeds, |s| {
                let (d, k, z) = verify::valency_instance(s);
                outcome(label(s), valency(&d, k, &z))
            }),
        ),
    }
}
