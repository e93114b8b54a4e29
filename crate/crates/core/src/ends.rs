//! Finitely described infinite graphs: a finite base with periodic rays
//! attached, their truncations, ends, Betti numbers and K-groups.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::bhk::{self, KError, KGroups};
use crate::bigraph::{AxisId, BiGraph, GraphError, SubgraphSelection, UndirectedMultigraph};
use crate::reduce::{self, ReduceError};
use crate::zlattice::{AbelianGroup, Cardinal};

/// Periods materialized by default when reducing a ray description.
pub const DEFAULT_DEPTH: usize = 5;

#[derive(Debug, Error)]
pub enum EndsError {
    #[error("ray {0} has an empty period")]
    EmptyPeriod(String),
    #[error("ray {ray} attaches to unknown vertex {vertex}")]
    UnknownAttach { ray: String, vertex: usize },
    #[error("duplicate ray name {0}")]
    DuplicateRay(String),
    #[error("base graph is disconnected")]
    Disconnected,
    #[error("valency computation did not stabilize within depth {0}")]
    NoStabilization(usize),
    #[error("the two K-group routes disagree: pipeline gives {pipeline}, formula gives {formula}")]
    RouteMismatch { pipeline: Box<KGroups>, formula: Box<KGroups> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    K(#[from] KError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PeriodStep {
    pub loops: u32,
}

/// A one-sided ray glued to a base vertex. Step `s` (from 1) adds a vertex
/// joined to the previous one, carrying `period[(s - 1) % p].loops` loops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RayAttachment {
    pub name: String,
    pub attach: usize,
    pub period: Vec<PeriodStep>,
}

impl RayAttachment {
    pub fn new(name: impl Into<String>, attach: usize, loops: &[u32]) -> Self {
        Self { name: name.into(), attach, period: loops.iter().map(|&loops| PeriodStep { loops }).collect() }
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    pub fn loops_at_step(&self, step: usize) -> u32 {
        self.period[(step - 1) % self.period.len()].loops
    }

    pub fn has_loops(&self) -> bool {
        self.period.iter().any(|s| s.loops > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphDescription {
    Finite(UndirectedMultigraph),
    RayExtended { base: UndirectedMultigraph, rays: Vec<RayAttachment> },
}

/// Where a vertex of a truncation comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Base(usize),
    Ray { ray: usize, step: usize },
}

/// A truncation together with the origin of each of its vertices.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub graph: UndirectedMultigraph,
    pub origins: Vec<Origin>,
    /// Vertex index of the last materialized axis of each ray.
    pub tips: Vec<usize>,
}

impl GraphDescription {
    pub fn base(&self) -> &UndirectedMultigraph {
        match self {
            Self::Finite(g) => g,
            Self::RayExtended { base, .. } => base,
        }
    }

    pub fn rays(&self) -> &[RayAttachment] {
        match self {
            Self::Finite(_) => &[],
            Self::RayExtended { rays, .. } => rays,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rays().is_empty()
    }

    pub fn validate(&self) -> Result<(), EndsError> {
        let mut names = BTreeSet::new();
        for ray in self.rays() {
            if ray.period.is_empty() {
                return Err(EndsError::EmptyPeriod(ray.name.clone()));
            }
            if ray.attach >= self.base().vertices().len() {
                return Err(EndsError::UnknownAttach { ray: ray.name.clone(), vertex: ray.attach });
            }
            if !names.insert(&ray.name) {
                return Err(EndsError::DuplicateRay(ray.name.clone()));
            }
        }
        Ok(())
    }

    /// Longest ray period.
    pub fn max_period(&self) -> usize {
        self.rays().iter().map(RayAttachment::period_len).max().unwrap_or(1)
    }
}

/// Base plus the first `k` periods of every ray.
pub fn truncate(desc: &GraphDescription, k: usize) -> UndirectedMultigraph {
    truncate_tagged(desc, k).graph
}

/// Like [`truncate`], also reporting vertex origins. Ray vertices are named
/// `{ray}.{step}`, path links `{ray}.e{step}` and loops `{ray}.l{step}.{j}`.
pub fn truncate_tagged(desc: &GraphDescription, k: usize) -> Truncation {
    let mut graph = desc.base().clone();
    let mut origins: Vec<Origin> = (0..graph.vertices().len()).map(Origin::Base).collect();
    let mut tips = Vec::new();
    for (r, ray) in desc.rays().iter().enumerate() {
        let mut prev = ray.attach;
        for step in 1..=k * ray.period_len() {
            let v = fresh_vertex(&mut graph, format!("{}.{step}", ray.name));
            origins.push(Origin::Ray { ray: r, step });
            fresh_link(&mut graph, format!("{}.e{step}", ray.name), prev, v);
            for j in 0..ray.loops_at_step(step) {
                fresh_link(&mut graph, format!("{}.l{step}.{j}", ray.name), v, v);
            }
            prev = v;
        }
        tips.push(prev);
    }
    Truncation { graph, origins, tips }
}

fn fresh_vertex(g: &mut UndirectedMultigraph, name: String) -> usize {
    let mut candidate = name.clone();
    let mut n = 1;
    while g.vertex_index(&candidate).is_some() {
        candidate = format!("{name}~{n}");
        n += 1;
    }
    g.add_vertex(candidate).expect("fresh name")
}

fn fresh_link(g: &mut UndirectedMultigraph, name: String, a: usize, b: usize) {
    let mut candidate = name.clone();
    let mut n = 1;
    while g.has_link_named(&candidate) {
        candidate = format!("{name}~{n}");
        n += 1;
    }
    g.add_link(candidate, a, b).expect("vertices exist");
}

/// Infinite components of the complement of `truncate(desc, k)`, each
/// given by the sorted names of the rays running through it.
///
/// Beyond the truncation only ray tails remain, so the complement is
/// inspected on the window `truncate(desc, k + 1) ∖ truncate(desc, k)`; a
/// component there is infinite exactly when it reaches a tip.
pub fn infinite_component_labels(desc: &GraphDescription, k: usize) -> Vec<Vec<String>> {
    if desc.is_finite() {
        return Vec::new();
    }
    let window = truncate_tagged(desc, k + 1);
    let host = BiGraph::associate(&window.graph);
    let inside = |o: Origin| match o {
        Origin::Base(_) => true,
        Origin::Ray { ray, step } => step <= k * desc.rays()[ray].period_len(),
    };
    let removed = SubgraphSelection {
        axes: BTreeSet::new(),
        edges: host
            .edges()
            .filter(|(_, e)| inside(window.origins[e.src.0 as usize]) && inside(window.origins[e.rng.0 as usize]))
            .map(|(id, _)| id)
            .collect(),
    };
    let rest = host.subtract(&removed).expect("prefix is dual closed");
    let mut labels: BTreeMap<AxisId, BTreeSet<String>> = BTreeMap::new();
    let components = rest.components();
    for (r, &tip) in window.tips.iter().enumerate() {
        let axis = AxisId(tip as u32);
        if let Some(c) = components.iter().find(|c| c.contains(&axis)) {
            let key = *c.iter().next().expect("nonempty");
            labels.entry(key).or_default().insert(desc.rays()[r].name.clone());
        }
    }
    let mut out: Vec<Vec<String>> = labels.into_values().map(|s| s.into_iter().collect()).collect();
    out.sort();
    out
}

pub fn infinite_components(desc: &GraphDescription, k: usize) -> usize {
    infinite_component_labels(desc, k).len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValencyResult {
    pub gamma: Cardinal,
    /// One label per end: the ray realizing it.
    pub end_labels: Vec<String>,
    pub stabilization_depth: usize,
    /// Infinite-component counts at depths `0..=stabilization_depth + 1`.
    pub counts: Vec<usize>,
}

/// Valency set via the truncation exhaustion: the first depth at which
/// every infinite component carries a single ray, confirmed one level on.
pub fn valency_set(desc: &GraphDescription) -> Result<ValencyResult, EndsError> {
    desc.validate()?;
    if desc.is_finite() {
        return Ok(ValencyResult {
            gamma: Cardinal::ZERO,
            end_labels: Vec::new(),
            stabilization_depth: 0,
            counts: vec![0],
        });
    }
    let cap = desc.base().vertices().len() + 2;
    let mut counts = Vec::new();
    for k in 0..=cap {
        let labels = infinite_component_labels(desc, k);
        counts.push(labels.len());
        if labels.iter().all(|l| l.len() == 1) {
            let next = infinite_component_labels(desc, k + 1);
            counts.push(next.len());
            if next != labels {
                return Err(EndsError::NoStabilization(k + 1));
            }
            return Ok(ValencyResult {
                gamma: Cardinal::Finite(labels.len() as u64),
                end_labels: labels.into_iter().flatten().collect(),
                stabilization_depth: k,
                counts,
            });
        }
    }
    Err(EndsError::NoStabilization(cap))
}

/// Shrinks disjoint connected pieces of `truncate(desc, k)` and reattaches
/// each ray at the image of its last materialized vertex.
pub fn quotient(desc: &GraphDescription, k: usize, z: &[SubgraphSelection]) -> Result<GraphDescription, EndsError> {
    desc.validate()?;
    let trunc = truncate_tagged(desc, k);
    let host = BiGraph::associate(&trunc.graph);
    let f = host.factorize(z)?;
    let index: BTreeMap<AxisId, usize> = f.graph.axes().enumerate().map(|(i, a)| (a, i)).collect();
    let base = f.graph.underlying();
    if desc.is_finite() {
        return Ok(GraphDescription::Finite(base));
    }
    let rays = desc
        .rays()
        .iter()
        .zip(&trunc.tips)
        .map(|(ray, &tip)| {
            let image = f.tilde_iota(AxisId(tip as u32)).expect("tip is an axis");
            RayAttachment { attach: index[&image], ..ray.clone() }
        })
        .collect();
    Ok(GraphDescription::RayExtended { base, rays })
}

/// Whether shrinking `z` inside `truncate(desc, k)` leaves the valency set
/// unchanged.
pub fn valency_invariance(desc: &GraphDescription, k: usize, z: &[SubgraphSelection]) -> Result<bool, EndsError> {
    let before = valency_set(desc)?;
    let after = valency_set(&quotient(desc, k, z)?)?;
    Ok(before.gamma == after.gamma && before.end_labels == after.end_labels)
}

/// First Betti number: the base contributes its cycle rank, a ray with any
/// loop in its period contributes countably many independent cycles.
pub fn betti(desc: &GraphDescription) -> Cardinal {
    let base = Cardinal::Finite(desc.base().betti());
    if desc.rays().iter().any(RayAttachment::has_loops) {
        Cardinal::CountablyInfinite
    } else {
        base
    }
}

/// K-groups of the described graph. Ray descriptions go through the
/// reduction pipeline and are cross-checked against the `(β, γ)` formula.
pub fn k_groups(desc: &GraphDescription) -> Result<KGroups, EndsError> {
    let (pipeline, formula) = k_groups_both_routes(desc, DEFAULT_DEPTH)?;
    if let Some(formula) = formula {
        if formula != pipeline {
            return Err(EndsError::RouteMismatch { pipeline: Box::new(pipeline), formula: Box::new(formula) });
        }
    }
    Ok(pipeline)
}

/// Pipeline route and, for ray descriptions, the formula route
/// `(Z^(β+γ), Z^β)`.
pub fn k_groups_both_routes(desc: &GraphDescription, depth: usize) -> Result<(KGroups, Option<KGroups>), EndsError> {
    desc.validate()?;
    if desc.is_finite() {
        let g = BiGraph::associate(desc.base());
        return Ok((bhk::k_groups_finite(&g)?, None));
    }
    if !desc.base().is_connected() {
        return Err(EndsError::Disconnected);
    }
    let reduction = reduce::reduce_description(desc, depth)?;
    let pruned = reduction.rose.prune_dead_branches();
    let pipeline = KGroups { k0: reduce::rose_tree_k0(&pruned)?, k1: reduce::rose_tree_k1(&pruned) };
    let beta = betti(desc);
    let gamma = valency_set(desc)?.gamma;
    let formula = KGroups { k0: AbelianGroup::free(beta + gamma), k1: AbelianGroup::free(beta) };
    Ok((pipeline, Some(formula)))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::bigraph::fixtures::multigraph;

    pub fn ray(loops: &[u32]) -> GraphDescription {
        GraphDescription::RayExtended { base: multigraph(&["o"], &[]), rays: vec![RayAttachment::new("r", 0, loops)] }
    }

    pub fn line() -> GraphDescription {
        GraphDescription::RayExtended {
            base: multigraph(&["o"], &[]),
            rays: vec![RayAttachment::new("l", 0, &[0]), RayAttachment::new("r", 0, &[0])],
        }
    }
}
