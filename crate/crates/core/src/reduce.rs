//! Reduction of a connected bi-graph to a rose-tree: a tree with loops
//! ("petals") at its axes, possibly with periodic tails running off to
//! infinity. The reduction only ever shrinks finite bi-trees, so K-groups
//! are preserved at every stage, and the rose-tree's groups have closed
//! forms in terms of its petals and its valency numbers.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::bhk::{self, KError, KGroups};
use crate::bigraph::{AxisId, BiGraph, EdgeId, GraphError, SubgraphSelection};
use crate::ends::{self, GraphDescription, Origin};
use crate::zlattice::{AbelianGroup, Cardinal};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("graph has no axes")]
    Empty,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("seed must be a nonempty connected subgraph")]
    BadSeed,
    #[error("invalid layering: {0}")]
    InvalidLayering(String),
    #[error("{stage} changed the K-groups: {before} became {after}")]
    KMismatch { stage: &'static str, before: Box<KGroups>, after: Box<KGroups> },
    #[error("result of {0} is not a rose-tree")]
    NotRoseTree(&'static str),
    #[error("invalid rose-tree: {0}")]
    BadRoseTree(String),
    #[error("rose-tree has no ends, so its K0 is not free; use the finite computation")]
    FiniteRoseTree,
    #[error("rose-tree has dead branches; prune them first")]
    DeadBranches,
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    K(#[from] KError),
}

type Result<T, E = ReduceError> = std::result::Result<T, E>;

/// Edge-disjoint layers `X_0, X_1, …` covering a graph. Each layer stores
/// its edges together with all their endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layering {
    layers: Vec<SubgraphSelection>,
}

impl Layering {
    pub fn new(layers: Vec<SubgraphSelection>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[SubgraphSelection] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layer_of_edges(&self) -> BTreeMap<EdgeId, usize> {
        self.layers.iter().enumerate().flat_map(|(i, l)| l.edges.iter().map(move |&e| (e, i))).collect()
    }

    /// Checks the layering conditions against `g`:
    /// edge-disjoint dual-closed layers covering `g`, a connected `X_0`,
    /// every edge adjusted to `X_0 ∪ … ∪ X_i` lying in `X_{i+1}`, layers two
    /// or more apart sharing no axis, and `X_{i+1}` meeting each component of
    /// the complement of `X_0 ∪ … ∪ X_i` in one connected piece.
    pub fn validate(&self, g: &BiGraph) -> Result<()> {
        let bad = |msg: String| Err(ReduceError::InvalidLayering(msg));
        let Some(first) = self.layers.first() else {
            return bad("no layers".into());
        };
        if first.resolved_axes(g)?.is_empty() || g.selection_components(first)?.len() != 1 {
            return bad("X_0 is empty or disconnected".into());
        }
        let mut seen = BTreeSet::new();
        let mut axes = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.check_dual_closed(g)?;
            for &e in &layer.edges {
                if !seen.insert(e) {
                    return bad(format!("{e} lies in two layers"));
                }
            }
            axes.push(layer.resolved_axes(g)?);
            if i > 0 && layer.edges.is_empty() {
                return bad(format!("layer {i} is empty"));
            }
        }
        if seen.len() != g.edge_count() {
            return bad("layers do not cover the graph".into());
        }
        for i in 0..axes.len() {
            for j in i + 2..axes.len() {
                if let Some(a) = axes[i].intersection(&axes[j]).next() {
                    return bad(format!("layers {i} and {j} share {a}"));
                }
            }
        }
        let mut union = SubgraphSelection::empty();
        for i in 0..self.layers.len() {
            union = union.union(&self.layers[i]);
            union.axes = union.resolved_axes(g)?;
            let delta = g.adjusted_edges(&union)?;
            let Some(next) = self.layers.get(i + 1) else {
                if !delta.is_empty() {
                    return bad("edges left after the last layer".into());
                }
                break;
            };
            if let Some(e) = delta.iter().find(|e| !next.edges.contains(e)) {
                return bad(format!("{e} is adjusted to layers 0..={i} but not in layer {}", i + 1));
            }
            let rest = g.subtract(&union)?;
            for comp in rest.components() {
                let inside = next
                    .edges
                    .iter()
                    .filter(|&&e| comp.contains(&g.edge(e).map(|x| x.src).unwrap_or(AxisId(u32::MAX))));
                let sel = SubgraphSelection { axes: BTreeSet::new(), edges: inside.copied().collect() };
                if g.selection_components(&sel)?.len() != 1 {
                    return bad(format!("layer {} is not connected inside a complement component", i + 1));
                }
            }
        }
        Ok(())
    }
}

/// Closed neighbourhood of an axis: its incident edges and their endpoints.
pub fn closed_neighborhood(g: &BiGraph, a: AxisId) -> Result<SubgraphSelection> {
    let mut edges = BTreeSet::new();
    for &e in g.out_edges(a) {
        edges.insert(e);
        edges.insert(g.edge(e)?.dual);
    }
    let mut sel = SubgraphSelection::from_axes([a]);
    sel.edges = edges;
    sel.axes = sel.resolved_axes(g)?;
    Ok(sel)
}

/// Closed neighbourhood of the axis with the lexicographically first label.
pub fn default_seed(g: &BiGraph) -> Result<SubgraphSelection> {
    let a = g.axes().min_by(|&x, &y| g.label(x).cmp(g.label(y)).then(x.cmp(&y))).ok_or(ReduceError::Empty)?;
    closed_neighborhood(g, a)
}

/// Grows layers from `seed`: each new layer takes the edges adjusted to what
/// is already covered, plus shortest connecting paths so that it forms one
/// piece inside every component of the uncovered remainder.
pub fn layer_decomposition(g: &BiGraph, seed: &SubgraphSelection) -> Result<Layering> {
    if g.axis_count() == 0 {
        return Err(ReduceError::Empty);
    }
    if !g.is_connected() {
        return Err(ReduceError::Disconnected);
    }
    seed.check_dual_closed(g)?;
    let mut first = seed.clone();
    first.axes = seed.resolved_axes(g)?;
    if first.axes.is_empty() || g.selection_components(&first)?.len() != 1 {
        return Err(ReduceError::BadSeed);
    }
    let mut union = first.clone();
    let mut layers = vec![first];
    while union.edges.len() < g.edge_count() {
        let rest = g.subtract(&union)?;
        let mut layer = g.adjusted_edges(&union)?;
        for comp in rest.components() {
            loop {
                let inside: BTreeSet<EdgeId> =
                    layer.iter().copied().filter(|&e| comp.contains(&rest.edge(e).expect("rest edge").src)).collect();
                let pieces = g.selection_components(&SubgraphSelection { axes: BTreeSet::new(), edges: inside })?;
                if pieces.len() <= 1 {
                    break;
                }
                let targets: BTreeSet<AxisId> = pieces[1..].iter().flat_map(|p| p.axes.iter().copied()).collect();
                for e in connecting_path(&rest, &pieces[0].axes, &targets) {
                    layer.insert(e);
                    layer.insert(rest.edge(e)?.dual);
                }
            }
        }
        let mut sel = SubgraphSelection { axes: BTreeSet::new(), edges: layer };
        sel.axes = sel.resolved_axes(g)?;
        union = union.union(&sel);
        union.axes = union.resolved_axes(g)?;
        layers.push(sel);
    }
    Ok(Layering { layers })
}

/// Shortest path in `g` from `sources` to any axis of `targets`.
fn connecting_path(g: &BiGraph, sources: &BTreeSet<AxisId>, targets: &BTreeSet<AxisId>) -> Vec<EdgeId> {
    let mut parent: BTreeMap<AxisId, EdgeId> = BTreeMap::new();
    let mut seen: BTreeSet<AxisId> = sources.clone();
    let mut queue: VecDeque<AxisId> = sources.iter().copied().collect();
    while let Some(a) = queue.pop_front() {
        for &e in g.out_edges(a) {
            let b = g.edge(e).expect("edge").rng;
            if !seen.insert(b) {
                continue;
            }
            parent.insert(b, e);
            if targets.contains(&b) {
                let mut path = Vec::new();
                let mut at = b;
                while let Some(&p) = parent.get(&at) {
                    path.push(p);
                    at = g.edge(p).expect("edge").src;
                }
                return path;
            }
            queue.push_back(b);
        }
    }
    Vec::new()
}

/// An odd-layer component collapsed to one axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapsedAxis {
    pub layer: usize,
    pub axis: AxisId,
    pub loops: usize,
}

/// The graph `Ê` with its collapsed odd-layer components.
#[derive(Clone, Debug)]
pub struct OddShrink {
    pub graph: BiGraph,
    pub collapsed: Vec<CollapsedAxis>,
    /// Layer of every surviving edge.
    pub edge_layer: BTreeMap<EdgeId, usize>,
    /// Original axis to axis of `Ê`.
    pub axis_map: BTreeMap<AxisId, AxisId>,
}

/// Shrinks a spanning bi-tree of every odd-layer component.
pub fn shrink_odd_layers(g: &BiGraph, layering: &Layering) -> Result<OddShrink> {
    let mut trees = Vec::new();
    let mut layer_of_tree = Vec::new();
    for (i, layer) in layering.layers().iter().enumerate().skip(1).step_by(2) {
        for comp in g.selection_components(layer)? {
            trees.push(g.spanning_bitree_within(&comp)?);
            layer_of_tree.push(i);
        }
    }
    let f = g.factorize(&trees)?;
    let edge_layer: BTreeMap<EdgeId, usize> =
        layering.layer_of_edges().into_iter().filter(|(e, _)| f.graph.has_edge(*e)).collect();
    let collapsed = f
        .quotient_axes
        .iter()
        .zip(layer_of_tree)
        .map(|(&axis, layer)| {
            let loops = f.graph.out_edges(axis).iter().filter(|&&e| edge_layer[&e] == layer).count() / 2;
            CollapsedAxis { layer, axis, loops }
        })
        .collect();
    Ok(OddShrink { graph: f.graph.clone(), collapsed, edge_layer, axis_map: f.axis_map().clone() })
}

/// A bi-edge added when splitting a collapsed axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreshBiEdge {
    /// New axis carrying the edges from the layer below.
    pub lower: AxisId,
    /// The collapsed axis itself.
    pub upper: AxisId,
    pub forward: EdgeId,
    pub backward: EdgeId,
}

/// The graph `Ě`.
#[derive(Clone, Debug)]
pub struct SplitStage {
    pub graph: BiGraph,
    pub collapsed: Vec<CollapsedAxis>,
    pub fresh: Vec<FreshBiEdge>,
    /// Layer of every edge inherited from `Ê`; fresh edges are absent.
    pub edge_layer: BTreeMap<EdgeId, usize>,
    /// Axis of `Ê` to axis of `Ě` for edges of the layer below each split.
    pub lower_of: BTreeMap<AxisId, AxisId>,
}

/// Splits every collapsed axis of layer `i` into two axes joined by a fresh
/// bi-edge, moving the edges of layer `i - 1` onto the new axis.
pub fn split_axes(hat: &OddShrink) -> Result<SplitStage> {
    let g = &hat.graph;
    let mut next = g.next_axis_id().0;
    let mut lower_of = BTreeMap::new();
    let mut layer_below = BTreeMap::new();
    let mut extra = Vec::new();
    for c in &hat.collapsed {
        let touches = g.out_edges(c.axis).iter().any(|e| hat.edge_layer[e] + 1 == c.layer);
        if !touches {
            continue;
        }
        let lower = AxisId(next);
        next += 1;
        extra.push((lower, format!("{}'", g.label(c.axis))));
        lower_of.insert(c.axis, lower);
        layer_below.insert(c.axis, c.layer - 1);
    }
    let moved = |e: EdgeId, a: AxisId| match layer_below.get(&a) {
        Some(&l) if hat.edge_layer[&e] == l => lower_of[&a],
        _ => a,
    };
    let mut graph = g.rewired(extra, |id, e| (moved(id, e.src), moved(id, e.rng)))?;
    let mut fresh = Vec::new();
    for c in &hat.collapsed {
        if let Some(&lower) = lower_of.get(&c.axis) {
            let name = format!("{}~{}", graph.label(lower), graph.label(c.axis));
            let (g2, forward, backward) = graph.with_bi_edge(lower, c.axis, name)?;
            graph = g2;
            fresh.push(FreshBiEdge { lower, upper: c.axis, forward, backward });
        }
    }
    Ok(SplitStage { graph, collapsed: hat.collapsed.clone(), fresh, edge_layer: hat.edge_layer.clone(), lower_of })
}

/// Whether shrinking the fresh bi-edges of `check` gives back `hat` edge for
/// edge, up to renaming the re-merged axes.
pub fn split_round_trip(hat: &OddShrink, check: &SplitStage) -> Result<bool> {
    let pieces: Vec<SubgraphSelection> = check
        .fresh
        .iter()
        .map(|f| SubgraphSelection { axes: [f.lower, f.upper].into(), edges: [f.forward, f.backward].into() })
        .collect();
    let q = check.graph.factorize(&pieces)?;
    let back: BTreeMap<AxisId, AxisId> = q.quotient_axes.iter().zip(&check.fresh).map(|(&a, f)| (a, f.upper)).collect();
    let rename = |a: AxisId| back.get(&a).copied().unwrap_or(a);
    if q.graph.axis_count() != hat.graph.axis_count() || q.graph.edge_count() != hat.graph.edge_count() {
        return Ok(false);
    }
    for (id, e) in q.graph.edges() {
        let Ok(orig) = hat.graph.edge(id) else {
            return Ok(false);
        };
        if rename(e.src) != orig.src || rename(e.rng) != orig.rng || e.dual != orig.dual {
            return Ok(false);
        }
    }
    let all = q.graph.axes().all(|a| hat.graph.has_axis(rename(a)));
    Ok(all)
}

/// The final rose-tree bi-graph `Ẽ`.
#[derive(Clone, Debug)]
pub struct TildeStage {
    pub graph: BiGraph,
    pub root: AxisId,
    /// Axis of `Ě` to axis of `Ẽ`.
    pub axis_map: BTreeMap<AxisId, AxisId>,
    pub rose: RoseTree,
}

/// Shrinks a spanning bi-tree of every block: the component of layer 0, and
/// for each odd `i` the components formed by the collapsed axes of layer
/// `i` with the edges of layer `i + 1`. `root` is the axis of `Ě` that the
/// seed ended up in.
pub fn shrink_z_trees(check: &SplitStage, root: AxisId) -> Result<TildeStage> {
    let g = &check.graph;
    let by_layer =
        |l: usize| -> BTreeSet<EdgeId> { check.edge_layer.iter().filter(|(_, &x)| x == l).map(|(&e, _)| e).collect() };
    let mut blocks = Vec::new();
    let zero = by_layer(0);
    if !zero.is_empty() {
        blocks.extend(g.selection_components(&SubgraphSelection { axes: BTreeSet::new(), edges: zero })?);
    }
    let odd_layers: BTreeSet<usize> = check.collapsed.iter().map(|c| c.layer).collect();
    for &i in &odd_layers {
        let sel = SubgraphSelection {
            axes: check.collapsed.iter().filter(|c| c.layer == i).map(|c| c.axis).collect(),
            edges: by_layer(i + 1),
        };
        blocks.extend(g.selection_components(&sel)?);
    }
    let trees = blocks.iter().map(|b| g.spanning_bitree_within(b)).collect::<Result<Vec<_>, _>>()?;
    let f = g.factorize(&trees)?;
    if !f.graph.is_rose_tree() {
        return Err(ReduceError::NotRoseTree("tree shrinking"));
    }
    let root = f.tilde_iota(root).ok_or(GraphError::UnknownAxis(root))?;
    let rose = RoseTree::from_bigraph(&f.graph, root)?;
    Ok(TildeStage { graph: f.graph.clone(), root, axis_map: f.axis_map().clone(), rose })
}

/// All stages of the reduction of a finite connected bi-graph.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub layering: Layering,
    pub hat: OddShrink,
    pub check: SplitStage,
    pub tilde: TildeStage,
    /// Original axis to axis of `Ẽ`.
    pub axis_map: BTreeMap<AxisId, AxisId>,
    /// K-groups of `E`, `Ê`, `Ě`, `Ẽ` when checking was requested.
    pub stage_groups: Option<[KGroups; 4]>,
}

impl Reduction {
    pub fn rose(&self) -> &RoseTree {
        &self.tilde.rose
    }
}

/// Runs the full layered reduction. With `check_groups`, K-groups are
/// computed at every stage and any change is an error.
pub fn reduce_finite(g: &BiGraph, seed: Option<&SubgraphSelection>, check_groups: bool) -> Result<Reduction> {
    let seed = match seed {
        Some(s) => s.clone(),
        None => default_seed(g)?,
    };
    let layering = layer_decomposition(g, &seed)?;
    layering.validate(g)?;
    let hat = shrink_odd_layers(g, &layering)?;
    let check = split_axes(&hat)?;
    let layer_axes: Vec<BTreeSet<AxisId>> =
        layering.layers().iter().map(|l| l.resolved_axes(g)).collect::<Result<_, _>>()?;
    let collapsed_layer: BTreeMap<AxisId, usize> = hat.collapsed.iter().map(|c| (c.axis, c.layer)).collect();
    let check_axis = |a: AxisId| {
        let h = hat.axis_map[&a];
        match (check.lower_of.get(&h), collapsed_layer.get(&h)) {
            (Some(&lower), Some(&l)) if layer_axes[l - 1].contains(&a) => lower,
            _ => h,
        }
    };
    let seed_axis = *seed.resolved_axes(g)?.iter().next().ok_or(ReduceError::BadSeed)?;
    let tilde = shrink_z_trees(&check, check_axis(seed_axis))?;
    let axis_map = g.axes().map(|a| (a, tilde.axis_map[&check_axis(a)])).collect();
    let stage_groups = if check_groups {
        let groups = [
            bhk::k_groups_finite(g)?,
            bhk::k_groups_finite(&hat.graph)?,
            bhk::k_groups_finite(&check.graph)?,
            bhk::k_groups_finite(&tilde.graph)?,
        ];
        for (i, stage) in ["odd-layer shrinking", "axis splitting", "tree shrinking"].into_iter().enumerate() {
            if groups[i] != groups[i + 1] {
                return Err(ReduceError::KMismatch {
                    stage,
                    before: Box::new(groups[i].clone()),
                    after: Box::new(groups[i + 1].clone()),
                });
            }
        }
        Some(groups)
    } else {
        None
    };
    Ok(Reduction { layering, hat, check, tilde, axis_map, stage_groups })
}

/// One-step reduction of a finite connected graph: shrink a spanning
/// bi-tree, leaving a single axis with `β` loops.
pub fn reduce_shortcut(g: &BiGraph) -> Result<RoseTree> {
    if g.axis_count() == 0 {
        return Err(ReduceError::Empty);
    }
    if !g.is_connected() {
        return Err(ReduceError::Disconnected);
    }
    let f = g.factorize(&[g.spanning_bitree()?])?;
    RoseTree::from_bigraph(&f.graph, f.quotient_axes[0])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoseAxis {
    pub label: String,
    pub loops: u64,
    pub parent: Option<usize>,
}

/// A tail running off to infinity: a path of axes hanging from `attach`
/// whose loop counts repeat `template` forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoseTail {
    pub label: String,
    pub attach: usize,
    pub template: Vec<u64>,
}

/// Rooted rose-tree: a finite core (axis 0 is the root) plus periodic tails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoseTree {
    axes: Vec<RoseAxis>,
    tails: Vec<RoseTail>,
}

impl RoseTree {
    pub fn new(axes: Vec<RoseAxis>, tails: Vec<RoseTail>) -> Result<Self> {
        let bad = |m: &str| Err(ReduceError::BadRoseTree(m.to_string()));
        match axes.first() {
            None => return bad("no axes"),
            Some(r) if r.parent.is_some() => return bad("root has a parent"),
            _ => {}
        }
        for (i, a) in axes.iter().enumerate().skip(1) {
            let mut at = i;
            let mut steps = 0;
            while let Some(p) = axes[at].parent {
                if p >= axes.len() || steps > axes.len() {
                    return bad("parent links do not lead to the root");
                }
                at = p;
                steps += 1;
            }
            if a.parent.is_none() {
                return bad("second root");
            }
        }
        for t in &tails {
            if t.attach >= axes.len() || t.template.is_empty() {
                return bad("tail attachment or template invalid");
            }
        }
        Ok(Self { axes, tails })
    }

    /// Reads a finite rose-tree bi-graph rooted at `root`.
    pub fn from_bigraph(g: &BiGraph, root: AxisId) -> Result<Self> {
        if !g.is_rose_tree() {
            return Err(ReduceError::NotRoseTree("input"));
        }
        let mut index = BTreeMap::from([(root, 0usize)]);
        let mut axes = vec![RoseAxis { label: g.label(root).to_string(), loops: 0, parent: None }];
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            let i = index[&a];
            for &e in g.out_edges(a) {
                let edge = g.edge(e)?;
                if edge.is_loop() {
                    axes[i].loops += 1;
                } else if let Entry::Vacant(slot) = index.entry(edge.rng) {
                    slot.insert(axes.len());
                    axes.push(RoseAxis { label: g.label(edge.rng).to_string(), loops: 0, parent: Some(i) });
                    queue.push_back(edge.rng);
                }
            }
        }
        for a in &mut axes {
            a.loops /= 2;
        }
        Self::new(axes, Vec::new())
    }

    pub fn axes(&self) -> &[RoseAxis] {
        &self.axes
    }

    pub fn tails(&self) -> &[RoseTail] {
        &self.tails
    }

    pub fn is_finite(&self) -> bool {
        self.tails.is_empty()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.axes.len()).filter(|&j| self.axes[j].parent == Some(i)).collect()
    }

    /// Per core axis, whether its subtree reaches a tail.
    pub fn live(&self) -> Vec<bool> {
        let mut live = vec![false; self.axes.len()];
        for t in &self.tails {
            let mut at = Some(t.attach);
            while let Some(i) = at {
                live[i] = true;
                at = self.axes[i].parent;
            }
        }
        live
    }

    pub fn has_dead_branches(&self) -> bool {
        self.live().iter().any(|&l| !l)
    }

    /// Total petal count, countably infinite as soon as a tail has loops.
    pub fn total_beta(&self) -> Cardinal {
        if self.tails.iter().any(|t| t.template.iter().any(|&n| n > 0)) {
            return Cardinal::CountablyInfinite;
        }
        Cardinal::Finite(self.axes.iter().map(|a| a.loops).sum())
    }

    /// Valency numbers of the core axes: the root counts all of its live
    /// branches, any other live axis all but the one it continues along.
    /// Tail axes all have valency 0.
    pub fn valency_numbers(&self) -> Vec<(usize, u64)> {
        let live = self.live();
        let mut branches = vec![0u64; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate() {
            if let (Some(p), true) = (a.parent, live[i]) {
                branches[p] += 1;
            }
        }
        for t in &self.tails {
            branches[t.attach] += 1;
        }
        branches.iter().enumerate().map(|(i, &b)| (i, if i == 0 { b } else { b.saturating_sub(1) })).collect()
    }

    pub fn total_gamma(&self) -> Cardinal {
        Cardinal::Finite(self.valency_numbers().iter().map(|&(_, n)| n).sum())
    }

    /// Merges every finite branch into its nearest live ancestor. A tree
    /// without tails collapses to a single axis carrying all petals.
    pub fn prune_dead_branches(&self) -> RoseTree {
        let live = self.live();
        let mut keep: Vec<usize> = (0..self.axes.len()).filter(|&i| live[i]).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let new_index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &i)| (i, n)).collect();
        let mut axes: Vec<RoseAxis> = keep
            .iter()
            .map(|&i| RoseAxis {
                label: self.axes[i].label.clone(),
                loops: 0,
                parent: self.axes[i].parent.map(|p| new_index[&p]),
            })
            .collect();
        for (i, a) in self.axes.iter().enumerate() {
            let mut at = i;
            while !new_index.contains_key(&at) {
                at = self.axes[at].parent.unwrap_or(0);
            }
            axes[new_index[&at]].loops += a.loops;
        }
        let tails = self.tails.iter().map(|t| RoseTail { attach: new_index[&t.attach], ..t.clone() }).collect();
        RoseTree { axes, tails }
    }
}

/// `K_0` of a rose-tree with tails and no dead branches: free of rank
/// `β + γ`.
pub fn rose_tree_k0(r: &RoseTree) -> Result<AbelianGroup> {
    if r.is_finite() {
        return Err(ReduceError::FiniteRoseTree);
    }
    if r.has_dead_branches() {
        return Err(ReduceError::DeadBranches);
    }
    Ok(AbelianGroup::free(r.total_beta() + r.total_gamma()))
}

/// `K_1` of a rose-tree: free on its petals.
pub fn rose_tree_k1(r: &RoseTree) -> AbelianGroup {
    AbelianGroup::free(r.total_beta())
}

pub fn valency_numbers(r: &RoseTree) -> Vec<(usize, u64)> {
    r.valency_numbers()
}

/// Reduction of a ray description: the layered reduction of a long enough
/// truncation, with each ray's tip region replaced by the periodic tail it
/// settles into.
#[derive(Clone, Debug)]
pub struct InfiniteReduction {
    pub periods: usize,
    pub truncated: Reduction,
    /// Rose-tree with tails, dead branches still present.
    pub rose: RoseTree,
    /// Per ray: index of the first template axis in the truncated rose-tree
    /// and the number of ray steps one template spans.
    pub templates: Vec<(usize, usize)>,
}

type Memo = Mutex<HashMap<(GraphDescription, usize), Arc<InfiniteReduction>>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// Reduces a ray description, requiring each ray's tail to repeat its
/// template at least `depth` times in the materialized region. Results are
/// memoized per `(desc, depth)`.
pub fn reduce_description(desc: &GraphDescription, depth: usize) -> Result<Arc<InfiniteReduction>> {
    let key = (desc.clone(), depth);
    if let Some(r) = memo().lock().expect("memo lock").get(&key) {
        return Ok(r.clone());
    }
    let r = Arc::new(reduce_description_uncached(desc, depth)?);
    memo().lock().expect("memo lock").insert(key, r.clone());
    Ok(r)
}

fn reduce_description_uncached(desc: &GraphDescription, depth: usize) -> Result<InfiniteReduction> {
    if desc.is_finite() {
        return Err(ReduceError::Unsupported("description has no rays".into()));
    }
    if !desc.base().is_connected() {
        return Err(ReduceError::Disconnected);
    }
    let mut periods = 4 * (depth + 2) + desc.base().vertices().len();
    let mut last = None;
    for _ in 0..4 {
        match reduce_truncation(desc, depth, periods) {
            Ok(r) => return Ok(r),
            Err(e @ ReduceError::Unsupported(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
        periods *= 2;
    }
    Err(last.expect("at least one attempt"))
}

fn reduce_truncation(desc: &GraphDescription, depth: usize, periods: usize) -> Result<InfiniteReduction> {
    let trunc = ends::truncate_tagged(desc, periods);
    let g = BiGraph::associate(&trunc.graph);
    let base = desc.base();
    let mut seed = SubgraphSelection::from_axes((0..base.vertices().len() as u32).map(AxisId));
    seed.edges = (0..2 * base.links().len() as u32).map(EdgeId).collect();
    let reduction = reduce_finite(&g, Some(&seed), true)?;
    let tilde = &reduction.tilde;
    let rose = &tilde.rose;

    // rose axis index of every Ẽ axis, and the origins collapsed into it
    let mut rose_index = BTreeMap::from([(tilde.root, 0usize)]);
    {
        let mut queue = VecDeque::from([tilde.root]);
        while let Some(a) = queue.pop_front() {
            for &e in tilde.graph.out_edges(a) {
                let b = tilde.graph.edge(e)?.rng;
                if !rose_index.contains_key(&b) {
                    rose_index.insert(b, rose_index.len());
                    queue.push_back(b);
                }
            }
        }
    }
    let mut origins: Vec<BTreeSet<Origin>> = vec![BTreeSet::new(); rose.axes().len()];
    for (a, t) in &reduction.axis_map {
        origins[rose_index[t]].insert(trunc.origins[a.0 as usize]);
    }

    let mut removed = vec![false; rose.axes().len()];
    let mut tails = Vec::new();
    let mut templates = Vec::new();
    for (r, ray) in desc.rays().iter().enumerate() {
        let p = ray.period_len();
        // axes made only of this ray's vertices, by first step
        let mut pure: Vec<(usize, usize, usize)> = origins
            .iter()
            .enumerate()
            .filter_map(|(i, o)| {
                let steps: Option<Vec<usize>> = o
                    .iter()
                    .map(|x| match *x {
                        Origin::Ray { ray, step } if ray == r => Some(step),
                        _ => None,
                    })
                    .collect();
                let steps = steps?;
                Some((*steps.iter().min()?, *steps.iter().max()?, i))
            })
            .collect();
        pure.sort();
        let guard = 2 * p + 4;
        let limit = periods * p;
        let eligible = pure.iter().take_while(|x| x.1 + guard <= limit).count();
        let loops = |j: usize| rose.axes()[pure[j].2].loops;
        let chained = |j: usize| rose.axes()[pure[j + 1].2].parent == Some(pure[j].2);
        let mut found = None;
        'search: for j0 in 0..eligible {
            for q in 1..eligible - j0 {
                if eligible - j0 < q * (depth + 1) {
                    break;
                }
                let shift = pure[j0 + q].0 - pure[j0].0;
                if !shift.is_multiple_of(p) {
                    continue;
                }
                let periodic = (j0..eligible - q).all(|j| {
                    pure[j + q].0 == pure[j].0 + shift && pure[j + q].1 == pure[j].1 + shift && loops(j + q) == loops(j)
                });
                if periodic && (j0..eligible - 1).all(chained) {
                    found = Some((j0, q, shift));
                    break 'search;
                }
            }
        }
        let Some((j0, q, shift)) = found else {
            return Err(ReduceError::Unsupported(format!("ray {} shows no periodic template", ray.name)));
        };
        let template: Vec<u64> = (j0..j0 + q).map(loops).collect();
        let per_period: u64 = ray.period.iter().map(|s| s.loops as u64).sum();
        if template.iter().sum::<u64>() != per_period * (shift / p) as u64 {
            return Err(ReduceError::Unsupported(format!("ray {} template loses loops", ray.name)));
        }
        // the tail is everything below its first template axis: a bare chain
        let mut at = pure[j0].2;
        loop {
            let foreign = origins[at].iter().any(|o| !matches!(o, Origin::Ray { ray, .. } if *ray == r));
            let children = rose.children(at);
            if foreign || children.len() > 1 || removed[at] {
                return Err(ReduceError::Unsupported(format!("ray {} does not end in a bare tail", ray.name)));
            }
            removed[at] = true;
            match children.first() {
                Some(&c) => at = c,
                None => break,
            }
        }
        let attach = rose.axes()[pure[j0].2].parent.ok_or_else(|| ReduceError::Unsupported("tail at root".into()))?;
        tails.push((RoseTail { label: ray.name.clone(), attach, template }, r));
        templates.push((pure[j0].2, shift));
    }
    let keep: Vec<usize> = (0..rose.axes().len()).filter(|&i| !removed[i]).collect();
    let new_index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &i)| (i, n)).collect();
    let axes = keep
        .iter()
        .map(|&i| RoseAxis { parent: rose.axes()[i].parent.map(|p| new_index[&p]), ..rose.axes()[i].clone() })
        .collect();
    let mut out_tails = Vec::new();
    for (t, _) in tails {
        let attach = *new_index
            .get(&t.attach)
            .ok_or_else(|| ReduceError::Unsupported("tail attaches inside another tail".into()))?;
        out_tails.push(RoseTail { attach, ..t });
    }
    let rose = RoseTree::new(axes, out_tails)?;
    Ok(InfiniteReduction { periods, truncated: reduction, rose, templates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::fixtures::*;
    use crate::ends::fixtures::{line, ray};

    fn layering(g: &BiGraph) -> Layering {
        layer_decomposition(g, &default_seed(g).unwrap()).unwrap()
    }

    #[test]
    fn finite_layering_is_valid_and_exhausts() {
        for g in [
            path3(),
            triangle(),
            theta(),
            rose(3),
            bigraph(
                &["a", "b", "c", "d", "e"],
                &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a"), ("b", "d")],
            ),
        ] {
            let l = layering(&g);
            l.validate(&g).unwrap();
            let covered: usize = l.layers().iter().map(|x| x.edges.len()).sum();
            assert_eq!(covered, g.edge_count());
        }
    }

    #[test]
    fn layering_rejects_bad_input() {
        let g = bigraph(&["a", "b", "c"], &[("a", "b")]);
        assert!(matches!(
            layer_decomposition(&g, &SubgraphSelection::from_axes([AxisId(0)])),
            Err(ReduceError::Disconnected)
        ));
        let p = path3();
        let bad = Layering::new(vec![p.full_selection(), p.full_selection()]);
        assert!(bad.validate(&p).is_err());
        // a long path split into non-adjacent layers
        let g = bigraph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")]);
        let layer = |ids: &[u32]| {
            let mut s = SubgraphSelection::from_edges(&g, ids.iter().map(|&i| EdgeId(i))).unwrap();
            s.axes = s.resolved_axes(&g).unwrap();
            s
        };
        assert!(Layering::new(vec![layer(&[0]), layer(&[2]), layer(&[4])]).validate(&g).is_ok());
        assert!(Layering::new(vec![layer(&[0]), layer(&[2, 4])]).validate(&g).is_ok());
        assert!(Layering::new(vec![layer(&[0, 4]), layer(&[2])]).validate(&g).is_err());
    }

    #[test]
    fn ray_truncation_layers_follow_the_ray() {
        let d = ray(&[1]);
        let t = ends::truncate(&d, 5);
        let g = BiGraph::associate(&t);
        let l = layer_decomposition(&g, &SubgraphSelection::from_axes([AxisId(0)])).unwrap();
        l.validate(&g).unwrap();
        for layer in &l.layers()[1..] {
            assert_eq!(g.selection_components(layer).unwrap().len(), 1);
        }
        let two = ends::truncate(&line(), 4);
        let g = BiGraph::associate(&two);
        let l = layer_decomposition(&g, &SubgraphSelection::from_axes([AxisId(0)])).unwrap();
        l.validate(&g).unwrap();
        // the first layer meets both rays at the shared vertex
        assert_eq!(g.selection_components(&l.layers()[1]).unwrap().len(), 1);
        for layer in &l.layers()[2..] {
            assert_eq!(g.selection_components(layer).unwrap().len(), 2);
        }
    }

    #[test]
    fn odd_layer_collapse_counts_loops() {
        // the lone axis a as X_0, everything else one odd layer
        let g = bigraph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "b")]);
        let l = Layering::new(vec![SubgraphSelection::from_axes([AxisId(0)]), g.full_selection()]);
        l.validate(&g).unwrap();
        let hat = shrink_odd_layers(&g, &l).unwrap();
        assert!(hat.collapsed.iter().all(|c| c.layer % 2 == 1));
        assert_eq!(hat.collapsed.len(), 1);
        assert_eq!(hat.collapsed[0].loops, 1);
        assert_eq!(hat.graph.loop_count(), 1);
        assert_eq!(bhk::k_groups_finite(&g).unwrap(), bhk::k_groups_finite(&hat.graph).unwrap());
        // a single odd bi-edge collapses with no loops
        let p = bigraph(&["a", "b"], &[("a", "b")]);
        let hat =
            shrink_odd_layers(&p, &Layering::new(vec![SubgraphSelection::from_axes([AxisId(0)]), p.full_selection()]))
                .unwrap();
        assert_eq!(hat.collapsed, vec![CollapsedAxis { layer: 1, axis: AxisId(2), loops: 0 }]);
    }

    #[test]
    fn split_round_trips() {
        for g in
            [theta(), bigraph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "b"), ("a", "a")])]
        {
            let l = layering(&g);
            let hat = shrink_odd_layers(&g, &l).unwrap();
            let check = split_axes(&hat).unwrap();
            assert!(split_round_trip(&hat, &check).unwrap());
            assert_eq!(bhk::k_groups_finite(&check.graph).unwrap(), bhk::k_groups_finite(&hat.graph).unwrap());
        }
        let r = rose(2);
        let hat = shrink_odd_layers(&r, &Layering::new(vec![r.full_selection()])).unwrap();
        let check = split_axes(&hat).unwrap();
        assert!(check.fresh.is_empty());
        assert_eq!(check.graph, r);
    }

    #[test]
    fn finite_pipeline_ends_in_a_petal_rose() {
        let graphs = [
            theta(),
            rose(3),
            triangle(),
            bigraph(&["a", "b", "c", "d"], &[("a", "a"), ("a", "b"), ("b", "c"), ("c", "d"), ("d", "d")]),
            bigraph(
                &["a", "b", "c", "d", "e"],
                &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a"), ("b", "d"), ("c", "c")],
            ),
        ];
        for g in graphs {
            let r = reduce_finite(&g, None, true).unwrap();
            let pruned = r.rose().prune_dead_branches();
            assert_eq!(pruned.axes().len(), 1);
            assert_eq!(r.rose().total_beta(), Cardinal::Finite(g.betti()));
            assert_eq!(reduce_shortcut(&g).unwrap().axes()[0].loops, g.betti());
        }
    }

    #[test]
    fn pipeline_only_keeps_fresh_bi_edges_as_tree_edges() {
        let g = bigraph(
            &["a", "b", "c", "d", "e", "f"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "a"), ("c", "f"), ("d", "d")],
        );
        let r = reduce_finite(&g, None, true).unwrap();
        let fresh: BTreeSet<EdgeId> = r.check.fresh.iter().flat_map(|f| [f.forward, f.backward]).collect();
        for (id, e) in r.tilde.graph.edges() {
            assert!(e.is_loop() || fresh.contains(&id));
        }
    }

    #[test]
    fn barbell_reduces_to_rose_two() {
        let g = bigraph(&["a", "b", "c", "d"], &[("a", "a"), ("a", "b"), ("b", "c"), ("c", "d"), ("d", "d")]);
        let r = reduce_shortcut(&g).unwrap();
        assert_eq!(r.axes(), &[RoseAxis { label: "a".into(), loops: 2, parent: None }]);
    }

    fn path_rose(n: usize, tail_loops: &[u64], ends: usize) -> RoseTree {
        let axes = (0..n).map(|i| RoseAxis { label: format!("v{i}"), loops: 0, parent: i.checked_sub(1) }).collect();
        let tails = (0..ends)
            .map(|k| RoseTail { label: format!("t{k}"), attach: n - 1, template: tail_loops.to_vec() })
            .collect();
        RoseTree::new(axes, tails).unwrap()
    }

    #[test]
    fn rose_tree_closed_forms() {
        let one_end = path_rose(1, &[0], 1);
        assert_eq!(rose_tree_k0(&one_end).unwrap(), AbelianGroup::free(1u64));
        assert_eq!(rose_tree_k1(&one_end), AbelianGroup::trivial());
        assert_eq!(rose_tree_k0(&path_rose(1, &[0], 2)).unwrap(), AbelianGroup::free(2u64));
        let petals = path_rose(3, &[1], 1);
        assert_eq!(rose_tree_k0(&petals).unwrap(), AbelianGroup::free(Cardinal::CountablyInfinite));
        assert_eq!(rose_tree_k1(&petals), AbelianGroup::free(Cardinal::CountablyInfinite));
        let finite = reduce_shortcut(&rose(3)).unwrap();
        assert!(matches!(rose_tree_k0(&finite), Err(ReduceError::FiniteRoseTree)));
        let kernel = crate::zlattice::kernel_basis(bhk::id_minus_phi(&rose(3)).matrix()).len() as u64;
        assert_eq!(rose_tree_k1(&finite), AbelianGroup::free(kernel));
    }

    #[test]
    fn valency_numbers_count_live_branches() {
        let p = path_rose(4, &[0], 1);
        assert_eq!(valency_numbers(&p), vec![(0, 1), (1, 0), (2, 0), (3, 0)]);
        // root with two children, each carrying a tail, plus a dead child
        let axes = vec![
            RoseAxis { label: "r".into(), loops: 1, parent: None },
            RoseAxis { label: "x".into(), loops: 0, parent: Some(0) },
            RoseAxis { label: "y".into(), loops: 0, parent: Some(0) },
            RoseAxis { label: "z".into(), loops: 2, parent: Some(0) },
        ];
        let tails = vec![
            RoseTail { label: "s".into(), attach: 1, template: vec![0] },
            RoseTail { label: "t".into(), attach: 2, template: vec![0] },
        ];
        let r = RoseTree::new(axes, tails).unwrap();
        assert_eq!(r.total_gamma(), Cardinal::Finite(2));
        assert!(r.has_dead_branches());
        assert!(matches!(rose_tree_k0(&r), Err(ReduceError::DeadBranches)));
        let pruned = r.prune_dead_branches();
        assert_eq!(pruned.axes().len(), 3);
        assert_eq!(pruned.axes()[0].loops, 3);
        assert_eq!(rose_tree_k0(&pruned).unwrap(), AbelianGroup::free(5u64));
        // finite trees: no live branches at all
        let f = reduce_finite(&theta(), None, false).unwrap();
        assert_eq!(f.rose().total_gamma(), Cardinal::ZERO);
    }

    #[test]
    fn groups_do_not_depend_on_the_seed() {
        let g =
            bigraph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c"), ("b", "b")]);
        let expected = bhk::k_groups_finite(&g).unwrap();
        for a in g.axes().collect::<Vec<_>>() {
            let r = reduce_finite(&g, Some(&closed_neighborhood(&g, a).unwrap()), true).unwrap();
            assert_eq!(r.stage_groups.unwrap()[3], expected);
        }
    }

    #[test]
    fn looped_ray_reduces_to_a_petal_tail() {
        let r = reduce_description(&ray(&[1]), 5).unwrap();
        assert_eq!(r.rose.tails().len(), 1);
        let t = &r.rose.tails()[0];
        assert!(t.template.iter().all(|&n| n > 0));
        assert_eq!(r.rose.total_beta(), Cardinal::CountablyInfinite);
        assert_eq!(r.rose.prune_dead_branches().total_gamma(), Cardinal::Finite(1));
    }

    #[test]
    fn loopless_ray_and_line() {
        let r = reduce_description(&ray(&[0]), 5).unwrap().rose.prune_dead_branches();
        assert_eq!(rose_tree_k0(&r).unwrap(), AbelianGroup::free(1u64));
        let l = reduce_description(&line(), 5).unwrap().rose.prune_dead_branches();
        assert_eq!(l.total_gamma(), Cardinal::Finite(2));
    }
}
