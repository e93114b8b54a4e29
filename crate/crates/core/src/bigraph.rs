//! Bidirected multigraphs and the graph calculus used by the reduction:
//! association with an undirected multigraph, subtraction, factorization
//! (shrinking), adjusted edges, spanning bi-trees and rose-tree recognition.
//!
//! Terminology: an *axis* is a vertex, an *edge* is a directed arrow, a
//! *bi-edge* is a dual pair of edges and a *link* is an undirected edge of
//! the underlying multigraph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxisId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl fmt::Display for AxisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axis#{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown vertex index {0}")]
    UnknownVertex(usize),
    #[error("unknown axis {0}")]
    UnknownAxis(AxisId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("dual of {0} is not an involution without fixed points")]
    BadDual(EdgeId),
    #[error("endpoints of {0} do not mirror those of its dual")]
    DualEndpoints(EdgeId),
    #[error("{0} and its dual carry the same orientation")]
    DualOrientation(EdgeId),
    #[error("selection is not closed under duality: {0} is missing its dual")]
    NotDualClosed(EdgeId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("components overlap at {0}")]
    OverlappingComponents(AxisId),
    #[error("component {0} is not connected")]
    DisconnectedComponent(usize),
    #[error("component {0} has no axes")]
    EmptyComponent(usize),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// Which half of the edge set an edge belongs to; duality swaps the halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Forward,
    Backward,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Backward,
            Orientation::Backward => Orientation::Forward,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: AxisId,
    pub rng: AxisId,
    pub dual: EdgeId,
    pub orientation: Orientation,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.rng
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Link {
    pub name: String,
    pub ends: (usize, usize),
}

impl Link {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

/// Finite undirected multigraph with named vertices and links. Loops and
/// parallel links are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UndirectedMultigraph {
    vertices: Vec<String>,
    links: Vec<Link>,
}

impl UndirectedMultigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if self.vertices.contains(&name) {
            return Err(GraphError::DuplicateName(name));
        }
        self.vertices.push(name);
        Ok(self.vertices.len() - 1)
    }

    pub fn add_link(&mut self, name: impl Into<String>, a: usize, b: usize) -> Result<usize> {
        let name = name.into();
        for v in [a, b] {
            if v >= self.vertices.len() {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        if self.links.iter().any(|l| l.name == name) {
            return Err(GraphError::DuplicateName(name));
        }
        self.links.push(Link { name, ends: (a, b) });
        Ok(self.links.len() - 1)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn has_link_named(&self, name: &str) -> bool {
        self.links.iter().any(|l| l.name == name)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.links.iter().map(|l| usize::from(l.ends.0 == v) + usize::from(l.ends.1 == v)).sum()
    }

    /// Vertex sets of the connected components, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.vertices.len());
        for l in &self.links {
            uf.union(l.ends.0, l.ends.1);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// `links - vertices + components`.
    pub fn betti(&self) -> u64 {
        (self.links.len() + self.components().len()) as u64 - self.vertices.len() as u64
    }
}

/// A subset of the axes and edges of a host bi-graph. Edge endpoints need
/// not be listed in `axes`; [`SubgraphSelection::resolved_axes`] adds them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubgraphSelection {
    pub axes: BTreeSet<AxisId>,
    pub edges: BTreeSet<EdgeId>,
}

impl SubgraphSelection {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_axes(axes: impl IntoIterator<Item = AxisId>) -> Self {
        Self { axes: axes.into_iter().collect(), edges: BTreeSet::new() }
    }

    /// Selection spanned by `edges`, their duals and all their endpoints.
    pub fn from_edges(host: &BiGraph, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut sel = Self::default();
        for e in edges {
            let edge = host.edge(e)?;
            sel.edges.insert(e);
            sel.edges.insert(edge.dual);
            sel.axes.insert(edge.src);
            sel.axes.insert(edge.rng);
        }
        Ok(sel)
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty() && self.edges.is_empty()
    }

    /// Listed axes together with every endpoint of a listed edge.
    pub fn resolved_axes(&self, host: &BiGraph) -> Result<BTreeSet<AxisId>> {
        let mut axes = self.axes.clone();
        for &e in &self.edges {
            let edge = host.edge(e)?;
            axes.insert(edge.src);
            axes.insert(edge.rng);
        }
        for &a in &self.axes {
            host.check_axis(a)?;
        }
        Ok(axes)
    }

    pub fn check_dual_closed(&self, host: &BiGraph) -> Result<()> {
        for &e in &self.edges {
            if !self.edges.contains(&host.edge(e)?.dual) {
                return Err(GraphError::NotDualClosed(e));
            }
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            axes: self.axes.union(&other.axes).copied().collect(),
            edges: self.edges.union(&other.edges).copied().collect(),
        }
    }
}

/// Finite bidirected multigraph: a directed multigraph with a fixed-point-free
/// duality on edges reversing their direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiGraph {
    axes: BTreeMap<AxisId, String>,
    edges: BTreeMap<EdgeId, Edge>,
    /// Names of links, keyed by the forward edge of each bi-edge.
    link_names: BTreeMap<EdgeId, String>,
    /// Outgoing edges per axis, sorted by id.
    out: BTreeMap<AxisId, Vec<EdgeId>>,
}

impl BiGraph {
    /// Builds and validates a bi-graph from raw parts.
    pub fn new(
        axes: impl IntoIterator<Item = (AxisId, String)>,
        edges: impl IntoIterator<Item = (EdgeId, Edge)>,
    ) -> Result<Self> {
        let g = Self::assemble(axes.into_iter().collect(), edges.into_iter().collect(), BTreeMap::new());
        g.validate()?;
        Ok(g)
    }

    fn assemble(
        axes: BTreeMap<AxisId, String>,
        edges: BTreeMap<EdgeId, Edge>,
        link_names: BTreeMap<EdgeId, String>,
    ) -> Self {
        let mut out: BTreeMap<AxisId, Vec<EdgeId>> = axes.keys().map(|&a| (a, Vec::new())).collect();
        for (&id, e) in &edges {
            out.entry(e.src).or_default().push(id);
        }
        Self { axes, edges, link_names, out }
    }

    /// Checks every structural invariant of a bi-graph.
    pub fn validate(&self) -> Result<()> {
        for (&id, e) in &self.edges {
            self.check_axis(e.src)?;
            self.check_axis(e.rng)?;
            let d = self.edges.get(&e.dual).ok_or(GraphError::UnknownEdge(e.dual))?;
            if e.dual == id || d.dual != id {
                return Err(GraphError::BadDual(id));
            }
            if d.src != e.rng || d.rng != e.src {
                return Err(GraphError::DualEndpoints(id));
            }
            if d.orientation != e.orientation.flip() {
                return Err(GraphError::DualOrientation(id));
            }
        }
        Ok(())
    }

    /// Associated bi-graph: every link becomes a bi-edge, loops included.
    /// Vertex `i` becomes `AxisId(i)`; link `j` becomes the forward edge
    /// `EdgeId(2j)` and its dual `EdgeId(2j + 1)`.
    pub fn associate(g: &UndirectedMultigraph) -> Self {
        let axes = g.vertices().iter().enumerate().map(|(i, n)| (AxisId(i as u32), n.clone())).collect();
        let mut edges = BTreeMap::new();
        let mut names = BTreeMap::new();
        for (j, link) in g.links().iter().enumerate() {
            let (a, b) = (AxisId(link.ends.0 as u32), AxisId(link.ends.1 as u32));
            let (fwd, bwd) = (EdgeId(2 * j as u32), EdgeId(2 * j as u32 + 1));
            edges.insert(fwd, Edge { src: a, rng: b, dual: bwd, orientation: Orientation::Forward });
            edges.insert(bwd, Edge { src: b, rng: a, dual: fwd, orientation: Orientation::Backward });
            names.insert(fwd, link.name.clone());
        }
        Self::assemble(axes, edges, names)
    }

    /// Underlying multigraph; vertices in axis-id order, one link per
    /// forward edge in edge-id order.
    pub fn underlying(&self) -> UndirectedMultigraph {
        let index: BTreeMap<AxisId, usize> = self.axes.keys().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut g = UndirectedMultigraph { vertices: self.axes.values().cloned().collect(), links: Vec::new() };
        for (&id, e) in self.edges.iter().filter(|(_, e)| e.orientation == Orientation::Forward) {
            g.links.push(Link { name: self.link_name(id), ends: (index[&e.src], index[&e.rng]) });
        }
        g
    }

    pub fn axis_count(&self) -> usize {
        self.axes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn link_count(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn axes(&self) -> impl Iterator<Item = AxisId> + '_ {
        self.axes.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(&id, e)| (id, e))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn has_axis(&self, a: AxisId) -> bool {
        self.axes.contains_key(&a)
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    fn check_axis(&self, a: AxisId) -> Result<()> {
        if self.has_axis(a) {
            Ok(())
        } else {
            Err(GraphError::UnknownAxis(a))
        }
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge> {
        self.edges.get(&e).ok_or(GraphError::UnknownEdge(e))
    }

    pub fn label(&self, a: AxisId) -> &str {
        self.axes.get(&a).map(String::as_str).unwrap_or("?")
    }

    /// Name of the link carrying `e`; duals share the name of their forward edge.
    pub fn link_name(&self, e: EdgeId) -> String {
        let Some(edge) = self.edges.get(&e) else { return format!("?{}", e.0) };
        let fwd = if edge.orientation == Orientation::Forward { e } else { edge.dual };
        self.link_names.get(&fwd).cloned().unwrap_or_else(|| format!("e{}", fwd.0))
    }

    pub fn find_axis(&self, label: &str) -> Option<AxisId> {
        self.axes.iter().find(|(_, n)| n.as_str() == label).map(|(&a, _)| a)
    }

    /// Outgoing edges of `a` sorted by id.
    pub fn out_edges(&self, a: AxisId) -> &[EdgeId] {
        self.out.get(&a).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of edge ends at `a`; a loop bi-edge contributes four.
    pub fn degree(&self, a: AxisId) -> usize {
        self.edges.values().map(|e| usize::from(e.src == a) + usize::from(e.rng == a)).sum()
    }

    pub fn next_axis_id(&self) -> AxisId {
        AxisId(self.axes.keys().next_back().map_or(0, |a| a.0 + 1))
    }

    pub fn next_edge_id(&self) -> EdgeId {
        EdgeId(self.edges.keys().next_back().map_or(0, |e| e.0 + 1))
    }

    /// Whole graph as a selection.
    pub fn full_selection(&self) -> SubgraphSelection {
        SubgraphSelection { axes: self.axes.keys().copied().collect(), edges: self.edges.keys().copied().collect() }
    }

    /// Connected components as axis sets, ordered by smallest axis.
    pub fn components(&self) -> Vec<BTreeSet<AxisId>> {
        self.components_of(&self.axes.keys().copied().collect(), self.edges.keys().copied())
    }

    /// Components of the subgraph formed by `axes` and `edges` (whose
    /// endpoints must lie in `axes`).
    fn components_of(&self, axes: &BTreeSet<AxisId>, edges: impl IntoIterator<Item = EdgeId>) -> Vec<BTreeSet<AxisId>> {
        let index: BTreeMap<AxisId, usize> = axes.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut uf = UnionFind::new(axes.len());
        for e in edges {
            let edge = &self.edges[&e];
            uf.union(index[&edge.src], index[&edge.rng]);
        }
        let mut groups: BTreeMap<usize, BTreeSet<AxisId>> = BTreeMap::new();
        for (&a, &i) in &index {
            groups.entry(uf.find(i)).or_default().insert(a);
        }
        let mut out: Vec<_> = groups.into_values().collect();
        out.sort_by_key(|c| *c.iter().next().expect("nonempty component"));
        out
    }

    /// Connected components of a selection, each returned as a selection
    /// carrying its resolved axes.
    pub fn selection_components(&self, sel: &SubgraphSelection) -> Result<Vec<SubgraphSelection>> {
        let axes = sel.resolved_axes(self)?;
        let comps = self.components_of(&axes, sel.edges.iter().copied());
        let mut out: Vec<SubgraphSelection> =
            comps.into_iter().map(|axes| SubgraphSelection { axes, edges: BTreeSet::new() }).collect();
        let owner: BTreeMap<AxisId, usize> =
            out.iter().enumerate().flat_map(|(i, c)| c.axes.iter().map(move |&a| (a, i))).collect();
        for &e in &sel.edges {
            out[owner[&self.edges[&e].src]].edges.insert(e);
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Graph obtained by removing the edges of `x` and then every axis left
    /// without an incident edge.
    pub fn subtract(&self, x: &SubgraphSelection) -> Result<BiGraph> {
        x.check_dual_closed(self)?;
        x.resolved_axes(self)?;
        let edges: BTreeMap<EdgeId, Edge> =
            self.edges.iter().filter(|(id, _)| !x.edges.contains(id)).map(|(&id, &e)| (id, e)).collect();
        let touched: BTreeSet<AxisId> = edges.values().flat_map(|e| [e.src, e.rng]).collect();
        let axes = self.axes.iter().filter(|(a, _)| touched.contains(a)).map(|(&a, n)| (a, n.clone())).collect();
        let names =
            self.link_names.iter().filter(|(id, _)| edges.contains_key(id)).map(|(&k, v)| (k, v.clone())).collect();
        Ok(Self::assemble(axes, edges, names))
    }

    /// Edges outside `x` having at least one endpoint among the axes of `x`.
    pub fn adjusted_edges(&self, x: &SubgraphSelection) -> Result<BTreeSet<EdgeId>> {
        let axes = x.resolved_axes(self)?;
        Ok(self
            .edges
            .iter()
            .filter(|(id, e)| !x.edges.contains(id) && (axes.contains(&e.src) || axes.contains(&e.rng)))
            .map(|(&id, _)| id)
            .collect())
    }

    /// Shrinks every component to a single fresh axis. Surviving edges keep
    /// their ids, so the edge injection back into `self` is the identity.
    pub fn factorize(&self, components: &[SubgraphSelection]) -> Result<Factorization> {
        let mut owner: BTreeMap<AxisId, usize> = BTreeMap::new();
        let mut removed_edges: BTreeSet<EdgeId> = BTreeSet::new();
        for (i, comp) in components.iter().enumerate() {
            comp.check_dual_closed(self)?;
            let axes = comp.resolved_axes(self)?;
            if axes.is_empty() {
                return Err(GraphError::EmptyComponent(i));
            }
            if self.components_of(&axes, comp.edges.iter().copied()).len() != 1 {
                return Err(GraphError::DisconnectedComponent(i));
            }
            for a in axes {
                if owner.insert(a, i).is_some() {
                    return Err(GraphError::OverlappingComponents(a));
                }
            }
            removed_edges.extend(comp.edges.iter().copied());
        }

        let first = self.next_axis_id().0;
        let mut quotient_axes = Vec::with_capacity(components.len());
        let mut axes: BTreeMap<AxisId, String> = BTreeMap::new();
        for (i, next) in (0..components.len()).zip(first..) {
            let alpha = AxisId(next);
            let root = owner.iter().find(|(_, &c)| c == i).map(|(&a, _)| a).expect("nonempty");
            axes.insert(alpha, self.label(root).to_string());
            quotient_axes.push(alpha);
        }
        let mut axis_map = BTreeMap::new();
        for (&a, name) in &self.axes {
            match owner.get(&a) {
                Some(&i) => {
                    axis_map.insert(a, quotient_axes[i]);
                }
                None => {
                    axis_map.insert(a, a);
                    axes.insert(a, name.clone());
                }
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|(id, _)| !removed_edges.contains(id))
            .map(|(&id, e)| (id, Edge { src: axis_map[&e.src], rng: axis_map[&e.rng], ..*e }))
            .collect::<BTreeMap<_, _>>();
        let names =
            self.link_names.iter().filter(|(id, _)| edges.contains_key(id)).map(|(&k, v)| (k, v.clone())).collect();
        let graph = Self::assemble(axes, edges, names);
        debug_assert!(graph.validate().is_ok());
        Ok(Factorization { graph, quotient_axes, axis_map })
    }

    /// Spanning bi-tree grown breadth-first from the lowest axis, scanning
    /// outgoing edges in increasing id order.
    pub fn spanning_bitree(&self) -> Result<SubgraphSelection> {
        self.spanning_bitree_within(&self.full_selection())
    }

    /// Spanning bi-tree of a connected selection, grown breadth-first from
    /// its lowest axis using only edges of the selection.
    pub fn spanning_bitree_within(&self, sel: &SubgraphSelection) -> Result<SubgraphSelection> {
        let axes = sel.resolved_axes(self)?;
        let Some(&root) = axes.iter().next() else {
            return Ok(SubgraphSelection::empty());
        };
        let mut tree = SubgraphSelection::from_axes(axes.iter().copied());
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &e in self.out_edges(a) {
                if !sel.edges.contains(&e) {
                    continue;
                }
                let edge = &self.edges[&e];
                if seen.insert(edge.rng) {
                    tree.edges.insert(e);
                    tree.edges.insert(edge.dual);
                    queue.push_back(edge.rng);
                }
            }
        }
        if seen.len() != axes.len() {
            return Err(GraphError::Disconnected);
        }
        Ok(tree)
    }

    /// First Betti number: `links - axes + components`.
    pub fn betti(&self) -> u64 {
        (self.link_count() + self.components().len()) as u64 - self.axes.len() as u64
    }

    /// Splits the edges into a spanning bi-tree of non-loop edges and loop
    /// edges, if such a partition exists.
    pub fn rose_tree_partition(&self) -> Option<(SubgraphSelection, SubgraphSelection)> {
        if self.axes.is_empty() {
            return None;
        }
        let all_axes: BTreeSet<AxisId> = self.axes.keys().copied().collect();
        let (loops, tree): (Vec<_>, Vec<_>) = self.edges.iter().partition(|(_, e)| e.is_loop());
        let tree: BTreeSet<EdgeId> = tree.into_iter().map(|(&id, _)| id).collect();
        if tree.len() / 2 + 1 != all_axes.len() {
            return None;
        }
        if self.components_of(&all_axes, tree.iter().copied()).len() != 1 {
            return None;
        }
        Some((
            SubgraphSelection { axes: all_axes.clone(), edges: tree },
            SubgraphSelection { axes: all_axes, edges: loops.into_iter().map(|(&id, _)| id).collect() },
        ))
    }

    pub fn is_rose_tree(&self) -> bool {
        self.rose_tree_partition().is_some()
    }

    pub fn loop_count(&self) -> usize {
        self.edges.values().filter(|e| e.is_loop()).count() / 2
    }

    /// Axes with exactly one non-loop bi-edge attached. Loops do not keep
    /// an axis from being a dead end.
    pub fn dead_ends(&self) -> BTreeSet<AxisId> {
        self.axes
            .keys()
            .copied()
            .filter(|&a| self.out_edges(a).iter().filter(|e| !self.edges[e].is_loop()).count() == 1)
            .collect()
    }

    /// Adds a bi-edge and returns `(forward, backward)` ids.
    pub(crate) fn with_bi_edge(&self, a: AxisId, b: AxisId, name: String) -> Result<(BiGraph, EdgeId, EdgeId)> {
        self.check_axis(a)?;
        self.check_axis(b)?;
        let fwd = self.next_edge_id();
        let bwd = EdgeId(fwd.0 + 1);
        let mut edges = self.edges.clone();
        edges.insert(fwd, Edge { src: a, rng: b, dual: bwd, orientation: Orientation::Forward });
        edges.insert(bwd, Edge { src: b, rng: a, dual: fwd, orientation: Orientation::Backward });
        let mut names = self.link_names.clone();
        names.insert(fwd, name);
        Ok((Self::assemble(self.axes.clone(), edges, names), fwd, bwd))
    }

    /// Rebuilds the graph with some edge endpoints moved and extra axes added.
    pub(crate) fn rewired(
        &self,
        extra_axes: impl IntoIterator<Item = (AxisId, String)>,
        mut endpoint: impl FnMut(EdgeId, &Edge) -> (AxisId, AxisId),
    ) -> Result<BiGraph> {
        let mut axes = self.axes.clone();
        axes.extend(extra_axes);
        let edges = self
            .edges
            .iter()
            .map(|(&id, e)| {
                let (src, rng) = endpoint(id, e);
                (id, Edge { src, rng, ..*e })
            })
            .collect();
        let g = Self::assemble(axes, edges, self.link_names.clone());
        g.validate()?;
        Ok(g)
    }
}

/// Result of shrinking disjoint connected components of a bi-graph.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub graph: BiGraph,
    /// Fresh axis replacing each component, in input order.
    pub quotient_axes: Vec<AxisId>,
    axis_map: BTreeMap<AxisId, AxisId>,
}

impl Factorization {
    /// Injection of quotient edges into host edges (the identity on ids).
    pub fn iota(&self, e: EdgeId) -> Option<EdgeId> {
        self.graph.has_edge(e).then_some(e)
    }

    /// Surjection of host axes onto quotient axes.
    pub fn tilde_iota(&self, a: AxisId) -> Option<AxisId> {
        self.axis_map.get(&a).copied()
    }

    pub fn axis_map(&self) -> &BTreeMap<AxisId, AxisId> {
        &self.axis_map
    }
}
