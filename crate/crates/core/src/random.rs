//! Seeded generators for test and verification inputs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bigraph::{AxisId, BiGraph, EdgeId, SubgraphSelection, UndirectedMultigraph};
use crate::ends::{GraphDescription, RayAttachment};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected multigraph on `vertices` vertices with first Betti number
/// `beta`: a random spanning tree plus `beta` random extra links, loops and
/// parallel links included.
pub fn connected_multigraph<R: Rng>(rng: &mut R, vertices: usize, beta: usize) -> UndirectedMultigraph {
    assert!(vertices > 0, "need at least one vertex");
    let mut g = UndirectedMultigraph::new();
    for i in 0..vertices {
        g.add_vertex(format!("v{i}")).expect("distinct names");
    }
    let mut n = 0;
    let mut link = |g: &mut UndirectedMultigraph, a: usize, b: usize| {
        g.add_link(format!("e{n}"), a, b).expect("vertices exist");
        n += 1;
    };
    for i in 1..vertices {
        let j = rng.gen_range(0..i);
        link(&mut g, j, i);
    }
    for _ in 0..beta {
        let (a, b) = (rng.gen_range(0..vertices), rng.gen_range(0..vertices));
        link(&mut g, a, b);
    }
    g
}

/// Connected multigraph with `β` drawn from `betas` and at most `max_links`
/// links.
pub fn bounded_graph<R: Rng>(
    rng: &mut R,
    betas: std::ops::RangeInclusive<usize>,
    max_links: usize,
) -> UndirectedMultigraph {
    let beta = rng.gen_range(betas);
    let most = (max_links + 1).saturating_sub(beta).clamp(1, 48);
    let vertices = rng.gen_range(1..=most);
    connected_multigraph(rng, vertices, beta)
}

/// Pairwise disjoint bi-trees, each with between one and `max_size` links.
pub fn disjoint_bitrees<R: Rng>(rng: &mut R, g: &BiGraph, count: usize, max_size: usize) -> Vec<SubgraphSelection> {
    grow_pieces(rng, g, count, max_size, false)
}

/// Pairwise disjoint connected subgraphs; unlike bi-trees they may pick up
/// loops and parallel links among their axes.
pub fn disjoint_subgraphs<R: Rng>(rng: &mut R, g: &BiGraph, count: usize, max_size: usize) -> Vec<SubgraphSelection> {
    grow_pieces(rng, g, count, max_size, true)
}

fn grow_pieces<R: Rng>(
    rng: &mut R,
    g: &BiGraph,
    count: usize,
    max_size: usize,
    extras: bool,
) -> Vec<SubgraphSelection> {
    let mut used: BTreeSet<AxisId> = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..count {
        let free: Vec<AxisId> = g.axes().filter(|a| !used.contains(a)).collect();
        let Some(&start) = free.choose(rng) else {
            break;
        };
        let target = rng.gen_range(1..=max_size.max(1));
        let mut axes = BTreeSet::from([start]);
        let mut edges: BTreeSet<EdgeId> = BTreeSet::new();
        while edges.len() / 2 < target {
            let frontier: Vec<EdgeId> = axes
                .iter()
                .flat_map(|&a| g.out_edges(a).iter().copied())
                .filter(|&e| {
                    let r = g.edge(e).expect("edge").rng;
                    !axes.contains(&r) && !used.contains(&r)
                })
                .collect();
            let Some(&e) = frontier.choose(rng) else {
                break;
            };
            let edge = g.edge(e).expect("edge");
            edges.insert(e);
            edges.insert(edge.dual);
            axes.insert(edge.rng);
        }
        if extras {
            for &a in &axes {
                for &e in g.out_edges(a) {
                    let edge = g.edge(e).expect("edge");
                    if axes.contains(&edge.rng) && rng.gen_bool(0.5) {
                        edges.insert(e);
                        edges.insert(edge.dual);
                    }
                }
            }
        }
        used.extend(axes.iter().copied());
        if !edges.is_empty() {
            out.push(SubgraphSelection { axes, edges });
        }
    }
    out
}

/// Small connected base with one to three periodic rays.
pub fn ray_description<R: Rng>(rng: &mut R) -> GraphDescription {
    let n = rng.gen_range(1..=4);
    let beta = rng.gen_range(0..=2);
    let tree = connected_multigraph(rng, n, beta);
    let mut base = UndirectedMultigraph::new();
    for i in 0..n {
        base.add_vertex(format!("b{i}")).expect("distinct names");
    }
    for l in tree.links() {
        base.add_link(l.name.clone(), l.ends.0, l.ends.1).expect("vertices exist");
    }
    let rays = (0..rng.gen_range(1..=3))
        .map(|i| {
            let period: Vec<u32> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..=2)).collect();
            RayAttachment::new(format!("r{i}"), rng.gen_range(0..n), &period)
        })
        .collect();
    GraphDescription::RayExtended { base, rays }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graphs_have_requested_shape() {
        let mut r = rng(7);
        for _ in 0..50 {
            let g = bounded_graph(&mut r, 2..=12, 60);
            assert!(g.is_connected());
            assert!(g.links().len() <= 60);
            assert!((2..=12).contains(&g.betti()));
        }
    }

    #[test]
    fn same_seed_same_graph() {
        assert_eq!(bounded_graph(&mut rng(3), 2..=12, 60), bounded_graph(&mut rng(3), 2..=12, 60));
    }

    #[test]
    fn pieces_are_disjoint() {
        let mut r = rng(11);
        for _ in 0..20 {
            let g = BiGraph::associate(&bounded_graph(&mut r, 2..=6, 40));
            let trees = disjoint_bitrees(&mut r, &g, 4, 3);
            let mut seen = BTreeSet::new();
            for t in &trees {
                assert_eq!(t.edges.len() / 2 + 1, t.axes.len());
                for a in &t.axes {
                    assert!(seen.insert(*a));
                }
            }
            assert!(g.factorize(&disjoint_subgraphs(&mut r, &g, 4, 3)).is_ok());
        }
    }

    #[test]
    fn ray_descriptions_validate() {
        let mut r = rng(5);
        for _ in 0..20 {
            let d = ray_description(&mut r);
            d.validate().unwrap();
            assert!(d.base().is_connected());
        }
    }
}
