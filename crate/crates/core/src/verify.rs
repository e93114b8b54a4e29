//! Seeded verifiers: each draws its input from a seed, runs one check and
//! reports what it compared.

use num_bigint::BigInt;
use thiserror::Error;

use crate::bhk::{self, KError, KGroups};
use crate::bigraph::{BiGraph, SubgraphSelection};
use crate::ends::{self, EndsError, GraphDescription, ValencyResult};
use crate::random;
use crate::reduce::{self, ReduceError};
use crate::shrink::{ShrinkError, ShrinkReport, SplitSpace};
use crate::zlattice::{AbelianGroup, Cardinal};

/// Betti range and link bound for random finite graphs.
pub const BETAS: std::ops::RangeInclusive<usize> = 2..=12;
pub const MAX_LINKS: usize = 60;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    K(#[from] KError),
    #[error(transparent)]
    Shrink(#[from] ShrinkError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Ends(#[from] EndsError),
}

pub fn finite_graph(seed: u64) -> BiGraph {
    BiGraph::associate(&random::bounded_graph(&mut random::rng(seed), BETAS, MAX_LINKS))
}

#[derive(Clone, Debug)]
pub struct FormulaCheck {
    pub beta: u64,
    pub links: usize,
    pub computed: KGroups,
    pub expected: KGroups,
}

impl FormulaCheck {
    pub fn passed(&self) -> bool {
        self.computed == self.expected
    }
}

/// Compares the Smith-form K-groups with `(Z^β ⊕ Z/(β−1), Z^β)`.
pub fn check_finite_formula(g: &BiGraph) -> Result<FormulaCheck, VerifyError> {
    let beta = g.betti();
    Ok(FormulaCheck {
        beta,
        links: g.link_count(),
        computed: bhk::k_groups_finite(g)?,
        expected: bhk::finite_formula(beta)?,
    })
}

#[derive(Clone, Debug)]
pub struct ShrinkCheck {
    pub trees: usize,
    pub before: KGroups,
    pub after: KGroups,
    pub j: ShrinkReport,
    pub pi: ShrinkReport,
}

impl ShrinkCheck {
    pub fn passed(&self) -> bool {
        self.before == self.after && self.j.all_true() && self.pi.all_true()
    }
}

pub fn check_shrink(g: &BiGraph, trees: &[SubgraphSelection]) -> Result<ShrinkCheck, VerifyError> {
    let split = SplitSpace::new(g, trees)?;
    Ok(ShrinkCheck {
        trees: trees.len(),
        before: bhk::k_groups_finite(g)?,
        after: bhk::k_groups_finite(&split.quotient()?)?,
        j: split.verify_j()?,
        pi: split.verify_pi()?,
    })
}

/// A random finite graph with up to four random disjoint bi-trees.
pub fn shrink_instance(seed: u64) -> (BiGraph, Vec<SubgraphSelection>) {
    let mut rng = random::rng(seed);
    let g = BiGraph::associate(&random::bounded_graph(&mut rng, BETAS, MAX_LINKS));
    let trees = random::disjoint_bitrees(&mut rng, &g, 4, 4);
    (g, trees)
}

#[derive(Clone, Debug)]
pub struct ReductionCheck {
    pub beta: u64,
    pub loops: Cardinal,
    pub certified: bool,
    pub round_trip: bool,
    pub stage_groups: Vec<KGroups>,
}

impl ReductionCheck {
    pub fn passed(&self) -> bool {
        self.certified
            && self.round_trip
            && self.loops == Cardinal::Finite(self.beta)
            && self.stage_groups.windows(2).all(|w| w[0] == w[1])
    }
}

/// Runs the layered reduction with K-groups checked at every stage.
pub fn check_reduction(g: &BiGraph) -> Result<ReductionCheck, VerifyError> {
    let r = match reduce::reduce_finite(g, None, true) {
        Ok(r) => r,
        Err(ReduceError::KMismatch { before, after, .. }) => {
            return Ok(ReductionCheck {
                beta: g.betti(),
                loops: Cardinal::ZERO,
                certified: false,
                round_trip: false,
                stage_groups: vec![*before, *after],
            })
        }
        Err(e) => return Err(e.into()),
    };
    Ok(ReductionCheck {
        beta: g.betti(),
        loops: r.rose().total_beta(),
        certified: r.tilde.graph.is_rose_tree(),
        round_trip: reduce::split_round_trip(&r.hat, &r.check)?,
        stage_groups: r.stage_groups.map(Vec::from).unwrap_or_default(),
    })
}

pub fn check_k1_cycles(g: &BiGraph) -> Result<bool, VerifyError> {
    Ok(bhk::verify_k1_is_h1(g)?)
}

#[derive(Clone, Debug)]
pub struct ValencyCheck {
    pub depth: usize,
    pub pieces: usize,
    pub before: ValencyResult,
    pub after: ValencyResult,
}

impl ValencyCheck {
    pub fn passed(&self) -> bool {
        self.before.gamma == self.after.gamma && self.before.end_labels == self.after.end_labels
    }
}

pub fn check_valency(
    desc: &GraphDescription,
    depth: usize,
    z: &[SubgraphSelection],
) -> Result<ValencyCheck, VerifyError> {
    Ok(ValencyCheck {
        depth,
        pieces: z.len(),
        before: ends::valency_set(desc)?,
        after: ends::valency_set(&ends::quotient(desc, depth, z)?)?,
    })
}

/// A random ray description, a truncation depth and random disjoint
/// connected pieces of that truncation.
pub fn valency_instance(seed: u64) -> (GraphDescription, usize, Vec<SubgraphSelection>) {
    let mut rng = random::rng(seed);
    let desc = random::ray_description(&mut rng);
    let depth = rand::Rng::gen_range(&mut rng, 0..=3);
    let host = BiGraph::associate(&ends::truncate(&desc, depth));
    let z = random::disjoint_subgraphs(&mut rng, &host, 3, 3);
    (desc, depth, z)
}

/// K-groups of a description through the reduction and through the
/// `(β, γ)` formula, for ray descriptions.
pub fn check_routes(desc: &GraphDescription) -> Result<(KGroups, Option<KGroups>), VerifyError> {
    Ok(ends::k_groups_both_routes(desc, ends::DEFAULT_DEPTH)?)
}

/// Truncation K-groups of a description at depths `1..=max_depth`.
pub fn truncation_groups(desc: &GraphDescription, max_depth: usize) -> Result<Vec<KGroups>, VerifyError> {
    (1..=max_depth).map(|k| Ok(bhk::k_groups_finite(&BiGraph::associate(&ends::truncate(desc, k)))?)).collect()
}

/// `(Z^a ⊕ Z/t, Z^b)` as a pair of groups.
pub fn groups(k0_free: impl Into<Cardinal>, torsion: &[u64], k1_free: impl Into<Cardinal>) -> KGroups {
    KGroups {
        k0: AbelianGroup::from_orders(k0_free, torsion.iter().map(|&t| BigInt::from(t))),
        k1: AbelianGroup::free(k1_free),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_checks_pass() {
        for seed in 0..3 {
            assert!(check_finite_formula(&finite_graph(seed)).unwrap().passed());
            let (g, trees) = shrink_instance(seed);
            assert!(check_shrink(&g, &trees).unwrap().passed());
            assert!(check_reduction(&finite_graph(seed)).unwrap().passed());
            assert!(check_k1_cycles(&finite_graph(seed)).unwrap());
            let (d, k, z) = valency_instance(seed);
            assert!(check_valency(&d, k, &z).unwrap().passed());
        }
    }

    #[test]
    fn group_shorthand() {
        assert_eq!(groups(3u64, &[2], 3u64).to_string(), "K0 = Z^3 (+) Z/2, K1 = Z^3");
    }
}
