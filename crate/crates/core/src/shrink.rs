//! Shrinking finite bi-trees. The edge module splits as `G ⊕ H` with `H`
//! spanned by the tree edges. `P` fixes `G` and acts as `Φ` on `H`; pushing
//! an element with `P` until it leaves `H` gives `P^∞`, and
//! `T̃ = P^∞ ∘ Φ` restricted to `G` is the operator of the shrunk graph.
//!
//! The maps `J: coker(Id_G − T̃) → coker(Id − Φ)` and
//! `Π: ker(Id − Φ) → ker(Id_G − T̃)` are checked here on finite instances
//! with exact lattice computations.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::bhk::{self, EdgeModuleElement, EdgeOperator, KError, KGroups};
use crate::bigraph::{BiGraph, EdgeId, GraphError, SubgraphSelection};
use crate::zlattice::{self, HermiteBasis, LatticeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShrinkError {
    #[error("component {0} is not a finite bi-tree")]
    NotABiTree(usize),
    #[error("P-iteration did not leave H within {cap} steps; H is not a forest of bi-trees")]
    StepCap { cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    K(#[from] KError),
}

/// Host bi-graph with its edges split into `H` (edges being shrunk) and the
/// complement `G`.
#[derive(Clone, Debug)]
pub struct SplitSpace {
    host: BiGraph,
    h_edges: BTreeSet<EdgeId>,
    g_edges: Vec<EdgeId>,
    components: Vec<SubgraphSelection>,
}

/// Outcome of the `J` or `Π` checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ShrinkReport {
    pub well_defined: bool,
    pub injective: bool,
    pub surjective: bool,
    pub p_infinity_max_steps: usize,
    pub groups_match: bool,
}

impl ShrinkReport {
    pub fn all_true(&self) -> bool {
        self.well_defined && self.injective && self.surjective && self.groups_match
    }
}

fn check_bitree(host: &BiGraph, i: usize, comp: &SubgraphSelection) -> Result<(), ShrinkError> {
    comp.check_dual_closed(host)?;
    let axes = comp.resolved_axes(host)?;
    let has_loop = comp.edges.iter().any(|&e| host.edge(e).map(|x| x.is_loop()).unwrap_or(true));
    if has_loop || axes.is_empty() || comp.edges.len() / 2 + 1 != axes.len() {
        return Err(ShrinkError::NotABiTree(i));
    }
    if host.spanning_bitree_within(comp).is_err() {
        return Err(ShrinkError::NotABiTree(i));
    }
    Ok(())
}

impl SplitSpace {
    /// Split along pairwise disjoint finite bi-tree components.
    pub fn new(host: &BiGraph, components: &[SubgraphSelection]) -> Result<Self, ShrinkError> {
        let mut seen = BTreeSet::new();
        for (i, comp) in components.iter().enumerate() {
            check_bitree(host, i, comp)?;
            for a in comp.resolved_axes(host)? {
                if !seen.insert(a) {
                    return Err(GraphError::OverlappingComponents(a).into());
                }
            }
        }
        let h: BTreeSet<EdgeId> = components.iter().flat_map(|c| c.edges.iter().copied()).collect();
        let mut s = Self::from_h_edges(host, h)?;
        s.components = components.to_vec();
        Ok(s)
    }

    /// Split along an arbitrary dual-closed edge set, without the bi-tree
    /// check. `P^∞` may then fail to exist.
    pub fn from_h_edges(host: &BiGraph, h_edges: BTreeSet<EdgeId>) -> Result<Self, ShrinkError> {
        let sel = SubgraphSelection { axes: BTreeSet::new(), edges: h_edges };
        sel.check_dual_closed(host)?;
        let g_edges = host.edge_ids().filter(|e| !sel.edges.contains(e)).collect();
        Ok(Self { host: host.clone(), h_edges: sel.edges, g_edges, components: Vec::new() })
    }

    pub fn host(&self) -> &BiGraph {
        &self.host
    }

    pub fn g_edges(&self) -> &[EdgeId] {
        &self.g_edges
    }

    pub fn h_edges(&self) -> &BTreeSet<EdgeId> {
        &self.h_edges
    }

    pub fn components(&self) -> &[SubgraphSelection] {
        &self.components
    }

    pub fn step_cap(&self) -> usize {
        2 * self.h_edges.len() + 2
    }

    fn in_g(&self, v: &EdgeModuleElement) -> bool {
        v.support().all(|e| !self.h_edges.contains(&e))
    }

    /// Identity on `G` coordinates, `Φ` on `H` coordinates.
    pub fn apply_p(&self, v: &EdgeModuleElement) -> Result<EdgeModuleElement, ShrinkError> {
        let mut out = EdgeModuleElement::zero();
        for (x, k) in v.terms() {
            if self.h_edges.contains(&x) {
                out += &bhk::phi_of_edge(&self.host, x)?.scaled(k);
            } else {
                out.add_term(x, k);
            }
        }
        Ok(out)
    }

    /// Iterates `P` until the element lies in `G`; returns it with the
    /// number of steps taken.
    pub fn p_infinity(&self, v: &EdgeModuleElement) -> Result<(EdgeModuleElement, usize), ShrinkError> {
        let cap = self.step_cap();
        let mut cur = v.clone();
        let mut steps = 0;
        while !self.in_g(&cur) {
            if steps == cap {
                return Err(ShrinkError::StepCap { cap });
            }
            cur = self.apply_p(&cur)?;
            steps += 1;
        }
        Ok((cur, steps))
    }

    /// Matrix of `P^∞ ∘ Φ` on `G`, columns and rows in `g_edges` order.
    pub fn reduced_operator(&self) -> Result<EdgeOperator, ShrinkError> {
        let mut cols = Vec::with_capacity(self.g_edges.len());
        for &x in &self.g_edges {
            let image = bhk::phi_of_edge(&self.host, x)?;
            cols.push(self.p_infinity(&image)?.0);
        }
        let mut it = cols.into_iter();
        Ok(EdgeOperator::from_columns(self.g_edges.clone(), |_| it.next().expect("one column per edge")))
    }

    /// Host `Id − Φ` in host edge order.
    fn host_id_minus_phi(&self) -> EdgeOperator {
        bhk::id_minus_phi(&self.host)
    }

    /// Checks that `J(u + Im(Id_G − T̃)) = u + Im(Id − Φ)` is a well-defined
    /// bijection of cokernels.
    pub fn verify_j(&self) -> Result<ShrinkReport, ShrinkError> {
        let full = self.host_id_minus_phi();
        let all = full.edges().to_vec();
        let dim = all.len();
        let h_coords: Vec<usize> = self.h_edges.iter().map(|&e| full.position(e).expect("host edge")).collect();
        let image = full.matrix().columns();
        let image_hnf = HermiteBasis::new(dim, &image)?;

        let reduced = self.reduced_operator()?.id_minus();
        let reduced_cols = reduced.matrix().columns();
        let reduced_hnf = HermiteBasis::new(self.g_edges.len(), &reduced_cols)?;
        let embed = |v: &[BigInt]| EdgeModuleElement::from_dense(&self.g_edges, v).to_dense(&all);

        // (a) Im(Id_G − T̃) ⊆ Im(Id − Φ)
        let embedded: Vec<Vec<BigInt>> = reduced_cols.iter().map(|c| embed(c)).collect();
        let well_defined = image_hnf.contains_all(&embedded)?;

        // (b) G-vectors of Im(Id − Φ) already lie in Im(Id_G − T̃)
        let g_part: Vec<Vec<BigInt>> = zlattice::sublattice_vanishing_on(dim, &image, &h_coords)?
            .iter()
            .map(|v| EdgeModuleElement::from_dense(&all, v).to_dense(&self.g_edges))
            .collect();
        let injective = reduced_hnf.contains_all(&g_part)?;

        // (c) every basis vector v is congruent to P^∞(v) ∈ G
        let mut surjective = true;
        let mut max_steps = 0;
        for &x in &all {
            let v = EdgeModuleElement::basis(x);
            let (w, steps) = self.p_infinity(&v)?;
            max_steps = max_steps.max(steps);
            let mut diff = v;
            diff -= &w;
            surjective &= self.in_g(&w) && image_hnf.contains(&diff.to_dense(&all))?;
        }

        let k0_host = zlattice::cokernel(full.matrix());
        let k0_reduced = zlattice::cokernel(reduced.matrix());
        Ok(ShrinkReport {
            well_defined,
            injective,
            surjective,
            p_infinity_max_steps: max_steps,
            groups_match: k0_host == k0_reduced,
        })
    }

    /// Checks that projecting onto `G` maps `ker(Id − Φ)` bijectively onto
    /// `ker(Id_G − T̃)`.
    pub fn verify_pi(&self) -> Result<ShrinkReport, ShrinkError> {
        let full = self.host_id_minus_phi();
        let all = full.edges().to_vec();
        let kernel = zlattice::kernel_basis(full.matrix());
        let projected: Vec<Vec<BigInt>> =
            kernel.iter().map(|v| EdgeModuleElement::from_dense(&all, v).to_dense(&self.g_edges)).collect();

        let reduced = self.reduced_operator()?.id_minus();
        let reduced_kernel = zlattice::kernel_basis(reduced.matrix());
        let gdim = self.g_edges.len();
        let well_defined = HermiteBasis::new(gdim, &reduced_kernel)?.contains_all(&projected)?;
        let surjective = HermiteBasis::new(gdim, &projected)?.contains_all(&reduced_kernel)?;

        let g_coords: Vec<usize> = self.g_edges.iter().map(|&e| full.position(e).expect("host edge")).collect();
        let injective = zlattice::sublattice_vanishing_on(all.len(), &kernel, &g_coords)?.is_empty();

        let mut max_steps = 0;
        for &x in &self.g_edges {
            let image = bhk::phi_of_edge(&self.host, x)?;
            max_steps = max_steps.max(self.p_infinity(&image)?.1);
        }
        Ok(ShrinkReport {
            well_defined,
            injective,
            surjective,
            p_infinity_max_steps: max_steps,
            groups_match: kernel.len() == reduced_kernel.len(),
        })
    }

    /// The shrunk bi-graph `E/X`.
    pub fn quotient(&self) -> Result<BiGraph, ShrinkError> {
        Ok(self.host.factorize(&self.components)?.graph)
    }
}

/// Whether shrinking the given disjoint finite bi-trees preserves both
/// K-groups, compared structurally.
pub fn k_invariance(g: &BiGraph, components: &[SubgraphSelection]) -> Result<bool, ShrinkError> {
    let split = SplitSpace::new(g, components)?;
    let before = bhk::k_groups_finite(g)?;
    let after = bhk::k_groups_finite(&split.quotient()?)?;
    Ok(before == after)
}

/// K-groups of `E` and `E/X` side by side.
pub fn k_groups_before_after(g: &BiGraph, components: &[SubgraphSelection]) -> Result<(KGroups, KGroups), ShrinkError> {
    let split = SplitSpace::new(g, components)?;
    Ok((bhk::k_groups_finite(g)?, bhk::k_groups_finite(&split.quotient()?)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::fixtures::*;
    use crate::bigraph::AxisId;

    fn tree(g: &BiGraph, fwd: &[u32]) -> SubgraphSelection {
        SubgraphSelection::from_edges(g, fwd.iter().map(|&e| EdgeId(e))).unwrap()
    }

    fn elem(terms: &[(u32, i64)]) -> EdgeModuleElement {
        EdgeModuleElement::from_terms(terms.iter().map(|&(x, k)| (EdgeId(x), BigInt::from(k))))
    }

    #[test]
    fn p_fixes_g_and_applies_phi_on_h() {
        let g = triangle();
        let s = SplitSpace::new(&g, &[tree(&g, &[0])]).unwrap();
        let v = elem(&[(2, 3), (5, -1)]);
        assert_eq!(s.apply_p(&v).unwrap(), v);
        let eta = EdgeModuleElement::basis(EdgeId(0));
        assert_eq!(s.apply_p(&eta).unwrap(), bhk::phi_of_edge(&g, EdgeId(0)).unwrap());
        let mut mixed = v.clone();
        mixed += &eta;
        let mut expected = v;
        expected += &bhk::phi_of_edge(&g, EdgeId(0)).unwrap();
        assert_eq!(s.apply_p(&mixed).unwrap(), expected);
    }

    #[test]
    fn p_infinity_on_path() {
        let g = path3();
        let s = SplitSpace::new(&g, &[tree(&g, &[2])]).unwrap();
        let g_vec = EdgeModuleElement::basis(EdgeId(0));
        assert_eq!(s.p_infinity(&g_vec).unwrap(), (g_vec, 0));
        // b→c: Φ = (c→b) − (c→b) = 0, so one push clears it
        let (w, steps) = s.p_infinity(&EdgeModuleElement::basis(EdgeId(2))).unwrap();
        assert!(w.is_zero());
        assert_eq!(steps, 1);
        // c→b: Φ = (b→a) + (b→c) − (b→c) = b→a, leaving H in one step
        let (w, steps) = s.p_infinity(&EdgeModuleElement::basis(EdgeId(3))).unwrap();
        assert_eq!(w, EdgeModuleElement::basis(EdgeId(1)));
        assert_eq!(steps, 1);
    }

    #[test]
    fn p_infinity_step_cap_on_loop() {
        let g = rose(1);
        let s = SplitSpace::from_h_edges(&g, BTreeSet::from([EdgeId(0), EdgeId(1)])).unwrap();
        assert_eq!(s.p_infinity(&EdgeModuleElement::basis(EdgeId(0))).unwrap_err(), ShrinkError::StepCap { cap: 6 });
        assert_eq!(SplitSpace::new(&g, &[g.full_selection()]).unwrap_err(), ShrinkError::NotABiTree(0));
    }

    #[test]
    fn reduced_operator_matches_quotient() {
        let cases = [
            (triangle(), vec![0u32]),
            (path3(), vec![2]),
            // rose-2 with a subdivided petal: a-s twice plus one loop at a
            (bigraph(&["a", "s"], &[("a", "s"), ("s", "a"), ("a", "a")]), vec![0]),
            (theta(), vec![]),
        ];
        for (g, fwd) in cases {
            let comps = if fwd.is_empty() { vec![] } else { vec![tree(&g, &fwd)] };
            let s = SplitSpace::new(&g, &comps).unwrap();
            let q = s.quotient().unwrap();
            let expected = EdgeOperator::from_columns(s.g_edges().to_vec(), |x| bhk::phi_of_edge(&q, x).unwrap());
            assert_eq!(s.reduced_operator().unwrap(), expected);
        }
    }

    #[test]
    fn empty_split_is_identity() {
        let g = theta();
        let s = SplitSpace::new(&g, &[]).unwrap();
        assert_eq!(s.reduced_operator().unwrap(), bhk::bass_hashimoto(&g));
        assert!(s.verify_j().unwrap().all_true());
        assert!(s.verify_pi().unwrap().all_true());
        assert!(k_invariance(&g, &[]).unwrap());
    }

    #[test]
    fn triangle_edge_checks() {
        let g = triangle();
        let s = SplitSpace::new(&g, &[tree(&g, &[0])]).unwrap();
        assert!(s.verify_j().unwrap().all_true());
        let pi = s.verify_pi().unwrap();
        assert!(pi.all_true());
        assert_eq!(zlattice::kernel_basis(s.reduced_operator().unwrap().id_minus().matrix()).len(), 2);
        assert!(k_invariance(&g, &[tree(&g, &[0])]).unwrap());
    }

    #[test]
    fn subdivided_petal_kernel_rank_two() {
        let g = bigraph(&["a", "s"], &[("a", "s"), ("s", "a"), ("a", "a")]);
        let s = SplitSpace::new(&g, &[tree(&g, &[0])]).unwrap();
        let pi = s.verify_pi().unwrap();
        assert!(pi.all_true());
        assert_eq!(zlattice::kernel_basis(bhk::id_minus_phi(&g).matrix()).len(), 2);
    }

    #[test]
    fn barbell_matches_rose2() {
        // two loops joined by a three-link path
        let g = bigraph(&["a", "b", "c", "d"], &[("a", "a"), ("a", "b"), ("b", "c"), ("c", "d"), ("d", "d")]);
        let path = tree(&g, &[2, 4, 6]);
        let (before, after) = k_groups_before_after(&g, std::slice::from_ref(&path)).unwrap();
        assert_eq!(before, after);
        assert_eq!(before, bhk::k_groups_finite(&rose(2)).unwrap());
        assert!(k_invariance(&g, &[path]).unwrap());
    }

    #[test]
    fn rejects_overlapping_trees() {
        let g = path3();
        let err = SplitSpace::new(&g, &[tree(&g, &[0]), tree(&g, &[2])]).unwrap_err();
        assert_eq!(err, ShrinkError::Graph(GraphError::OverlappingComponents(AxisId(1))));
    }
}
