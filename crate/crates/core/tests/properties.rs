use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use ckgraph::bhk;
use ckgraph::bigraph::BiGraph;
use ckgraph::ends;
use ckgraph::format;
use ckgraph::random;
use ckgraph::verify;
use ckgraph::zlattice::{self, SparseIntMatrix};

fn matrix() -> impl Strategy<Value = SparseIntMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-6i64..=6, c), r)
            .prop_map(|rows| SparseIntMatrix::from_rows(&rows))
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_factors_the_matrix(m in matrix()) {
        let s = zlattice::smith_normal_form(&m);
        prop_assert!(s.verify(&m));
        let d = s.diagonal();
        prop_assert!(d.iter().all(|x| *x > BigInt::zero()));
        prop_assert!(d.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
    }

    #[test]
    fn rank_plus_nullity((m, rp, cp) in matrix().prop_flat_map(|m| {
        let (r, c) = (m.nrows(), m.ncols());
        (Just(m), permutation(r), permutation(c))
    })) {
        let kernel = zlattice::kernel_basis(&m);
        prop_assert_eq!(zlattice::rank(&m) + kernel.len(), m.ncols());
        for v in &kernel {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
        let p = m.permuted(&rp, &cp);
        prop_assert_eq!(zlattice::cokernel(&p), zlattice::cokernel(&m));
        prop_assert_eq!(zlattice::rank(&p), zlattice::rank(&m));
    }

    #[test]
    fn finite_groups_follow_betti(seed in any::<u64>()) {
        let g = random::connected_multigraph(&mut random::rng(seed), 1 + (seed % 8) as usize, 2 + (seed % 5) as usize);
        let beta = g.betti();
        let groups = bhk::k_groups_finite(&BiGraph::associate(&g)).unwrap();
        prop_assert_eq!(groups, bhk::finite_formula(beta).unwrap());
    }

    #[test]
    fn reduction_keeps_loops_and_groups(seed in any::<u64>()) {
        let c = verify::check_reduction(&verify::finite_graph(seed)).unwrap();
        prop_assert!(c.passed(), "{:?}", c);
    }

    #[test]
    fn emit_parse_round_trip(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let desc = if seed % 2 == 0 {
            ends::GraphDescription::Finite(random::bounded_graph(&mut rng, 0..=4, 12))
        } else {
            random::ray_description(&mut rng)
        };
        prop_assert_eq!(format::parse(&format::emit(&desc)).unwrap(), desc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ray_routes_agree(seed in any::<u64>()) {
        let desc = random::ray_description(&mut random::rng(seed));
        let (pipeline, formula) = ends::k_groups_both_routes(&desc, ends::DEFAULT_DEPTH).unwrap();
        prop_assert_eq!(Some(pipeline), formula);
    }
}
