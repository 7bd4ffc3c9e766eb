use proptest::prelude::*;

use wconcur::combinatorics::set_partitions;
use wconcur::concurrence::{
    bipartite_concurrence_pure, concurrence_pure, concurrence_pure_with, partition_concurrence_pure, PurityMode,
};
use wconcur::sampling::{random_density_matrix, random_product_state, random_pure_state, random_unitary, stream_rng};
use wconcur::tensor::{density_from_pure, partial_trace, purity};
use wconcur::{PureState, SubsystemSet};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=4)
}

/// Reference N-partite concurrence from explicit density-matrix partial traces.
fn concurrence_by_partial_traces(psi: &PureState) -> f64 {
    let n = psi.n_parties();
    let rho = density_from_pure(psi);
    let total: f64 = (1..(1u64 << n) - 1)
        .map(|m| 1.0 - purity(&partial_trace(&rho, SubsystemSet::from_mask(m)).unwrap()))
        .sum();
    2f64.powf(1.0 - n as f64 / 2.0) * total.max(0.0).sqrt()
}

/// Position of each kept party after tracing out the others.
fn relabel(inner: SubsystemSet, outer: SubsystemSet) -> SubsystemSet {
    let parties: Vec<usize> = inner
        .parties()
        .map(|p| outer.parties().position(|q| q == p).unwrap() + 1)
        .collect();
    SubsystemSet::from_parties(&parties).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_preserves_trace(dims in dims_strategy(), seed in any::<u64>(), keep in 1u64..16, rank in 1usize..4) {
        let n = dims.len();
        let keep = SubsystemSet::from_mask(keep & ((1 << n) - 1));
        prop_assume!(!keep.is_empty());
        let rho = random_density_matrix(&mut stream_rng(seed, 0), &dims, rank);
        let reduced = partial_trace(&rho, keep).unwrap();
        prop_assert!((reduced.trace() - 1.0).abs() < 1e-12);
        let kept_dims: Vec<usize> = keep.parties().map(|p| dims[p - 1]).collect();
        prop_assert_eq!(reduced.dims(), &kept_dims[..]);
    }

    #[test]
    fn staged_partial_traces_agree(dims in dims_strategy(), seed in any::<u64>(), outer in 1u64..16, inner in 1u64..16) {
        let n = dims.len();
        let outer = SubsystemSet::from_mask(outer & ((1 << n) - 1));
        let inner = SubsystemSet::from_mask(inner & outer.mask());
        prop_assume!(!inner.is_empty());
        let rho = random_density_matrix(&mut stream_rng(seed, 0), &dims, 2);
        let direct = partial_trace(&rho, inner).unwrap();
        let staged = partial_trace(&partial_trace(&rho, outer).unwrap(), relabel(inner, outer)).unwrap();
        prop_assert!((direct.matrix() - staged.matrix()).norm() < 1e-12);
    }

    #[test]
    fn purity_lies_between_inverse_dimension_and_one(dims in dims_strategy(), seed in any::<u64>(), rank in 1usize..6) {
        let rho = random_density_matrix(&mut stream_rng(seed, 0), &dims, rank);
        let p = purity(&rho);
        prop_assert!(p <= 1.0 + 1e-12);
        prop_assert!(p >= 1.0 / rho.side() as f64 - 1e-12);
    }

    #[test]
    fn complementary_reductions_share_purity(dims in dims_strategy(), seed in any::<u64>(), keep in 1u64..16) {
        let n = dims.len();
        let keep = SubsystemSet::from_mask(keep & ((1 << n) - 1));
        prop_assume!(keep.is_proper(n));
        let psi = random_pure_state(&mut stream_rng(seed, 0), &dims);
        let a = psi.reduced_purity(keep).unwrap();
        let b = psi.reduced_purity(keep.complement(n)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let rho = density_from_pure(&psi);
        prop_assert!((purity(&partial_trace(&rho, keep).unwrap()) - a).abs() < 1e-12);
        let cut = bipartite_concurrence_pure(&psi, keep).unwrap();
        let other = bipartite_concurrence_pure(&psi, keep.complement(n)).unwrap();
        prop_assert!((cut - other).abs() < 1e-12);
    }

    #[test]
    fn concurrence_matches_partial_trace_definition(dims in dims_strategy(), seed in any::<u64>()) {
        let psi = random_pure_state(&mut stream_rng(seed, 0), &dims);
        let oracle = concurrence_by_partial_traces(&psi);
        prop_assert!((concurrence_pure(&psi).unwrap() - oracle).abs() < 1e-12);
        prop_assert!((concurrence_pure_with(&psi, PurityMode::Oracle).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn local_unitaries_leave_concurrences_unchanged(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let psi = random_pure_state(&mut rng, &dims);
        let mut moved = psi.clone();
        for (i, &d) in dims.iter().enumerate() {
            moved = moved.apply_local(i + 1, &random_unitary(&mut rng, d)).unwrap();
        }
        prop_assert!((concurrence_pure(&psi).unwrap() - concurrence_pure(&moved).unwrap()).abs() < 1e-12);
        let block = SubsystemSet::from_parties(&[1]).unwrap();
        let a = bipartite_concurrence_pure(&psi, block).unwrap();
        let b = bipartite_concurrence_pure(&moved, block).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn product_states_vanish_and_generic_states_do_not(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        prop_assert!(concurrence_pure(&random_product_state(&mut rng, &dims)).unwrap() < 1e-7);
        prop_assert!(concurrence_pure(&random_pure_state(&mut rng, &dims)).unwrap() > 1e-3);
    }

    #[test]
    fn partition_concurrence_matches_block_union_oracle(seed in any::<u64>(), m in 2usize..=4, pick in any::<prop::sample::Index>()) {
        let n = 4;
        let psi = random_pure_state(&mut stream_rng(seed, 0), &[2, 3, 2, 2]);
        let partitions = set_partitions(n, m).unwrap();
        let p = pick.get(&partitions);
        let rho = density_from_pure(&psi);
        let blocks = p.blocks();
        let mut total = 0.0;
        for t in 1..(1u64 << blocks.len()) - 1 {
            let union = blocks
                .iter()
                .enumerate()
                .filter(|(b, _)| t >> b & 1 == 1)
                .fold(SubsystemSet::EMPTY, |acc, (_, blk)| acc.union(*blk));
            total += 1.0 - purity(&partial_trace(&rho, union).unwrap());
        }
        let oracle = 2f64.powf(1.0 - m as f64 / 2.0) * total.sqrt();
        prop_assert!((partition_concurrence_pure(&psi, p).unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn finest_partition_is_the_full_concurrence() {
    let psi = random_pure_state(&mut stream_rng(3, 0), &[2, 2, 3]);
    let p = wconcur::Partition::singletons(3).unwrap();
    let a = partition_concurrence_pure(&psi, &p).unwrap();
    assert!((a - concurrence_pure(&psi).unwrap()).abs() < 1e-14);
}
