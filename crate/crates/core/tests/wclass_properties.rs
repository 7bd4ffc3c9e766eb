use proptest::prelude::*;

use wconcur::bounds::{
    bound_eq5, bound_eq6, condition_check_theorem4, max_per_block_size, pure_bipartite_values, pure_tripartite_sq,
    theorem4_pure, tilde_c3_sq,
};
use wconcur::combinatorics::pair_singleton_partitions;
use wconcur::concurrence::{concurrence_pure, partition_concurrence_pure};
use wconcur::sampling::{random_pure_state, random_w_coefficients, stream_rng};
use wconcur::tensor::{density_from_pure, partial_trace, purity};
use wconcur::verify::random_balanced_state;
use wconcur::wclass::{
    verify_theorem3, w_balance_identity, w_concurrence_sq, w_pair_partition_concurrence_sq, w_reduced_linear_entropy,
    w_tilde_sum_sq,
};
use wconcur::{Partition, SubsystemSet, WCoefficients};

fn w(seed: u64, n: usize) -> WCoefficients {
    random_w_coefficients(&mut stream_rng(seed, 0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_entropy_closed_form_matches_partial_trace(seed in any::<u64>(), n in 2usize..=6) {
        let a = w(seed, n);
        let rho = density_from_pure(&a.to_state());
        for mask in 1..(1u64 << n) {
            let s = SubsystemSet::from_mask(mask);
            let traced = 1.0 - purity(&partial_trace(&rho, s).unwrap());
            prop_assert!((w_reduced_linear_entropy(&a, s).unwrap() - traced).abs() < 1e-12);
        }
    }

    #[test]
    fn concurrence_closed_form_matches_pure_engine(seed in any::<u64>(), n in 2usize..=8) {
        let a = w(seed, n);
        let c = concurrence_pure(&a.to_state()).unwrap();
        prop_assert!((w_concurrence_sq(&a) - c * c).abs() < 1e-10);
    }

    #[test]
    fn pair_partition_closed_form_matches_coarse_graining(seed in any::<u64>(), n in 3usize..=6) {
        let a = w(seed, n);
        let psi = a.to_state();
        for i in 1..=n {
            for j in i + 1..=n {
                let c = partition_concurrence_pure(&psi, &Partition::pair_with_singletons(n, i, j).unwrap()).unwrap();
                prop_assert!((w_pair_partition_concurrence_sq(&a, i, j).unwrap() - c * c).abs() < 1e-10);
                prop_assert_eq!(
                    w_pair_partition_concurrence_sq(&a, i, j).unwrap(),
                    w_pair_partition_concurrence_sq(&a, j, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn tilde_sum_and_relation(seed in any::<u64>(), n in 3usize..=7) {
        let a = w(seed, n);
        let psi = a.to_state();
        let mut sum = 0.0;
        for p in pair_singleton_partitions(n).unwrap() {
            let c = partition_concurrence_pure(&psi, &p).unwrap();
            sum += c * c;
        }
        prop_assert!((w_tilde_sum_sq(&a).unwrap() - sum).abs() < 1e-10);
        prop_assert!(verify_theorem3(&a).unwrap().residual < 1e-12);
    }

    #[test]
    fn closed_forms_are_permutation_covariant(seed in any::<u64>(), n in 3usize..=6, rot in 0usize..6) {
        let a = w(seed, n);
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let b = a.permuted(&perm).unwrap();
        prop_assert!((w_concurrence_sq(&a) - w_concurrence_sq(&b)).abs() < 1e-14);
        prop_assert!((w_tilde_sum_sq(&a).unwrap() - w_tilde_sum_sq(&b).unwrap()).abs() < 1e-13);
        let c_a = concurrence_pure(&a.to_state()).unwrap();
        let c_b = concurrence_pure(&b.to_state()).unwrap();
        prop_assert!((c_a - c_b).abs() < 1e-12);
    }

    #[test]
    fn w4_states_satisfy_the_balance_identity(seed in any::<u64>()) {
        let a = w(seed, 4);
        let closed = w_balance_identity(&a).unwrap();
        let traced = condition_check_theorem4(&a.to_state()).unwrap();
        prop_assert!(closed.holds && traced.holds);
        prop_assert!((closed.lhs - traced.lhs).abs() < 1e-12);
        prop_assert!((closed.rhs - traced.rhs).abs() < 1e-12);
        let (report, condition) = theorem4_pure(&a.to_state()).unwrap();
        prop_assert!(condition.holds && !report.conditional);
        prop_assert!((report.value * report.value - w_concurrence_sq(&a)).abs() < 1e-10);
    }

    #[test]
    fn bounds_never_exceed_the_concurrence(seed in any::<u64>(), n in 3usize..=5) {
        let psi = random_pure_state(&mut stream_rng(seed, 0), &vec![2; n]);
        let exact = concurrence_pure(&psi).unwrap();
        let values = pure_bipartite_values(&psi).unwrap();
        prop_assert!(bound_eq5(n, &values).unwrap().value <= exact + 1e-10);
        prop_assert!(bound_eq6(n, &max_per_block_size(&values)).unwrap().value <= exact + 1e-10);
    }

    #[test]
    fn four_qubit_balance_gap_is_nonnegative(seed in any::<u64>()) {
        let r = condition_check_theorem4(&random_pure_state(&mut stream_rng(seed, 0), &[2, 2, 2, 2])).unwrap();
        prop_assert!(r.lhs - r.rhs > -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn balanced_states_meet_the_four_party_equality(seed in any::<u64>()) {
        let psi = random_balanced_state(&mut stream_rng(seed, 0));
        let c = concurrence_pure(&psi).unwrap();
        let tilde = tilde_c3_sq(&pure_tripartite_sq(&psi).unwrap()).unwrap();
        prop_assert!((c * c - tilde / 5.0).abs() < 1e-8);
    }
}

#[test]
fn single_excitation_on_one_party_is_a_product() {
    let a = WCoefficients::from_real(&[1.0, 0.0, 0.0]).unwrap();
    assert_eq!(w_concurrence_sq(&a), 0.0);
    assert_eq!(concurrence_pure(&a.to_state()).unwrap(), 0.0);
}

#[test]
fn equal_weight_values() {
    let a = WCoefficients::uniform(4);
    assert!((w_concurrence_sq(&a) - 1.5).abs() < 1e-15);
    assert!((w_pair_partition_concurrence_sq(&a, 1, 2).unwrap() - 1.25).abs() < 1e-15);
    assert!((w_tilde_sum_sq(&a).unwrap() - 7.5).abs() < 1e-14);
    let r = verify_theorem3(&a).unwrap();
    assert!((r.rhs - 1.5).abs() < 1e-15);
}
