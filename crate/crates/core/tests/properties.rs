//! Property tests for the structural invariants of the index/weight layer
//! and the Chebyshev basis.

use proptest::prelude::*;

use mlcspg_core::chebyshev::{cheb_tensor, tensor_sup_norm};
use mlcspg_core::multiindex::MultiIndex;
use mlcspg_core::weights::{
    weighted_lp_norm, weighted_sparsity, WeightConfig, WeightedVector,
};

fn small_weight_config() -> impl Strategy<Value = WeightConfig> {
    // at least 3 active dimensions so every generated index has finite weight
    (1.05f64..2.0, 3usize..6, 1.0f64..2.0)
        .prop_map(|(beta, d, theta)| WeightConfig::constant(beta, d, theta).unwrap())
}

fn dense_index(dims: usize, max_degree: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max_degree, dims)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_multiplicative_on_disjoint_supports(
        w in small_weight_config(),
        left in dense_index(3, 4),
        right in dense_index(3, 4),
    ) {
        // place the two indices on disjoint dimension ranges of a wider config
        let beta = match w.kind() {
            mlcspg_core::weights::WeightKind::Constant { beta, .. } => *beta,
            _ => unreachable!(),
        };
        let wide = WeightConfig::constant(beta, 6, w.theta()).unwrap();
        let a = MultiIndex::from_dense(&left);
        let shifted: Vec<(u32, u32)> = right
            .iter()
            .enumerate()
            .filter(|&(_, &k)| k > 0)
            .map(|(i, &k)| (i as u32 + 4, k))
            .collect();
        let b = MultiIndex::from_pairs(shifted).unwrap();
        let sum = MultiIndex::from_pairs(
            a.entries().iter().chain(b.entries().iter()).copied(),
        )
        .unwrap();
        let lhs = wide.weight_of(&sum);
        let rhs = wide.weight_of(&a) * wide.weight_of(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn candidate_sets_are_downward_closed_and_monotone(
        w in small_weight_config(),
        s_small in 2.0f64..40.0,
        extra in 0.0f64..40.0,
    ) {
        let gamma_small = w.enumerate_candidate_set(s_small).unwrap();
        let gamma_large = w.enumerate_candidate_set(s_small + extra).unwrap();
        // monotone in s
        for nu in &gamma_small {
            prop_assert!(gamma_large.contains(nu));
        }
        // downward closed: decrement any single active degree
        for nu in &gamma_large {
            for &(dim, degree) in nu.entries() {
                let smaller = MultiIndex::from_pairs(
                    nu.entries()
                        .iter()
                        .map(|&(j, k)| if j == dim { (j, degree - 1) } else { (j, k) }),
                )
                .unwrap();
                prop_assert!(
                    gamma_large.contains(&smaller),
                    "{smaller} missing below {nu}"
                );
            }
        }
    }

    #[test]
    fn weighted_l1_equals_pointwise_product(
        w in small_weight_config(),
        degrees in prop::collection::vec(dense_index(3, 3), 1..5),
        values in prop::collection::vec(-10.0f64..10.0, 1..5),
    ) {
        let mut support = Vec::new();
        let mut vals = Vec::new();
        for (d, v) in degrees.iter().zip(&values) {
            let nu = MultiIndex::from_dense(d);
            if !support.contains(&nu) {
                support.push(nu);
                vals.push(*v);
            }
        }
        let x = WeightedVector::new(support.clone(), vals.clone()).unwrap();
        let l1 = weighted_lp_norm(&x, &w, 1.0).unwrap();
        let direct: f64 = support
            .iter()
            .zip(&vals)
            .map(|(nu, v)| w.weight_of(nu) * v.abs())
            .sum();
        prop_assert!((l1 - direct).abs() <= 1e-10 * direct.max(1.0));

        // p = 2 collapses to the unweighted norm
        let l2 = weighted_lp_norm(&x, &w, 2.0).unwrap();
        let plain: f64 = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((l2 - plain).abs() <= 1e-10 * plain.max(1.0));
    }

    #[test]
    fn sparsity_counts_only_nonzeros(
        w in small_weight_config(),
        values in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let support = vec![
            MultiIndex::zero(),
            MultiIndex::from_dense(&[1]),
            MultiIndex::from_dense(&[0, 1]),
        ];
        let x = WeightedVector::new(support.clone(), values.clone()).unwrap();
        let direct: f64 = support
            .iter()
            .zip(&values)
            .filter(|&(_, v)| *v != 0.0)
            .map(|(nu, _)| {
                let wn = w.weight_of(nu);
                wn * wn
            })
            .sum();
        prop_assert_eq!(weighted_sparsity(&x, &w), direct);
    }

    #[test]
    fn tensor_evaluations_respect_sup_norm(
        degrees in dense_index(4, 6),
        coords in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let nu = MultiIndex::from_dense(&degrees);
        let value = cheb_tensor(&nu, &coords).unwrap();
        prop_assert!(value.abs() <= tensor_sup_norm(&nu) + 1e-12);
    }
}
