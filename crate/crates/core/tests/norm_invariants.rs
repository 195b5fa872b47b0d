//! Orderings and identities between the norm routines on small matrices,
//! checked against the exhaustive oracles.

use htlab::mat::{compact_large, PairedSparseMatrix, SparseEntries, SymmetricMatrix};
use htlab::norms::{
    boyd_power_method, dual_value, grothendieck_lower_witness, grothendieck_value, multistart_ascent,
    oracle_grothendieck_small, oracle_norm_small, paired_grothendieck_closed_form, paired_norm_closed_form,
    rowsum_upper_bound, NormProblem,
};
use htlab::dist::Rng;
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = f64> {
    // Magnitudes spread over several decades, either sign.
    (any::<bool>(), -1.0..3.0f64).prop_map(|(neg, e)| if neg { -(10f64.powf(e)) } else { 10f64.powf(e) })
}

fn matrix(max_n: usize) -> impl Strategy<Value = SymmetricMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(entry(), n * (n + 1) / 2).prop_map(move |u| SymmetricMatrix::from_upper(n, u).unwrap())
    })
}

fn problem() -> impl Strategy<Value = NormProblem> {
    prop::sample::select(vec![(4.0, 2.0), (3.0, 1.5), (2.0, 2.0), (1.5, 3.0), (5.0, 1.25), (2.5, 2.5)])
        .prop_map(|(r, p)| NormProblem::new(r, p).unwrap())
}

fn paired(max_n: usize) -> impl Strategy<Value = PairedSparseMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(entry(), 1..=n / 2).prop_map(move |mut w| {
            w.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            PairedSparseMatrix::new(n, w).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ascent_sits_between_dual_value_and_oracle(a in matrix(5), prob in problem(), seed in any::<u64>()) {
        let cert = multistart_ascent(&a, &prob, 8, 1e-12, &mut Rng::new(seed)).unwrap();
        let exact = oracle_norm_small(&a, &prob).unwrap();
        let y = cert.y.clone().unwrap();
        prop_assert!(dual_value(&a, &prob, &cert.x, &y) <= cert.value * (1.0 + 1e-12) + 1e-12);
        prop_assert!(cert.value <= exact * (1.0 + 1e-9));
        if prob.p < prob.r {
            prop_assert!(exact <= rowsum_upper_bound(&a, &prob).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn grothendieck_value_below_dual_norm(a in matrix(5), r in prop::sample::select(vec![3.0, 4.0, f64::INFINITY])) {
        let prob = NormProblem::grothendieck(r).unwrap();
        let norm = oracle_norm_small(&a, &prob).unwrap();
        let g = grothendieck_value(&a, r, 8, &mut Rng::new(1)).unwrap().value;
        prop_assert!(g <= norm * (1.0 + 1e-9) + 1e-12);
        prop_assert!(oracle_grothendieck_small(&a, r).unwrap() <= norm * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn witness_is_a_lower_bound(a in matrix(5), r in prop::sample::select(vec![2.0, 3.0, 4.0, f64::INFINITY])) {
        prop_assume!(a.n() >= 2);
        let w = grothendieck_lower_witness(&a, r).unwrap();
        let exact = oracle_grothendieck_small(&a, r).unwrap();
        prop_assert!(w <= exact + 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn norm_nonincreasing_in_target_exponent(a in matrix(4), r in prop::sample::select(vec![1.5, 2.0, 4.0]),
                                             p1 in 1.1..4.0f64, dp in 0.0..3.0f64) {
        let small = oracle_norm_small(&a, &NormProblem::new(r, p1).unwrap()).unwrap();
        let large = oracle_norm_small(&a, &NormProblem::new(r, p1 + dp).unwrap()).unwrap();
        prop_assert!(large <= small * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn paired_grothendieck_equals_paired_norm(pm in paired(8), r in prop::sample::select(vec![2.5, 3.0, 4.0, 7.0, f64::INFINITY])) {
        let g = paired_grothendieck_closed_form(&pm, r).unwrap().value;
        let n = paired_norm_closed_form(&pm, &NormProblem::grothendieck(r).unwrap()).unwrap().value;
        prop_assert_eq!(g, n);
    }

    #[test]
    fn closed_forms_satisfy_first_order_conditions(pm in paired(8), r in 2.2..8.0f64, p in 1.05..2.0f64) {
        let c = paired_norm_closed_form(&pm, &NormProblem::new(r, p).unwrap()).unwrap();
        prop_assert!(c.kkt_residual.unwrap() <= 1e-10, "norm residual {:?}", c.kkt_residual);
        let g = paired_grothendieck_closed_form(&pm, r).unwrap();
        prop_assert!(g.kkt_residual.unwrap() <= 1e-10, "grothendieck residual {:?}", g.kkt_residual);
    }

    #[test]
    fn power_method_residual_within_tolerance(a in matrix(6), prob in problem()) {
        prop_assume!(prob.p <= prob.r);
        let a = SymmetricMatrix::from_upper(a.n(), a.upper().iter().map(|v| v.abs()).collect()).unwrap();
        let tol = 1e-11;
        let c = boyd_power_method(&a, &prob, tol, 100_000, &vec![1.0; a.n()]).unwrap();
        prop_assert!(c.kkt_residual.unwrap() <= 10.0 * tol, "residual {:?}", c.kkt_residual);
    }

    #[test]
    fn compaction_keeps_values_and_orders_pairs(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let mut free: Vec<usize> = (0..n).collect();
        let mut entries = Vec::new();
        while free.len() >= 2 && rng.coin(0.7) {
            let i = free.swap_remove((rng.uniform() * free.len() as f64) as usize % free.len());
            let j = free.swap_remove((rng.uniform() * free.len() as f64) as usize % free.len());
            entries.push((i.min(j), i.max(j), rng.normal() * 10f64.powf(3.0 * rng.uniform())));
        }
        let l = SparseEntries::new(n, entries.clone()).unwrap();
        let c = compact_large(&l).unwrap();
        let mut before: Vec<f64> = entries.iter().map(|e| e.2).collect();
        let mut after = c.paired.pairs().to_vec();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        prop_assert_eq!(before, after);
        prop_assert!(c.paired.pairs().windows(2).all(|w| w[0].abs() >= w[1].abs()));
        let (dense, moved) = (l.to_symmetric(), c.paired.to_symmetric());
        for s in 0..n {
            for t in 0..n {
                prop_assert_eq!(moved.get(s, t), dense.get(c.permutation[s], c.permutation[t]));
            }
        }
    }
}

#[test]
fn single_pair_norm_example() {
    let pm = PairedSparseMatrix::new(2, vec![3.0]).unwrap();
    let prob = NormProblem::new(4.0, 2.0).unwrap();
    let closed = paired_norm_closed_form(&pm, &prob).unwrap().value;
    let exact = oracle_norm_small(&pm.to_symmetric(), &prob).unwrap();
    assert!((closed - 3.0 * 2f64.powf(0.25)).abs() < 1e-12);
    assert!((closed - exact).abs() < 1e-9);
}
