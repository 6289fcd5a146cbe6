mod common;

use nalgebra::{dmatrix, DMatrix};
use proptest::prelude::*;

use switched_bt::balancing::{
    balance, balance_average, error_bound, truncate, truncated_sigma, BalancedRealization, ReductionPlan,
};
use switched_bt::examples::three_mode_example;
use switched_bt::gramians::{compute_gramians, CoupledOptions, GramianSet};
use switched_bt::linalg::min_max_sym_eig;
use switched_bt::random::{random_similarity, random_stable_model, RandomModelSpec};
use switched_bt::{apply_equivalence, EquivalenceTransform, LssModel, ModeSystem};

use common::rel;

fn pipeline(m: &LssModel) -> (GramianSet, BalancedRealization) {
    let g = compute_gramians(m, &CoupledOptions::default()).unwrap();
    let b = balance(m, &g).unwrap();
    (g, b)
}

#[test]
fn balanced_model_has_equal_diagonal_gramians() {
    let (_, bal) = pipeline(&three_mode_example());
    let g = compute_gramians(&bal.model, &CoupledOptions::default()).unwrap();
    for (q, s) in bal.sigma.iter().enumerate() {
        let d = DMatrix::from_diagonal(s);
        assert!(rel(&g.reach[q], &d) < 1e-8);
        assert!(rel(&g.obs[q], &d) < 1e-8);
    }
}

#[test]
fn transforms_are_inverse_pairs() {
    let (g, bal) = pipeline(&three_mode_example());
    for q in 0..3 {
        let (s, si) = (&bal.transforms[q], &bal.inverses[q]);
        let n = s.nrows();
        assert!(rel(&(s * si), &DMatrix::identity(n, n)) < 1e-12);
        let p = s * &g.reach[q] * s.transpose();
        let qq = si.transpose() * &g.obs[q] * si;
        assert!(rel(&p, &DMatrix::from_diagonal(&bal.sigma[q])) < 1e-9);
        assert!(rel(&qq, &p) < 1e-9);
    }
}

#[test]
fn reference_plans() {
    let (_, bal) = pipeline(&three_mode_example());
    let plan = ReductionPlan::from_threshold(&bal.sigma, 0.5).unwrap();
    assert_eq!(plan.orders, vec![1, 1, 1]);
    let full = ReductionPlan::full(&[3, 3, 3]);
    assert_eq!(error_bound(&bal.sigma, &full).unwrap().bound, 0.0);
    let b = error_bound(&bal.sigma, &ReductionPlan { orders: vec![1, 3, 2] }).unwrap();
    // η_1 = max(σ_{1,3}, σ_{3,3}), η_2 = σ_{1,2}.
    let expect = 2.0 * (bal.sigma[0][2].max(bal.sigma[2][2]) + bal.sigma[0][1]);
    assert!((b.bound - expect).abs() < 1e-15);
    assert_eq!(b.xi, 2);
}

#[test]
fn truncated_gramians_satisfy_the_coupled_inequalities() {
    let (_, bal) = pipeline(&three_mode_example());
    for orders in [vec![1, 3, 2], vec![1, 1, 1], vec![2, 2, 2]] {
        let plan = ReductionPlan { orders };
        let red = truncate(&bal, &plan).unwrap();
        let lam: Vec<DMatrix<f64>> = truncated_sigma(&bal.sigma, &plan).iter().map(DMatrix::from_diagonal).collect();
        for i in 1..=3 {
            let ms = red.mode(i);
            let l = &lam[i - 1];
            let mut reach = &ms.a * l + l * ms.a.transpose() + &ms.b * ms.b.transpose();
            let mut obs = ms.a.transpose() * l + l * &ms.a + ms.c.transpose() * &ms.c;
            for j in (1..=3).filter(|&j| j != i) {
                let kin = red.coupling(j, i).unwrap();
                let kout = red.coupling(i, j).unwrap();
                reach += kin.as_ref() * &lam[j - 1] * kin.transpose();
                obs += kout.transpose() * &lam[j - 1] * kout.as_ref();
            }
            for lhs in [reach, obs] {
                let (_, hi) = min_max_sym_eig(&lhs);
                assert!(hi <= 1e-10, "mode {i}: {hi}");
            }
        }
    }
}

#[test]
fn average_baseline_uses_one_transform() {
    let m = three_mode_example();
    let (g, _) = pipeline(&m);
    let bt2 = balance_average(&m, &g).unwrap();
    for q in 1..3 {
        assert_eq!(bt2.transforms[q], bt2.transforms[0]);
    }
    let s = &bt2.transforms[0];
    let si = &bt2.inverses[0];
    let mean = |xs: &[DMatrix<f64>]| xs.iter().fold(DMatrix::zeros(3, 3), |a, x| a + x) / 3.0;
    let p = s * mean(&g.reach) * s.transpose();
    let q = si.transpose() * mean(&g.obs) * si;
    let d = DMatrix::from_diagonal(&bt2.sigma[0]);
    assert!(rel(&p, &d) < 1e-9 && rel(&q, &d) < 1e-9);
}

#[test]
fn average_baseline_rejects_mixed_dimensions() {
    let m = LssModel::new(vec![
        ModeSystem::new(dmatrix![-1.0, 0.0; 0.0, -2.0], dmatrix![1.0; 1.0], dmatrix![1.0, 1.0]),
        ModeSystem::new(dmatrix![-1.0], dmatrix![1.0], dmatrix![1.0]),
    ])
    .with_coupling(1, 2, dmatrix![0.2, 0.1])
    .with_coupling(2, 1, dmatrix![0.1; 0.2]);
    let (g, _) = pipeline(&m);
    assert!(balance_average(&m, &g).is_err());
}

#[test]
fn singular_gramian_is_reported() {
    // Mode 2 has no input and nothing couples into its second state.
    let m = LssModel::new(vec![
        ModeSystem::new(dmatrix![-1.0], dmatrix![1.0], dmatrix![1.0]),
        ModeSystem::new(dmatrix![-1.0, 0.0; 0.0, -2.0], dmatrix![1.0; 0.0], dmatrix![1.0, 1.0]),
    ])
    .with_coupling(1, 2, dmatrix![0.5; 0.0])
    .with_coupling(2, 1, dmatrix![0.2, 0.2]);
    let g = compute_gramians(&m, &CoupledOptions::default()).unwrap();
    assert!(balance(&m, &g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sigma_is_invariant_under_equivalence(seed in 0u64..10_000) {
        let m = random_stable_model(&RandomModelSpec { modes: 3, max_dim: 4, ..Default::default() }, seed);
        let (_, bal) = pipeline(&m);
        let t = EquivalenceTransform::similarity(random_similarity(&m, seed + 1, 20.0)).unwrap();
        let eq = apply_equivalence(&m, &t).unwrap();
        let (_, bal2) = pipeline(&eq);
        for (a, b) in bal.sigma.iter().zip(&bal2.sigma) {
            prop_assert!((a - b).norm() <= 1e-7 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn bound_shrinks_as_orders_grow(seed in 0u64..10_000, pick in 0usize..3) {
        let m = random_stable_model(&RandomModelSpec { modes: 3, min_dim: 2, max_dim: 5, ..Default::default() }, seed);
        let (_, bal) = pipeline(&m);
        let dims = m.state_dims();
        let mut orders = vec![1; 3];
        let mut last = error_bound(&bal.sigma, &ReductionPlan { orders: orders.clone() }).unwrap().bound;
        let mut q = pick;
        while orders != dims {
            while orders[q] == dims[q] {
                q = (q + 1) % 3;
            }
            orders[q] += 1;
            let b = error_bound(&bal.sigma, &ReductionPlan { orders: orders.clone() }).unwrap().bound;
            prop_assert!(b <= last);
            last = b;
            q = (q + 1) % 3;
        }
        prop_assert_eq!(last, 0.0);
    }

    #[test]
    fn sigma_sorted_and_positive(seed in 0u64..10_000) {
        let m = random_stable_model(&RandomModelSpec::default(), seed);
        let (_, bal) = pipeline(&m);
        for s in &bal.sigma {
            prop_assert!(s.iter().all(|&x| x > 0.0));
            prop_assert!(s.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
        prop_assert_eq!(bal.sigma[0].len(), m.mode(1).n());
    }
}
