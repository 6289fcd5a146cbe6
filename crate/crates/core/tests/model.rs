mod common;

use nalgebra::{dmatrix, DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switched_bt::examples::three_mode_example;
use switched_bt::random::{random_invertible, random_stable_model, RandomModelSpec};
use switched_bt::simulation::{initial_kernel_eval, kernel_eval, transfer_eval};
use switched_bt::{
    apply_equivalence, normalize_descriptor, validate_model, EquivalenceTransform, Error, LssModel, ModeSystem,
    SwitchingSignal, Violation,
};

use common::{c, rel, rel_c};

fn with_descriptors(m: &LssModel, seed: u64) -> LssModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = m.clone();
    for ms in &mut out.modes {
        let e = random_invertible(&mut rng, ms.n(), 10.0);
        // (E, E A, E B) describes the same dynamics as (A, B).
        *ms = ModeSystem::new(&e * &ms.a, &e * &ms.b, ms.c.clone()).with_descriptor(e);
    }
    let d = out.num_modes();
    for i in 1..=d {
        for j in (1..=d).filter(|&j| j != i) {
            let k = m.coupling(i, j).unwrap().into_owned();
            let e = out.modes[j - 1].e.clone().unwrap();
            out.couplings.insert((i, j), e * k);
        }
    }
    out
}

#[test]
fn normalization_recovers_the_explicit_model() {
    let m = three_mode_example();
    let desc = with_descriptors(&m, 4);
    let norm = normalize_descriptor(&desc).unwrap();
    assert!(norm.is_normalized());
    for (a, b) in norm.modes.iter().zip(&m.modes) {
        assert!(rel(&a.a, &b.a) < 1e-12 && rel(&a.b, &b.b) < 1e-12);
    }
}

#[test]
fn descriptor_transfer_functions_survive_normalization() {
    let m = three_mode_example();
    // Scale E only: the identity default coupling must turn into E_j⁻¹.
    let mut desc = m.clone();
    desc.couplings.clear();
    for (q, ms) in desc.modes.iter_mut().enumerate() {
        ms.e = Some(DMatrix::identity(3, 3) * (q as f64 + 2.0));
    }
    let norm = normalize_descriptor(&desc).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let s = [c(rng.random_range(0.0..3.0), rng.random_range(-4.0..4.0)), c(rng.random_range(0.0..3.0), rng.random_range(-4.0..4.0))];
        for seq in [vec![1], vec![2], vec![3]] {
            let a = transfer_eval(&desc, &seq, &s[..1]).unwrap();
            let b = transfer_eval(&norm, &seq, &s[..1]).unwrap();
            assert!(rel_c(&a, &b) < 1e-12);
        }
        for seq in [vec![1, 2], vec![3, 1]] {
            let a = transfer_eval(&desc, &seq, &s).unwrap();
            let b = transfer_eval(&norm, &seq, &s).unwrap();
            assert!(rel_c(&a, &b) < 1e-12);
        }
    }
}

#[test]
fn singular_descriptor_is_rejected() {
    let mut m = three_mode_example();
    m.modes[1].e = Some(dmatrix![1.0, 0.0, 0.0; 0.0, 1.0, 0.0; 0.0, 0.0, 0.0]);
    assert!(matches!(normalize_descriptor(&m), Err(Error::SingularDescriptor { mode: 2, .. })));
    assert!(validate_model(&m).violations.iter().any(|v| matches!(v, Violation::SingularDescriptor { .. })));
}

#[test]
fn sign_flips_keep_level_two_transfer_functions() {
    let m = three_mode_example();
    let flips: Vec<DMatrix<f64>> = [[1.0, -1.0, 1.0], [-1.0, -1.0, 1.0], [1.0, 1.0, -1.0]]
        .iter()
        .map(|d| DMatrix::from_diagonal(&DVector::from_row_slice(d)))
        .collect();
    let eq = apply_equivalence(&m, &EquivalenceTransform::similarity(flips).unwrap()).unwrap();
    let s = [c(0.3, 1.0), c(1.2, -0.5)];
    for seq in [[1, 2], [2, 3], [3, 1], [2, 1]] {
        let a = transfer_eval(&m, &seq, &s).unwrap();
        let b = transfer_eval(&eq, &seq, &s).unwrap();
        assert!(rel_c(&a, &b) < 1e-14);
    }
}

#[test]
fn validation_lists_every_problem() {
    let m = LssModel::new(vec![
        ModeSystem::new(dmatrix![-1.0, 0.0; 0.0, -1.0], dmatrix![1.0; 1.0], dmatrix![1.0, 1.0]),
        ModeSystem::new(dmatrix![-1.0], dmatrix![1.0, 2.0], dmatrix![1.0]),
    ])
    .with_coupling(1, 2, dmatrix![1.0, 1.0, 1.0])
    .with_coupling(3, 1, dmatrix![1.0]);
    let v = validate_model(&m).violations;
    assert!(v.iter().any(|x| matches!(x, Violation::InputCount { .. })));
    assert!(v.iter().any(|x| matches!(x, Violation::CouplingShape { from: 1, to: 2, .. })));
    assert!(v.iter().any(|x| matches!(x, Violation::CouplingOutOfRange { .. })));
    assert!(v.iter().any(|x| matches!(x, Violation::MissingCoupling { .. })));
    assert!(m.checked().is_err());
}

#[test]
fn switching_signal_bookkeeping() {
    let s = SwitchingSignal::new(vec![(1, 0.5), (2, 1.5), (1, 0.25)]).unwrap();
    assert_eq!(s.switch_times(), vec![0.5, 2.0, 2.25]);
    assert_eq!(s.horizon(), 2.25);
    assert_eq!(s.min_dwell(), 0.5);
    assert!(s.respects_dwell(0.5) && !s.respects_dwell(0.6));
    assert!(SwitchingSignal::new(vec![(1, 0.5), (1, 0.5)]).is_err());
    assert!(SwitchingSignal::new(vec![(1, -0.5)]).is_err());
    let r = SwitchingSignal::random_dwell(3, 0.2, 0.6, 5.0, 9).unwrap();
    assert!((r.horizon() - 5.0).abs() < 1e-12);
    assert!(r.respects_dwell(0.2));
    assert_eq!(r, SwitchingSignal::random_dwell(3, 0.2, 0.6, 5.0, 9).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernels_are_invariant_under_equivalence(seed in 0u64..10_000, general in any::<bool>()) {
        let m = random_stable_model(&RandomModelSpec { modes: 3, max_dim: 4, ..Default::default() }, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let left: Vec<_> = m.modes.iter().map(|ms| random_invertible(&mut rng, ms.n(), 30.0)).collect();
        let t = if general {
            let right = m.modes.iter().map(|ms| random_invertible(&mut rng, ms.n(), 30.0)).collect();
            EquivalenceTransform::new(left, right).unwrap()
        } else {
            EquivalenceTransform::similarity(left).unwrap()
        };
        let eq = normalize_descriptor(&apply_equivalence(&m, &t).unwrap()).unwrap();
        for seq in [vec![1], vec![2, 3], vec![3, 1, 2]] {
            let times: Vec<f64> = seq.iter().map(|_| rng.random_range(0.0..2.0)).collect();
            let a = kernel_eval(&m, &seq, &times).unwrap();
            let b = kernel_eval(&eq, &seq, &times).unwrap();
            prop_assert!((&a - &b).norm() <= 1e-10 * a.norm().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn free_response_transforms_with_the_state(seed in 0u64..10_000) {
        let m = random_stable_model(&RandomModelSpec { modes: 2, max_dim: 4, ..Default::default() }, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<_> = m.modes.iter().map(|ms| random_invertible(&mut rng, ms.n(), 10.0)).collect();
        let eq = apply_equivalence(&m, &EquivalenceTransform::similarity(s.clone()).unwrap()).unwrap();
        let x0 = DVector::from_fn(m.mode(1).n(), |_, _| rng.random_range(-1.0..1.0));
        let a = initial_kernel_eval(&m, &[1, 2], &[0.4, 0.7], &x0).unwrap();
        let b = initial_kernel_eval(&eq, &[1, 2], &[0.4, 0.7], &(&s[0] * &x0)).unwrap();
        prop_assert!((&a - &b).norm() <= 1e-10 * a.norm().max(1e-3));
    }

    #[test]
    fn normalization_is_idempotent_and_valid(seed in 0u64..10_000) {
        let m = random_stable_model(&RandomModelSpec { modes: 3, ..Default::default() }, seed);
        let d = with_descriptors(&m, seed);
        prop_assert!(validate_model(&d).is_valid());
        let n1 = normalize_descriptor(&d).unwrap();
        let n2 = normalize_descriptor(&n1).unwrap();
        prop_assert_eq!(&n1, &n2);
        prop_assert!(validate_model(&n1).is_valid());
        prop_assert!(n1.is_normalized());
    }
}
