mod common;

use nalgebra::{dmatrix, DMatrix};
use proptest::prelude::*;

use switched_bt::examples::three_mode_example;
use switched_bt::gramians::{
    assemble_block_form, coupled_residuals, gramian_by_quadrature, level_k_gramians, solve_coupled, CoupledOptions,
};
use switched_bt::linalg::{asymmetry, min_max_sym_eig, spectral_abscissa};
use switched_bt::random::{random_stable_model, RandomModelSpec};
use switched_bt::{Execution, GramianKind, LssModel, ModeSystem};

use common::{kronecker_coupled, kronecker_generalized, rel};

const KINDS: [GramianKind; 2] = [GramianKind::Reach, GramianKind::Obs];

fn mixed_dims() -> LssModel {
    LssModel::new(vec![
        ModeSystem::new(dmatrix![-1.0, 0.5; 0.0, -2.0], dmatrix![1.0; 1.0], dmatrix![1.0, 0.0]),
        ModeSystem::new(dmatrix![-3.0], dmatrix![0.5], dmatrix![2.0]),
    ])
    .with_coupling(1, 2, dmatrix![0.3, -0.2])
    .with_coupling(2, 1, dmatrix![0.1; 0.4])
}

#[test]
fn bundled_example_matches_dense_oracle() {
    let m = three_mode_example();
    for kind in KINDS {
        let sol = solve_coupled(&m, kind, &CoupledOptions::default()).unwrap();
        assert!(sol.diagnostics.converged);
        for (x, o) in sol.matrices.iter().zip(kronecker_coupled(&m, kind)) {
            assert!(rel(x, &o) < 1e-9, "{kind}: {}", rel(x, &o));
        }
    }
}

#[test]
fn mixed_dimensions_match_dense_oracle() {
    let m = mixed_dims();
    for kind in KINDS {
        let sol = solve_coupled(&m, kind, &CoupledOptions::default()).unwrap();
        for (x, o) in sol.matrices.iter().zip(kronecker_coupled(&m, kind)) {
            assert!(rel(x, &o) < 1e-10);
        }
    }
}

#[test]
fn block_form_solution_is_block_diagonal() {
    let m = three_mode_example();
    let bf = assemble_block_form(&m).unwrap();
    let opts = CoupledOptions::default();
    let p = solve_coupled(&m, GramianKind::Reach, &opts).unwrap().matrices;
    let q = solve_coupled(&m, GramianKind::Obs, &opts).unwrap().matrices;

    let full_p = kronecker_generalized(&bf.a, &bf.k, &(&bf.b * bf.b.transpose()));
    let kt: Vec<DMatrix<f64>> = bf.k.iter().map(|k| k.transpose()).collect();
    let full_q = kronecker_generalized(&bf.a.transpose(), &kt, &(bf.c.transpose() * &bf.c));

    assert!(rel(&full_p, &bf.block_diagonal(&p)) < 1e-9);
    assert!(rel(&full_q, &bf.block_diagonal(&q)) < 1e-9);
    for qi in 1..=3 {
        assert!(rel(&bf.diagonal_block(&full_p, qi), &p[qi - 1]) < 1e-9);
    }
}

#[test]
fn levels_match_quadrature_up_to_three() {
    let m = three_mode_example();
    let abscissa = m.modes.iter().map(|ms| spectral_abscissa(&ms.a)).fold(f64::NEG_INFINITY, f64::max);
    let t_max = (1e-10f64).ln() / (2.0 * abscissa);
    let steps = (t_max / 1e-3) as usize;
    for kind in KINDS {
        for k in 1..=3 {
            let rec = level_k_gramians(&m, k, kind).unwrap();
            for q in 1..=3 {
                let quad = gramian_by_quadrature(&m, q, k, kind, t_max, steps).unwrap();
                assert!(rel(&quad, &rec[q - 1]) < 1e-4, "{kind} k={k} q={q}: {}", rel(&quad, &rec[q - 1]));
            }
        }
    }
}

#[test]
fn first_level_is_the_plain_lyapunov_solution() {
    let m = three_mode_example();
    let p1 = level_k_gramians(&m, 1, GramianKind::Reach).unwrap();
    for (ms, p) in m.modes.iter().zip(&p1) {
        let oracle = kronecker_generalized(&ms.a, &[], &(&ms.b * ms.b.transpose()));
        assert!(rel(p, &oracle) < 1e-12);
    }
}

#[test]
fn level_sum_reaches_the_coupled_solution() {
    let m = three_mode_example();
    let sol = solve_coupled(&m, GramianKind::Obs, &CoupledOptions::default()).unwrap();
    let mut sum: Vec<DMatrix<f64>> = m.modes.iter().map(|ms| DMatrix::zeros(ms.n(), ms.n())).collect();
    for k in 1..=sol.diagnostics.levels {
        for (s, l) in sum.iter_mut().zip(level_k_gramians(&m, k, GramianKind::Obs).unwrap()) {
            *s += l;
        }
    }
    for (s, x) in sum.iter().zip(&sol.matrices) {
        assert!(rel(s, x) < 1e-12);
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let m = random_stable_model(&RandomModelSpec { modes: 3, ..Default::default() }, 11);
    let seq = CoupledOptions { execution: Execution::Sequential, ..Default::default() };
    let par = CoupledOptions { execution: Execution::Parallel, ..Default::default() };
    for kind in KINDS {
        let a = solve_coupled(&m, kind, &seq).unwrap().matrices;
        let b = solve_coupled(&m, kind, &par).unwrap().matrices;
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupled_solutions_are_symmetric_psd_and_solve_the_equations(seed in 0u64..10_000, modes in 2usize..=3) {
        let m = random_stable_model(&RandomModelSpec { modes, ..Default::default() }, seed);
        for kind in KINDS {
            let sol = solve_coupled(&m, kind, &CoupledOptions::default()).unwrap();
            for x in &sol.matrices {
                prop_assert!(asymmetry(x) <= 1e-12);
                let (lo, hi) = min_max_sym_eig(x);
                prop_assert!(lo >= -1e-10 * hi.max(1.0));
            }
            let res = coupled_residuals(&m, kind, &sol.matrices).unwrap();
            prop_assert!(res.iter().all(|&r| r < 1e-10), "{res:?}");
        }
    }

    #[test]
    fn partial_sums_increase_in_loewner_order(seed in 0u64..10_000) {
        let m = random_stable_model(&RandomModelSpec { modes: 2, max_dim: 4, ..Default::default() }, seed);
        for kind in KINDS {
            for k in 1..=4 {
                for l in level_k_gramians(&m, k, kind).unwrap() {
                    let (lo, hi) = min_max_sym_eig(&l);
                    prop_assert!(lo >= -1e-11 * hi.abs() - 1e-300);
                }
            }
        }
    }

    #[test]
    fn scaling_inputs_scales_reach_quadratically(seed in 0u64..10_000, scale in 0.1f64..10.0) {
        let m = random_stable_model(&RandomModelSpec::default(), seed);
        let mut scaled = m.clone();
        for ms in &mut scaled.modes {
            ms.b *= scale;
        }
        let opts = CoupledOptions::default();
        let p = solve_coupled(&m, GramianKind::Reach, &opts).unwrap().matrices;
        let ps = solve_coupled(&scaled, GramianKind::Reach, &opts).unwrap().matrices;
        for (a, b) in p.iter().zip(&ps) {
            prop_assert!(rel(&(a * (scale * scale)), b) < 1e-9);
        }
    }
}
