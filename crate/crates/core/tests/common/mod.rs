//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use switched_bt::{GramianKind, LssModel};

/// Dense solve of the coupled equations as one `Σ n_q²` linear system.
///
/// Unknowns are the stacked column-major `vec(X_q)`. Block row `q` reads
/// `(I ⊗ A_q + A_q ⊗ I) vec X_q + Σ_{j≠q} (K ⊗ K) vec X_j = −vec W_q`, with
/// `K = K_{j,q}` for reach and `K = K_{q,j}ᵀ` (and `A_qᵀ`) for obs.
pub fn kronecker_coupled(model: &LssModel, kind: GramianKind) -> Vec<DMatrix<f64>> {
    let dims = model.state_dims();
    let mut off = vec![0];
    for n in &dims {
        off.push(off.last().unwrap() + n * n);
    }
    let total = *off.last().unwrap();
    let mut op = DMatrix::<f64>::zeros(total, total);
    let mut rhs = DVector::<f64>::zeros(total);
    for (q, ms) in model.modes.iter().enumerate() {
        let n = dims[q];
        let a = match kind {
            GramianKind::Reach => ms.a.clone(),
            GramianKind::Obs => ms.a.transpose(),
        };
        let w = match kind {
            GramianKind::Reach => &ms.b * ms.b.transpose(),
            GramianKind::Obs => ms.c.transpose() * &ms.c,
        };
        let eye = DMatrix::<f64>::identity(n, n);
        let diag = eye.kronecker(&a) + a.kronecker(&eye);
        op.view_mut((off[q], off[q]), (n * n, n * n)).copy_from(&diag);
        for (i, v) in w.iter().enumerate() {
            rhs[off[q] + i] = -v;
        }
        for j in 0..dims.len() {
            if j == q {
                continue;
            }
            let k = match kind {
                GramianKind::Reach => model.coupling(j + 1, q + 1).unwrap().into_owned(),
                GramianKind::Obs => model.coupling(q + 1, j + 1).unwrap().transpose(),
            };
            let blk = k.kronecker(&k);
            op.view_mut((off[q], off[j]), blk.shape()).copy_from(&blk);
        }
    }
    let sol = op.lu().solve(&rhs).expect("coupled oracle system singular");
    (0..dims.len())
        .map(|q| DMatrix::from_column_slice(dims[q], dims[q], &sol.as_slice()[off[q]..off[q + 1]]))
        .collect()
}

/// Dense solve of `A X + X Aᵀ + Σ_k K_k X K_kᵀ + W = 0` over all of `X`.
pub fn kronecker_generalized(a: &DMatrix<f64>, ks: &[DMatrix<f64>], w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut op = eye.kronecker(a) + a.kronecker(&eye);
    for k in ks {
        op += k.kronecker(k);
    }
    let rhs = -DVector::from_column_slice(w.as_slice());
    let x = op.lu().solve(&rhs).expect("singular generalized Lyapunov operator");
    DMatrix::from_column_slice(n, n, x.as_slice())
}

pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    switched_bt::linalg::rel_frobenius(a, b)
}

pub fn rel_c(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> f64 {
    let d: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Largest entrywise deviation between `got` and `expected` after flipping
/// the sign of `got`'s rows by `row_signs` and columns by `col_signs`.
pub fn max_dev_signed(got: &DMatrix<f64>, expected: &DMatrix<f64>, row_signs: &[f64], col_signs: &[f64]) -> f64 {
    assert_eq!(got.shape(), expected.shape());
    let mut worst: f64 = 0.0;
    for r in 0..got.nrows() {
        for c in 0..got.ncols() {
            worst = worst.max((row_signs[r] * col_signs[c] * got[(r, c)] - expected[(r, c)]).abs());
        }
    }
    worst
}

/// All ±1 sign vectors of length `n`.
pub fn sign_patterns(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

pub fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}
