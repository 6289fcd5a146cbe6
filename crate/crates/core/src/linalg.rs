//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Relative tolerance below which a Gramian eigenvalue is treated as roundoff.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// `‖a − b‖_F / max(‖b‖_F, tiny)`.
pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let d = (a - b).norm();
    let s = b.norm();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest real part over the eigenvalues of `a`. Returns +inf if the
/// eigenvalue iteration fails to converge.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return f64::NEG_INFINITY;
    }
    match Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
        Some(s) => s
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max),
        None => f64::INFINITY,
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Reciprocal 2-norm condition number `σ_min / σ_max` (0 for singular input).
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in decreasing order.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = symmetrize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_max_sym_eig(m: &DMatrix<f64>) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let ev = symmetrize(m).symmetric_eigenvalues();
    (ev.min(), ev.max())
}

/// Project a nearly-PSD symmetric matrix onto the PSD cone.
///
/// Eigenvalues in `[-tol·λ_max, 0)` are clamped to zero; anything more
/// negative is reported as [`Error::Indefinite`].
pub fn psd_clamp(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = symmetrize(m);
    if s.is_empty() {
        return Ok(s);
    }
    let eig = s.clone().symmetric_eigen();
    let max = eig.eigenvalues.max().max(0.0);
    let min = eig.eigenvalues.min();
    if min >= 0.0 {
        return Ok(s);
    }
    if max == 0.0 || min < -PSD_CLAMP_TOL * max {
        return Err(Error::Indefinite { min_eig: min, max_eig: max });
    }
    let clamped = eig.eigenvalues.map(|v| v.max(0.0));
    let v = &eig.eigenvectors;
    Ok(symmetrize(&(v * DMatrix::from_diagonal(&clamped) * v.transpose())))
}

/// Eigenvalues of the symmetric-definite pencil `(a, b)`, i.e. of
/// `L⁻¹ a L⁻ᵀ` with `b = L Lᵀ`. Sorted ascending. `None` if `b` is not
/// positive definite.
pub fn gen_sym_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DVector<f64>> {
    let chol = symmetrize(b).cholesky()?;
    let l = chol.l();
    // X = L⁻¹ a L⁻ᵀ
    let y = l.solve_lower_triangular(&symmetrize(a))?;
    let x = l.solve_lower_triangular(&y.transpose())?;
    let mut vals: Vec<f64> = symmetrize(&x).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Some(DVector::from_vec(vals))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Largest absolute deviation from symmetry relative to `‖m‖_F`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let s = m.norm();
    let d = (m - m.transpose()).norm();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}
