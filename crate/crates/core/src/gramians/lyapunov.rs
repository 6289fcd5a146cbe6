//! Dense Lyapunov solver `A X + X Aᵀ + W = 0` (Bartels–Stewart).
//!
//! `A` is reduced once to real Schur form `A = U T Uᵀ`; each right-hand side
//! then costs a quasi-triangular back-substitution plus one step of iterative
//! refinement. The factorization is reusable across right-hand sides, which
//! is what the coupled series needs.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;

const SCHUR_MAX_ITER: usize = 100_000;

/// Precomputed real Schur factorization of a stable matrix.
#[derive(Debug, Clone)]
pub struct Lyapunov {
    u: DMatrix<f64>,
    t: DMatrix<f64>,
    a: DMatrix<f64>,
    /// `(start, size)` of each diagonal block, size 1 or 2.
    blocks: Vec<(usize, usize)>,
}

fn block_eigs_max_re(t: &DMatrix<f64>, s: usize, k: usize) -> f64 {
    if k == 1 {
        return t[(s, s)];
    }
    let (a, b, c, d) = (t[(s, s)], t[(s, s + 1)], t[(s + 1, s)], t[(s + 1, s + 1)]);
    let half_tr = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        half_tr + disc.sqrt()
    } else {
        half_tr
    }
}

impl Lyapunov {
    /// Factor `a`. Fails with [`Error::Unstable`] (mode 0 = standalone
    /// matrix) when `a` has an eigenvalue with non-negative real part.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("A is {:?}", a.shape())));
        }
        let n = a.nrows();
        if n == 0 {
            return Ok(Self { u: a.clone(), t: a.clone(), a: a.clone(), blocks: vec![] });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown("A has non-finite entries".into()));
        }
        let (u, t) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)
            .ok_or_else(|| Error::NumericalBreakdown("Schur iteration did not converge".into()))?
            .unpack();
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && t[(i + 1, i)] != 0.0 {
                if i + 2 < n && t[(i + 2, i + 1)] != 0.0 {
                    return Err(Error::NumericalBreakdown(
                        "Schur factor is not quasi-triangular".into(),
                    ));
                }
                blocks.push((i, 2));
                i += 2;
            } else {
                blocks.push((i, 1));
                i += 1;
            }
        }
        let abscissa = blocks
            .iter()
            .map(|&(s, k)| block_eigs_max_re(&t, s, k))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(abscissa < 0.0) {
            return Err(Error::Unstable { mode: 0, abscissa });
        }
        Ok(Self { u, t, a: a.clone(), blocks })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Solve `T Y + Y Tᵀ = F` on the quasi-triangular factor.
    fn solve_triangular(&self, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let t = &self.t;
        let mut y = DMatrix::<f64>::zeros(n, n);
        for &(si, pi) in self.blocks.iter().rev() {
            for &(sj, qj) in self.blocks.iter().rev() {
                let mut rhs = f.view((si, sj), (pi, qj)).clone_owned();
                let tail_i = si + pi;
                if tail_i < n {
                    rhs -= t.view((si, tail_i), (pi, n - tail_i)) * y.view((tail_i, sj), (n - tail_i, qj));
                }
                let tail_j = sj + qj;
                if tail_j < n {
                    rhs -= y.view((si, tail_j), (pi, n - tail_j))
                        * t.view((sj, tail_j), (qj, n - tail_j)).transpose();
                }
                let tii = t.view((si, si), (pi, pi)).clone_owned();
                let tjj = t.view((sj, sj), (qj, qj)).clone_owned();
                let blk = small_sylvester(&tii, &tjj, &rhs)?;
                y.view_mut((si, sj), (pi, qj)).copy_from(&blk);
            }
        }
        Ok(y)
    }

    fn solve_once(&self, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let f = -(self.u.transpose() * w * &self.u);
        let y = self.solve_triangular(&f)?;
        Ok(&self.u * y * self.u.transpose())
    }

    /// Residual `A X + X Aᵀ + W`.
    pub fn residual(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        let ax = &self.a * x;
        &ax + ax.transpose() + w
    }

    /// Solve `A X + X Aᵀ + W = 0` for symmetric `W`. The result is exactly
    /// symmetric.
    pub fn solve(&self, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if w.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "W is {:?}, A is {n}x{n}",
                w.shape()
            )));
        }
        if n == 0 {
            return Ok(w.clone());
        }
        let w = symmetrize(w);
        let mut x = symmetrize(&self.solve_once(&w)?);
        let r = self.residual(&x, &w);
        if r.norm() > 0.0 {
            x += symmetrize(&self.solve_once(&r)?);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown("non-finite Lyapunov solution".into()));
        }
        Ok(x)
    }
}

/// Solve `P Y + Y Qᵀ = R` for blocks of size at most 2 via the Kronecker form
/// `(I ⊗ P + Q ⊗ I) vec(Y) = vec(R)`.
fn small_sylvester(p: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, k) = (p.nrows(), q.nrows());
    if m == 1 && k == 1 {
        let den = p[(0, 0)] + q[(0, 0)];
        if den == 0.0 {
            return Err(Error::NumericalBreakdown("singular Sylvester block".into()));
        }
        return Ok(DMatrix::from_element(1, 1, r[(0, 0)] / den));
    }
    let op = DMatrix::<f64>::identity(k, k).kronecker(p) + q.kronecker(&DMatrix::<f64>::identity(m, m));
    let rhs = nalgebra::DVector::from_column_slice(r.as_slice());
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalBreakdown("singular Sylvester block".into()))?;
    Ok(DMatrix::from_column_slice(m, k, sol.as_slice()))
}

/// One-shot convenience wrapper around [`Lyapunov`].
pub fn solve_lyapunov(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Lyapunov::new(a)?.solve(w)
}

/// Relative residual `‖A X + X Aᵀ + W‖_F / max(1, ‖W‖_F)`.
pub fn lyapunov_relative_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    let ax = a * x;
    (&ax + ax.transpose() + w).norm() / w.norm().max(1.0)
}

#[cfg(test)]
fn kronecker_lyapunov(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let i = DMatrix::<f64>::identity(n, n);
    let op = crate::linalg::kron(&i, a) + crate::linalg::kron(a, &i);
    let rhs = -nalgebra::DVector::from_column_slice(w.as_slice());
    let x = op.lu().solve(&rhs)?;
    Some(DMatrix::from_column_slice(n, n, x.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn scalar() {
        let x = solve_lyapunov(&dmatrix![-0.5], &dmatrix![1.0]).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_forcing() {
        let x = solve_lyapunov(&(-DMatrix::identity(2, 2)), &DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(x, DMatrix::zeros(2, 2));
    }

    #[test]
    fn triangular_against_kronecker() {
        let a = dmatrix![-1.0, 1.0; 0.0, -2.0];
        let b = dmatrix![1.0; 1.0];
        let w = &b * b.transpose();
        let x = solve_lyapunov(&a, &w).unwrap();
        let oracle = kronecker_lyapunov(&a, &w).unwrap();
        assert!(crate::linalg::rel_frobenius(&x, &oracle) < 1e-13);
        // closed form: X = [[11/12, 5/12], [5/12, 1/4]]
        assert!((x[(0, 0)] - 11.0 / 12.0).abs() < 1e-14);
        assert!((x[(1, 1)] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn complex_pair_blocks() {
        let a = dmatrix![
            -0.3, 4.0, 0.2, 0.0;
            -4.0, -0.3, 1.0, 0.5;
            0.0, 0.0, -1.0, 2.0;
            0.0, 0.0, -3.0, -1.0
        ];
        let w = dmatrix![
            2.0, 0.1, 0.0, 0.3;
            0.1, 1.0, 0.2, 0.0;
            0.0, 0.2, 3.0, 0.4;
            0.3, 0.0, 0.4, 1.0
        ];
        let x = solve_lyapunov(&a, &w).unwrap();
        assert!(lyapunov_relative_residual(&a, &x, &w) < 1e-13);
        assert!(crate::linalg::rel_frobenius(&x, &kronecker_lyapunov(&a, &w).unwrap()) < 1e-12);
        assert_eq!(x, x.transpose());
    }

    #[test]
    fn unstable_rejected() {
        assert!(matches!(
            Lyapunov::new(&dmatrix![1.0, 0.0; 0.0, -1.0]),
            Err(Error::Unstable { .. })
        ));
        assert!(Lyapunov::new(&dmatrix![0.0, 1.0; -1.0, 0.0]).is_err());
    }
}
