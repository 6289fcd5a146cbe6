//! Seeded random models and transforms for testing and benchmarking.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::model::{LssModel, ModeSystem};

#[derive(Debug, Clone)]
pub struct RandomModelSpec {
    pub modes: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub inputs: usize,
    pub outputs: usize,
    /// Upper bound on the spectral norm of every coupling.
    pub coupling_norm: f64,
    /// Every mode's spectral abscissa is at most `-margin`.
    pub margin: f64,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        Self { modes: 2, min_dim: 1, max_dim: 5, inputs: 1, outputs: 1, coupling_norm: 0.3, margin: 0.5 }
    }
}

fn uniform(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Random stable matrix: a scaled random matrix shifted left until its
/// spectral abscissa sits in `[-margin - 1, -margin]`.
pub fn random_stable_matrix(rng: &mut impl Rng, n: usize, margin: f64) -> DMatrix<f64> {
    let r = uniform(rng, n, n) * 2.0;
    let shift = linalg::spectral_abscissa(&r) + margin + rng.random_range(0.0..1.0);
    r - DMatrix::identity(n, n) * shift
}

/// Random matrix with spectral norm drawn uniformly from `[norm/2, norm]`.
pub fn random_coupling(rng: &mut impl Rng, rows: usize, cols: usize, norm: f64) -> DMatrix<f64> {
    let k = uniform(rng, rows, cols);
    let s = linalg::spectral_norm(&k);
    if s == 0.0 || norm == 0.0 {
        return DMatrix::zeros(rows, cols);
    }
    k * (rng.random_range(0.5..=1.0) * norm / s)
}

pub fn random_model_with(rng: &mut impl Rng, spec: &RandomModelSpec) -> LssModel {
    let dims: Vec<usize> = (0..spec.modes).map(|_| rng.random_range(spec.min_dim..=spec.max_dim)).collect();
    let modes = dims
        .iter()
        .map(|&n| {
            ModeSystem::new(
                random_stable_matrix(rng, n, spec.margin),
                uniform(rng, n, spec.inputs),
                uniform(rng, spec.outputs, n),
            )
        })
        .collect();
    let mut model = LssModel::new(modes);
    for i in 1..=spec.modes {
        for j in 1..=spec.modes {
            if i != j {
                let k = random_coupling(rng, dims[j - 1], dims[i - 1], spec.coupling_norm);
                model.couplings.insert((i, j), k);
            }
        }
    }
    model
}

/// Reproducible random stable model.
pub fn random_stable_model(spec: &RandomModelSpec, seed: u64) -> LssModel {
    random_model_with(&mut ChaCha8Rng::seed_from_u64(seed), spec)
}

/// Random invertible matrix `U diag(s) V` with orthogonal `U, V` and
/// singular values in `[1/cond.sqrt(), cond.sqrt()]`.
pub fn random_invertible(rng: &mut impl Rng, n: usize, cond: f64) -> DMatrix<f64> {
    let u = uniform(rng, n, n).qr().q();
    let v = uniform(rng, n, n).qr().q();
    let half = cond.max(1.0).sqrt().ln();
    let s = DVector::from_fn(n, |_, _| rng.random_range(-half..=half).exp());
    u * DMatrix::from_diagonal(&s) * v
}

/// One random invertible matrix per mode.
pub fn random_similarity(model: &LssModel, seed: u64, cond: f64) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.modes.iter().map(|m| random_invertible(&mut rng, m.n(), cond)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_models_respect_spec() {
        let spec = RandomModelSpec { modes: 3, coupling_norm: 0.3, ..Default::default() };
        for seed in 0..20 {
            let m = random_stable_model(&spec, seed);
            assert!(crate::validate_model(&m).is_valid());
            for ms in &m.modes {
                assert!(linalg::spectral_abscissa(&ms.a) <= -0.5 + 1e-9);
            }
            for k in m.couplings.values() {
                assert!(linalg::spectral_norm(k) <= 0.3 + 1e-12);
            }
        }
        assert_eq!(random_stable_model(&spec, 3), random_stable_model(&spec, 3));
    }

    #[test]
    fn invertible_condition_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_invertible(&mut rng, 4, 100.0);
        assert!(linalg::rcond(&s) >= 1.0 / 100.0 - 1e-12);
    }
}
