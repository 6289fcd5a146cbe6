//! Bundled example models.

use nalgebra::{dmatrix, DMatrix};

use crate::model::{LssModel, ModeSystem};

/// Names accepted by [`by_name`].
pub const AVAILABLE: &[&str] = &["three-mode"];

pub fn by_name(name: &str) -> Option<LssModel> {
    match name {
        "three-mode" => Some(three_mode_example()),
        _ => None,
    }
}

/// Three-mode SISO benchmark with diagonal dynamics and dense couplings.
///
/// Couplings are scaled copies of two fixed matrices `M` and `N`:
/// `K12 = M/7`, `K23 = M/4`, `K31 = M/6`, `K21 = N/5`, `K32 = N/3`, `K13 = N/2`.
pub fn three_mode_example() -> LssModel {
    let diag = |v: [f64; 3]| DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&v));
    let col = |v: [f64; 3]| DMatrix::from_column_slice(3, 1, &v);
    let row = |v: [f64; 3]| DMatrix::from_row_slice(1, 3, &v);

    let m = dmatrix![1.0, -1.0, 0.0; 0.0, 2.0, -3.0; 1.0, 0.0, 0.5];
    let n = dmatrix![0.0, 2.0, -0.5; 1.0, 1.0, -1.0; 0.0, 0.0, -3.0];

    LssModel::new(vec![
        ModeSystem::new(diag([-1.0, -8.0, -5.0]), col([1.0, 2.0, -1.0]), row([-1.0, 1.0, 2.5])),
        ModeSystem::new(diag([-2.0, -9.0, -6.0]), col([1.0, -1.0, 1.5]), row([1.0, 2.0, -3.5])),
        ModeSystem::new(diag([-4.0, -3.0, -7.0]), col([-0.5, -2.0, 1.0]), row([-1.5, 1.0, -0.5])),
    ])
    .with_coupling(1, 2, &m / 7.0)
    .with_coupling(2, 3, &m / 4.0)
    .with_coupling(3, 1, &m / 6.0)
    .with_coupling(2, 1, &n / 5.0)
    .with_coupling(3, 2, &n / 3.0)
    .with_coupling(1, 3, &n / 2.0)
}
