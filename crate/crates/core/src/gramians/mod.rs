//! Switched-system Gramians.
//!
//! The reachability Gramians solve the coupled system
//! `A_i P_i + P_i A_iᵀ + Σ_{j≠i} K_{j,i} P_j K_{j,i}ᵀ + B_i B_iᵀ = 0`, and the
//! observability Gramians its dual
//! `A_iᵀ Q_i + Q_i A_i + Σ_{j≠i} K_{i,j}ᵀ Q_j K_{i,j} + C_iᵀ C_i = 0`.
//! Both are computed as the sum of level-k Gramians, each level costing one
//! standard Lyapunov solve per mode.

mod lyapunov;
mod quadrature;

use nalgebra::DMatrix;
use serde::Serialize;

pub use crate::error::GramianKind;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::LssModel;
use crate::par::{self, Execution};

pub use lyapunov::{lyapunov_relative_residual, solve_lyapunov, Lyapunov};
pub use quadrature::gramian_by_quadrature;

/// Stopping rule for the level series.
#[derive(Debug, Clone, Copy)]
pub struct CoupledOptions {
    /// Relative increment tolerance.
    pub tol: f64,
    /// Maximum number of levels summed.
    pub max_iter: usize,
    pub execution: Execution,
}

impl Default for CoupledOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub levels: usize,
    pub last_increment: f64,
    /// Per-mode relative residual of the coupled equation.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Per-mode Gramians of one kind.
#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub matrices: Vec<DMatrix<f64>>,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone)]
pub struct GramianSet {
    pub reach: Vec<DMatrix<f64>>,
    pub obs: Vec<DMatrix<f64>>,
    pub reach_diagnostics: SolveDiagnostics,
    pub obs_diagnostics: SolveDiagnostics,
}

impl GramianSet {
    /// Wrap externally supplied matrices (diagnostics left empty).
    pub fn from_matrices(reach: Vec<DMatrix<f64>>, obs: Vec<DMatrix<f64>>) -> Self {
        let diag = SolveDiagnostics { levels: 0, last_increment: 0.0, residuals: vec![], converged: true };
        Self { reach, obs, reach_diagnostics: diag.clone(), obs_diagnostics: diag }
    }

    pub fn get(&self, kind: GramianKind) -> &[DMatrix<f64>] {
        match kind {
            GramianKind::Reach => &self.reach,
            GramianKind::Obs => &self.obs,
        }
    }
}

/// Cached per-mode factorizations and forcing terms for one Gramian kind.
struct LevelOperator {
    kind: GramianKind,
    solvers: Vec<Lyapunov>,
    /// `table[from][to]`, 0-based.
    couplings: Vec<Vec<DMatrix<f64>>>,
    forcing: Vec<DMatrix<f64>>,
    a: Vec<DMatrix<f64>>,
}

impl LevelOperator {
    fn new(model: &LssModel, kind: GramianKind, exec: Execution) -> Result<Self> {
        model.require_normalized()?;
        let couplings = model.coupling_table()?;
        let solvers = par::try_map_range(exec, model.num_modes(), |q| {
            let ms = &model.modes[q];
            let a = match kind {
                GramianKind::Reach => ms.a.clone(),
                GramianKind::Obs => ms.a.transpose(),
            };
            Lyapunov::new(&a).map_err(|e| match e {
                Error::Unstable { abscissa, .. } => Error::Unstable { mode: q + 1, abscissa },
                other => other,
            })
        })?;
        let forcing = model
            .modes
            .iter()
            .map(|ms| match kind {
                GramianKind::Reach => &ms.b * ms.b.transpose(),
                GramianKind::Obs => ms.c.transpose() * &ms.c,
            })
            .collect();
        let a = model
            .modes
            .iter()
            .map(|ms| match kind {
                GramianKind::Reach => ms.a.clone(),
                GramianKind::Obs => ms.a.transpose(),
            })
            .collect();
        Ok(Self { kind, solvers, couplings, forcing, a })
    }

    fn d(&self) -> usize {
        self.solvers.len()
    }

    /// `Σ_{j≠q} K_{j,q} X_j K_{j,q}ᵀ` (reach) or `Σ_{j≠q} K_{q,j}ᵀ X_j K_{q,j}` (obs).
    fn coupling_term(&self, q: usize, x: &[DMatrix<f64>]) -> DMatrix<f64> {
        let n = self.solvers[q].dim();
        let mut acc = DMatrix::zeros(n, n);
        for (j, xj) in x.iter().enumerate() {
            if j == q {
                continue;
            }
            match self.kind {
                GramianKind::Reach => {
                    let k = &self.couplings[j][q];
                    acc += k * xj * k.transpose();
                }
                GramianKind::Obs => {
                    let k = &self.couplings[q][j];
                    acc += k.transpose() * xj * k;
                }
            }
        }
        linalg::symmetrize(&acc)
    }

    fn first(&self, exec: Execution) -> Result<Vec<DMatrix<f64>>> {
        par::try_map_range(exec, self.d(), |q| self.solvers[q].solve(&self.forcing[q]))
    }

    fn next(&self, prev: &[DMatrix<f64>], exec: Execution) -> Result<Vec<DMatrix<f64>>> {
        par::try_map_range(exec, self.d(), |q| {
            self.solvers[q].solve(&self.coupling_term(q, prev))
        })
    }

    /// Relative residual of the coupled equation per mode, normalized by
    /// `max(1, ‖forcing‖_F)`.
    fn residuals(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        (0..self.d())
            .map(|q| {
                let ax = &self.a[q] * &x[q];
                let r = &ax + ax.transpose() + self.coupling_term(q, x) + &self.forcing[q];
                r.norm() / self.forcing[q].norm().max(1.0)
            })
            .collect()
    }
}

fn total_norm(x: &[DMatrix<f64>]) -> f64 {
    x.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

/// Level-`k` Gramians `P^{(k)}` (or `Q^{(k)}`) for every mode. Level 1 is
/// the standard per-mode Gramian.
pub fn level_k_gramians(model: &LssModel, k: usize, kind: GramianKind) -> Result<Vec<DMatrix<f64>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("level k must be at least 1".into()));
    }
    let exec = Execution::default();
    let op = LevelOperator::new(model, kind, exec)?;
    let mut level = op.first(exec)?;
    for _ in 1..k {
        level = op.next(&level, exec)?;
    }
    Ok(level)
}

/// Sum of the level series until `‖increment‖_F < tol·max(1, ‖sum‖_F)` and
/// every coupled-equation residual is below `tol`.
pub fn solve_coupled(model: &LssModel, kind: GramianKind, opts: &CoupledOptions) -> Result<CoupledSolution> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidArgument("tol must be positive and max_iter nonzero".into()));
    }
    let exec = opts.execution;
    let op = LevelOperator::new(model, kind, exec)?;
    let mut level = op.first(exec)?;
    let mut sum = level.clone();
    let mut levels = 1;
    let mut last_increment = total_norm(&level);
    loop {
        if last_increment < opts.tol * total_norm(&sum).max(1.0) {
            let residuals = op.residuals(&sum);
            if residuals.iter().all(|&r| r < opts.tol) {
                return Ok(CoupledSolution {
                    matrices: sum,
                    diagnostics: SolveDiagnostics { levels, last_increment, residuals, converged: true },
                });
            }
        }
        if levels >= opts.max_iter || !last_increment.is_finite() {
            return Err(Error::NotConverged {
                kind,
                levels,
                last_increment,
                report: Box::new(check_existence(model)),
            });
        }
        level = op.next(&level, exec)?;
        for (s, l) in sum.iter_mut().zip(&level) {
            *s += l;
        }
        levels += 1;
        last_increment = total_norm(&level);
    }
}

/// Both Gramian families with the same options.
pub fn compute_gramians(model: &LssModel, opts: &CoupledOptions) -> Result<GramianSet> {
    let reach = solve_coupled(model, GramianKind::Reach, opts)?;
    let obs = solve_coupled(model, GramianKind::Obs, opts)?;
    Ok(GramianSet {
        reach: reach.matrices,
        obs: obs.matrices,
        reach_diagnostics: reach.diagnostics,
        obs_diagnostics: obs.diagnostics,
    })
}

/// Per-mode relative residual of the coupled equation for given matrices.
pub fn coupled_residuals(model: &LssModel, kind: GramianKind, x: &[DMatrix<f64>]) -> Result<Vec<f64>> {
    let op = LevelOperator::new(model, kind, Execution::Sequential)?;
    if x.len() != op.d() {
        return Err(Error::DimensionMismatch(format!("{} matrices for {} modes", x.len(), op.d())));
    }
    Ok(op.residuals(x))
}

/// Block-diagonal embedding of the coupled equations.
///
/// With `P_D = blockdiag(P_q)`, the single equation
/// `A_D P_D + P_D A_Dᵀ + Σ_k K_k P_D K_kᵀ + B_D B_Dᵀ = 0` holds, and dually
/// `A_Dᵀ Q_D + Q_D A_D + Σ_k K_kᵀ Q_D K_k + C_Dᵀ C_D = 0`.
#[derive(Debug, Clone)]
pub struct BlockForm {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// `D − 1` block-permuted coupling matrices. `k[s]` has block `K_{c,i}`
    /// at block row `i`, block column `c = ((i − 1 + s + 1) mod D) + 1`.
    pub k: Vec<DMatrix<f64>>,
    /// Row/column offset of each mode's block.
    pub offsets: Vec<usize>,
}

impl BlockForm {
    /// Extract diagonal block `q` (1-based) of a block matrix.
    pub fn diagonal_block(&self, x: &DMatrix<f64>, q: usize) -> DMatrix<f64> {
        let s = self.offsets[q - 1];
        let n = self.offsets[q] - s;
        x.view((s, s), (n, n)).clone_owned()
    }

    pub fn block_diagonal(&self, blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
        let n = *self.offsets.last().unwrap();
        let mut out = DMatrix::zeros(n, n);
        for (q, b) in blocks.iter().enumerate() {
            let s = self.offsets[q];
            out.view_mut((s, s), b.shape()).copy_from(b);
        }
        out
    }
}

pub fn assemble_block_form(model: &LssModel) -> Result<BlockForm> {
    model.require_normalized()?;
    let d = model.num_modes();
    let (m, p) = (model.inputs(), model.outputs());
    let mut offsets = vec![0];
    for ms in &model.modes {
        offsets.push(offsets.last().unwrap() + ms.n());
    }
    let n = offsets[d];
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, d * m);
    let mut c = DMatrix::zeros(d * p, n);
    for (q, ms) in model.modes.iter().enumerate() {
        let s = offsets[q];
        a.view_mut((s, s), (ms.n(), ms.n())).copy_from(&ms.a);
        b.view_mut((s, q * m), (ms.n(), m)).copy_from(&ms.b);
        c.view_mut((q * p, s), (p, ms.n())).copy_from(&ms.c);
    }
    let table = model.coupling_table()?;
    let k = (1..d)
        .map(|shift| {
            let mut kk = DMatrix::zeros(n, n);
            for i in 0..d {
                let col = (i + shift) % d;
                let blk = &table[col][i];
                kk.view_mut((offsets[i], offsets[col]), blk.shape()).copy_from(blk);
            }
            kk
        })
        .collect();
    Ok(BlockForm { a, b, c, k, offsets })
}

/// Heuristic existence verdict for the coupled Gramians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub spectral_abscissa: Vec<f64>,
    /// Largest spectral norm over stored or implied couplings.
    pub coupling_norm_max: f64,
    /// Frobenius norms of the first few level increments.
    pub reach_increments: Vec<f64>,
    pub obs_increments: Vec<f64>,
    /// Largest ratio between consecutive increments.
    pub contraction_estimate: Option<f64>,
    pub passed: bool,
}

/// Number of series levels inspected by [`check_existence`].
pub const EXISTENCE_TRIAL_LEVELS: usize = 5;

/// Passes iff every mode is stable and the level increments of both
/// families shrink geometrically over the trial levels.
pub fn check_existence(model: &LssModel) -> ExistenceReport {
    let spectral_abscissa: Vec<f64> = model.modes.iter().map(|m| linalg::spectral_abscissa(&m.a)).collect();
    let coupling_norm_max = model
        .coupling_table()
        .map(|t| {
            let mut mx: f64 = 0.0;
            for (i, row) in t.iter().enumerate() {
                for (j, k) in row.iter().enumerate() {
                    if i != j {
                        mx = mx.max(linalg::spectral_norm(k));
                    }
                }
            }
            mx
        })
        .unwrap_or(f64::INFINITY);
    let mut report = ExistenceReport {
        spectral_abscissa,
        coupling_norm_max,
        reach_increments: vec![],
        obs_increments: vec![],
        contraction_estimate: None,
        passed: false,
    };
    let stable = report.spectral_abscissa.iter().all(|&a| a < 0.0);
    if !stable || !model.is_normalized() {
        return report;
    }
    let exec = Execution::Sequential;
    let trial = |kind| -> Option<Vec<f64>> {
        let op = LevelOperator::new(model, kind, exec).ok()?;
        let mut level = op.first(exec).ok()?;
        let mut norms = vec![total_norm(&level)];
        for _ in 1..EXISTENCE_TRIAL_LEVELS {
            level = op.next(&level, exec).ok()?;
            norms.push(total_norm(&level));
        }
        Some(norms)
    };
    let (Some(r), Some(o)) = (trial(GramianKind::Reach), trial(GramianKind::Obs)) else {
        return report;
    };
    let mut worst: f64 = 0.0;
    let mut decreasing = true;
    for norms in [&r, &o] {
        for w in norms.windows(2) {
            if w[0] == 0.0 {
                if w[1] != 0.0 {
                    decreasing = false;
                }
                continue;
            }
            let ratio = w[1] / w[0];
            worst = worst.max(ratio);
            if !(ratio < 1.0) {
                decreasing = false;
            }
        }
    }
    report.reach_increments = r;
    report.obs_increments = o;
    report.contraction_estimate = Some(worst);
    report.passed = decreasing;
    report
}
