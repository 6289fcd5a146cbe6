//! Mode-wise square-root balancing and truncation.
//!
//! For every mode, `P = U Uᵀ` and `Uᵀ Q U = V Λ² Vᵀ` give the balancing
//! transform `S = Λ^{1/2} Vᵀ U⁻¹`, under which both Gramians become `Λ`.
//! Columns of `V` are sign-normalized so that their largest-magnitude entry
//! is positive; balanced matrices are therefore unique up to that gauge
//! whenever the `σ` values are distinct.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, GramianKind, Result};
use crate::gramians::GramianSet;
use crate::linalg::{self, PSD_CLAMP_TOL};
use crate::model::{apply_equivalence, EquivalenceTransform, LssModel};
use crate::par::{self, Execution};

/// Square factor `U` with `U Uᵀ = P`.
///
/// Uses Cholesky on the clamped matrix and falls back to the symmetric
/// eigen square root when Cholesky breaks down (singular `P`).
pub fn square_factor(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch(format!("P is {:?}", p.shape())));
    }
    let pc = linalg::psd_clamp(p)?;
    if let Some(ch) = pc.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = pc.symmetric_eigen();
    let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&root) * v.transpose())
}

/// Flip each column so that its largest-magnitude entry is positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let (mut best, mut arg) = (0.0, 0);
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                arg = i;
            }
        }
        if col[arg] < 0.0 {
            col.neg_mut();
        }
    }
}

struct ModeBalance {
    s: DMatrix<f64>,
    s_inv: DMatrix<f64>,
    sigma: DVector<f64>,
}

fn balance_pair(p: &DMatrix<f64>, q: &DMatrix<f64>, mode: usize) -> Result<ModeBalance> {
    let u = square_factor(p)?;
    let u_inv = u
        .clone()
        .lu()
        .try_inverse()
        .filter(|_| linalg::rcond(&u) > PSD_CLAMP_TOL.sqrt() * 1e-2)
        .ok_or(Error::SingularGramian { mode, kind: GramianKind::Reach })?;
    let qc = linalg::psd_clamp(q)?;
    let (lam2, mut v) = linalg::sym_eigen_desc(&(u.transpose() * qc * &u));
    let top = lam2[0].max(0.0);
    if top == 0.0 || lam2.iter().any(|&l| l <= top * PSD_CLAMP_TOL) {
        return Err(Error::SingularGramian { mode, kind: GramianKind::Obs });
    }
    fix_signs(&mut v);
    let sigma = lam2.map(f64::sqrt);
    let sqrt_sigma = sigma.map(f64::sqrt);
    let s = DMatrix::from_diagonal(&sqrt_sigma) * v.transpose() * &u_inv;
    let s_inv = &u * &v * DMatrix::from_diagonal(&sqrt_sigma.map(|x| 1.0 / x));
    Ok(ModeBalance { s, s_inv, sigma })
}

/// A model in balanced coordinates together with the transforms producing it.
#[derive(Debug, Clone)]
pub struct BalancedRealization {
    pub model: LssModel,
    /// `S_q` per mode.
    pub transforms: Vec<DMatrix<f64>>,
    /// `S_q⁻¹` per mode.
    pub inverses: Vec<DMatrix<f64>>,
    /// Non-increasing diagonal of `Λ_q` per mode.
    pub sigma: Vec<DVector<f64>>,
}

fn assemble(model: &LssModel, parts: Vec<ModeBalance>) -> Result<BalancedRealization> {
    let transforms: Vec<_> = parts.iter().map(|p| p.s.clone()).collect();
    let inverses: Vec<_> = parts.iter().map(|p| p.s_inv.clone()).collect();
    let t = EquivalenceTransform::similarity_with_inverse(transforms.clone(), inverses.clone())?;
    Ok(BalancedRealization {
        model: apply_equivalence(model, &t)?,
        transforms,
        inverses,
        sigma: parts.into_iter().map(|p| p.sigma).collect(),
    })
}

fn check_gramian_shapes(model: &LssModel, g: &GramianSet) -> Result<()> {
    model.require_normalized()?;
    let d = model.num_modes();
    if g.reach.len() != d || g.obs.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} reach / {} obs Gramians for {d} modes",
            g.reach.len(),
            g.obs.len()
        )));
    }
    for (q, ms) in model.modes.iter().enumerate() {
        let n = ms.n();
        if g.reach[q].shape() != (n, n) || g.obs[q].shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("mode {}: Gramian shape", q + 1)));
        }
    }
    Ok(())
}

/// Per-mode balancing.
pub fn balance(model: &LssModel, gramians: &GramianSet) -> Result<BalancedRealization> {
    balance_with(model, gramians, Execution::default())
}

pub fn balance_with(model: &LssModel, gramians: &GramianSet, exec: Execution) -> Result<BalancedRealization> {
    check_gramian_shapes(model, gramians)?;
    let parts = par::try_map_range(exec, model.num_modes(), |q| {
        balance_pair(&gramians.reach[q], &gramians.obs[q], q + 1)
    })?;
    assemble(model, parts)
}

/// Average-Gramian baseline: one transform from balancing `mean(P_q)`
/// against `mean(Q_q)`, applied to every mode. Requires equal mode sizes.
pub fn balance_average(model: &LssModel, gramians: &GramianSet) -> Result<BalancedRealization> {
    check_gramian_shapes(model, gramians)?;
    let dims = model.state_dims();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::DimensionMismatch(format!(
            "average balancing needs equal mode dimensions, got {dims:?}"
        )));
    }
    let d = model.num_modes() as f64;
    let mean = |xs: &[DMatrix<f64>]| xs.iter().fold(DMatrix::zeros(dims[0], dims[0]), |a, x| a + x) / d;
    let one = balance_pair(&mean(&gramians.reach), &mean(&gramians.obs), 1)?;
    let parts = (0..model.num_modes())
        .map(|_| ModeBalance { s: one.s.clone(), s_inv: one.s_inv.clone(), sigma: one.sigma.clone() })
        .collect();
    assemble(model, parts)
}

/// Per-mode reduced orders `r_q`, `1 ≤ r_q ≤ n_q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionPlan {
    pub orders: Vec<usize>,
}

impl ReductionPlan {
    pub fn new(orders: Vec<usize>, dims: &[usize]) -> Result<Self> {
        if orders.len() != dims.len() {
            return Err(Error::InvalidOrder(format!(
                "{} orders for {} modes",
                orders.len(),
                dims.len()
            )));
        }
        for (q, (&r, &n)) in orders.iter().zip(dims).enumerate() {
            if r == 0 || r > n {
                return Err(Error::InvalidOrder(format!("mode {}: order {r} not in 1..={n}", q + 1)));
            }
        }
        Ok(Self { orders })
    }

    /// Keep every state, i.e. `r_q = n_q`.
    pub fn full(dims: &[usize]) -> Self {
        Self { orders: dims.to_vec() }
    }

    /// `r_q = #{i : σ_{q,i} ≥ threshold · σ_{q,1}}`.
    pub fn from_threshold(sigma: &[DVector<f64>], threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!("threshold {threshold} not in (0, 1]")));
        }
        let orders = sigma
            .iter()
            .map(|s| s.iter().filter(|&&x| x >= threshold * s[0]).count().max(1))
            .collect();
        Ok(Self { orders })
    }

    fn check(&self, dims: &[usize]) -> Result<()> {
        Self::new(self.orders.clone(), dims).map(|_| ())
    }
}

/// The guaranteed output-error bound `2β` and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBound {
    /// `2β`.
    pub bound: f64,
    pub beta: f64,
    /// `η_ℓ` for `ℓ = 1..=ξ`.
    pub eta: Vec<f64>,
    /// `ξ = max_q (n_q − r_q)`.
    pub xi: usize,
}

/// `β = Σ_{ℓ=1..ξ} η_ℓ` with `η_ℓ = max_{q : ℓ ≤ n_q − r_q} σ_{q, n_q−ℓ+1}`.
pub fn error_bound(sigma: &[DVector<f64>], plan: &ReductionPlan) -> Result<ErrorBound> {
    let dims: Vec<usize> = sigma.iter().map(|s| s.len()).collect();
    plan.check(&dims)?;
    let dropped: Vec<usize> = dims.iter().zip(&plan.orders).map(|(n, r)| n - r).collect();
    let xi = dropped.iter().copied().max().unwrap_or(0);
    let eta: Vec<f64> = (1..=xi)
        .map(|l| {
            sigma
                .iter()
                .zip(&dropped)
                .filter(|(_, &dr)| l <= dr)
                .map(|(s, _)| s[s.len() - l])
                .fold(0.0, f64::max)
        })
        .collect();
    let beta: f64 = eta.iter().sum();
    Ok(ErrorBound { bound: 2.0 * beta, beta, eta, xi })
}

/// Keep the leading `r_q` balanced states of each mode.
pub fn truncate(bal: &BalancedRealization, plan: &ReductionPlan) -> Result<LssModel> {
    let dims = bal.model.state_dims();
    plan.check(&dims)?;
    let r = &plan.orders;
    let modes = bal
        .model
        .modes
        .iter()
        .zip(r)
        .map(|(ms, &rq)| crate::model::ModeSystem {
            a: ms.a.view((0, 0), (rq, rq)).clone_owned(),
            b: ms.b.rows(0, rq).clone_owned(),
            c: ms.c.columns(0, rq).clone_owned(),
            e: ms.e.as_ref().map(|e| e.view((0, 0), (rq, rq)).clone_owned()),
        })
        .collect();
    let mut out = LssModel::new(modes);
    let d = dims.len();
    for i in 1..=d {
        for j in 1..=d {
            if i != j {
                let k = bal.model.coupling(i, j)?;
                out.couplings.insert((i, j), k.view((0, 0), (r[j - 1], r[i - 1])).clone_owned());
            }
        }
    }
    Ok(out)
}

/// Leading `r_q` entries of each `σ_q`, i.e. the diagonal Gramians the
/// truncated model inherits.
pub fn truncated_sigma(sigma: &[DVector<f64>], plan: &ReductionPlan) -> Vec<DVector<f64>> {
    sigma.iter().zip(&plan.orders).map(|(s, &r)| s.rows(0, r).clone_owned()).collect()
}
