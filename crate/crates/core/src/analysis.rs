//! Dwell-time certificates, relaxed-Gramian checks, energy-bound
//! verification and uniform exponential stability.
//!
//! Every extremal constant is a generalized eigenvalue of a symmetric-definite
//! pencil. Strict inequalities are restored by shrinking the extremal value
//! by a relative slack.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, GramianKind, Result};
use crate::gramians::GramianSet;
use crate::linalg::{self, gen_sym_eigenvalues, min_max_sym_eig};
use crate::model::{LssModel, SwitchingSignal};
use crate::simulation::Trajectory;

/// Default relative slack applied to extremal generalized eigenvalues.
pub const DEFAULT_SLACK: f64 = 1e-6;

/// Which quadratic-form assumption produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// Observability Gramians as the storage function.
    Observability,
    /// Inverse reachability Gramians as the storage function.
    Reachability,
    /// Mode-wise Lyapunov decrease with bounded jumps.
    Stability,
}

/// Jump contraction factor for one ordered pair; `None` when the coupling
/// vanishes and the pair imposes no constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFactor {
    pub from: usize,
    pub to: usize,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DwellTimeCertificate {
    pub assumption: Assumption,
    /// Decay rate `M = min_i M_i`.
    pub m: f64,
    /// Jump factor `γ = min γ_{i,j}`.
    pub gamma: f64,
    /// Minimal dwell time `μ = max(0, −ln γ / M)`.
    pub mu: f64,
    pub m_modes: Vec<f64>,
    pub gamma_pairs: Vec<PairFactor>,
    pub slack: f64,
}

fn require_pd(x: &DMatrix<f64>, what: impl Fn() -> String) -> Result<()> {
    if x.is_empty() {
        return Ok(());
    }
    match linalg::symmetrize(x).cholesky() {
        Some(_) => Ok(()),
        None => Err(Error::AssumptionViolated(format!("{} is not positive definite", what()))),
    }
}

fn check_counts(model: &LssModel, xs: &[DMatrix<f64>]) -> Result<()> {
    if xs.len() != model.num_modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for {} modes",
            xs.len(),
            model.num_modes()
        )));
    }
    for (q, (x, ms)) in xs.iter().zip(&model.modes).enumerate() {
        if x.shape() != (ms.n(), ms.n()) {
            return Err(Error::DimensionMismatch(format!("mode {}: matrix shape {:?}", q + 1, x.shape())));
        }
    }
    Ok(())
}

fn mu_from(gamma: f64, m: f64) -> f64 {
    if gamma >= 1.0 {
        0.0
    } else {
        -gamma.ln() / m
    }
}

/// Dwell-time certificate from the observability side (`side = Obs`) or the
/// reachability side (`side = Reach`).
///
/// Obs: `M_i = λ_min(Σ_{j≠i} K_{i,j}ᵀ Q_j K_{i,j}, Q_i)` and
/// `γ_{i,j} = 1 / λ_max(K_{i,j}ᵀ Q_j K_{i,j}, Q_i)`.
/// Reach: `M_i = λ_min(Σ_{j≠i} K_{j,i} P_j K_{j,i}ᵀ, P_i)` and
/// `γ_{i,j} = 1 / λ_max(K_{i,j}ᵀ P_j⁻¹ K_{i,j}, P_i⁻¹)`.
/// Both extremal values are shrunk by `(1 − slack)`.
pub fn dwell_time(model: &LssModel, gramians: &GramianSet, side: GramianKind, slack: f64) -> Result<DwellTimeCertificate> {
    model.require_normalized()?;
    if !(0.0..1.0).contains(&slack) {
        return Err(Error::InvalidArgument(format!("slack {slack} not in [0, 1)")));
    }
    let x = gramians.get(side);
    check_counts(model, x)?;
    for (q, xq) in x.iter().enumerate() {
        require_pd(xq, || format!("{side} Gramian of mode {}", q + 1))?;
    }
    let table = model.coupling_table()?;
    let d = model.num_modes();
    let inv: Vec<DMatrix<f64>> = match side {
        GramianKind::Obs => vec![],
        GramianKind::Reach => x
            .iter()
            .map(|p| linalg::symmetrize(&p.clone().cholesky().expect("checked PD").inverse()))
            .collect(),
    };

    let mut m_modes = Vec::with_capacity(d);
    for i in 0..d {
        let n = x[i].nrows();
        let mut sum = DMatrix::zeros(n, n);
        for j in (0..d).filter(|&j| j != i) {
            sum += match side {
                GramianKind::Obs => table[i][j].transpose() * &x[j] * &table[i][j],
                GramianKind::Reach => &table[j][i] * &x[j] * table[j][i].transpose(),
            };
        }
        require_pd(&sum, || format!("coupling sum into mode {}", i + 1))?;
        let ev = gen_sym_eigenvalues(&sum, &x[i]).expect("checked PD");
        m_modes.push((1.0 - slack) * ev[0]);
    }

    let mut gamma_pairs = Vec::new();
    for i in 0..d {
        for j in (0..d).filter(|&j| j != i) {
            let k = &table[i][j];
            let (lhs, rhs) = match side {
                GramianKind::Obs => (k.transpose() * &x[j] * k, x[i].clone()),
                GramianKind::Reach => (k.transpose() * &inv[j] * k, inv[i].clone()),
            };
            let ev = gen_sym_eigenvalues(&lhs, &rhs).expect("checked PD");
            let top = ev[ev.len() - 1];
            let gamma = if top > 0.0 { Some((1.0 - slack) / top) } else { None };
            gamma_pairs.push(PairFactor { from: i + 1, to: j + 1, gamma });
        }
    }
    let m = m_modes.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma = gamma_pairs.iter().filter_map(|p| p.gamma).fold(f64::INFINITY, f64::min);
    let assumption = match side {
        GramianKind::Obs => Assumption::Observability,
        GramianKind::Reach => Assumption::Reachability,
    };
    Ok(DwellTimeCertificate { assumption, m, gamma, mu: mu_from(gamma, m), m_modes, gamma_pairs, slack })
}

/// The larger of the observability- and reachability-side dwell times.
pub fn combined_dwell_time(model: &LssModel, gramians: &GramianSet, slack: f64) -> Result<f64> {
    let o = dwell_time(model, gramians, GramianKind::Obs, slack)?;
    let r = dwell_time(model, gramians, GramianKind::Reach, slack)?;
    Ok(o.mu.max(r.mu))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxedReport {
    pub kind: GramianKind,
    /// Largest eigenvalue of each mode's left-hand side, divided by its scale.
    pub margins: Vec<f64>,
    pub passed: bool,
}

/// Check `A_i X_i + X_i A_iᵀ + M X_i + B_i B_iᵀ ≺ 0` (reach) or
/// `A_iᵀ X_i + X_i A_i + M X_i + C_iᵀ C_i ≺ 0` (obs) for every mode.
pub fn verify_relaxed_gramians(model: &LssModel, candidates: &[DMatrix<f64>], kind: GramianKind, m_rate: f64) -> Result<RelaxedReport> {
    model.require_normalized()?;
    check_counts(model, candidates)?;
    if !(m_rate >= 0.0) {
        return Err(Error::InvalidArgument(format!("M must be non-negative, got {m_rate}")));
    }
    let mut margins = Vec::with_capacity(candidates.len());
    for (ms, x) in model.modes.iter().zip(candidates) {
        let (ax, w) = match kind {
            GramianKind::Reach => (&ms.a * x, &ms.b * ms.b.transpose()),
            GramianKind::Obs => (ms.a.transpose() * x, ms.c.transpose() * &ms.c),
        };
        let lyap = &ax + ax.transpose();
        let scale = (lyap.norm() + m_rate * x.norm() + w.norm()).max(f64::MIN_POSITIVE);
        let lhs = lyap + x * m_rate + w;
        margins.push(min_max_sym_eig(&lhs).1 / scale);
    }
    let passed = margins.iter().all(|&v| v < -1e-12);
    Ok(RelaxedReport { kind, margins, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub kind: GramianKind,
    /// Number of instants checked.
    pub checked: usize,
    /// Smallest `(bound − value) / scale` over checked instants.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub passed: bool,
}

/// Relative tolerance for energy inequalities.
pub const ENERGY_TOL: f64 = 1e-8;

/// Check the energy inequalities along a simulated trajectory.
///
/// Obs (zero input): `x(0)ᵀ Q_{q1} x(0) ≥ ∫_0^t yᵀy` at every grid time.
/// Reach (zero initial state): `x(T_ℓ)ᵀ P_{qℓ}⁻¹ x(T_ℓ) ≤ ∫_0^{T_ℓ} uᵀu` at
/// every switch instant, using the pre-reset state.
pub fn verify_energy_bounds(
    model: &LssModel,
    gramians: &GramianSet,
    traj: &Trajectory,
    signal: &SwitchingSignal,
    side: GramianKind,
    min_dwell: f64,
) -> Result<EnergyReport> {
    model.require_normalized()?;
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    if !signal.respects_dwell(min_dwell) {
        return Err(Error::Precondition(format!(
            "signal dwell {} is below the required {min_dwell}",
            signal.min_dwell()
        )));
    }
    let x = gramians.get(side);
    check_counts(model, x)?;
    let mut worst = (f64::INFINITY, 0.0);
    let mut checked = 0;
    match side {
        GramianKind::Obs => {
            if traj.u.iter().any(|u| u.iter().any(|&v| v != 0.0)) {
                return Err(Error::Precondition("observability bound needs zero input".into()));
            }
            let x0 = &traj.x[0];
            let bound = (x0.transpose() * &x[traj.mode[0] - 1] * x0)[(0, 0)];
            let energy = traj.cumulative_integral(|k| traj.y[k].norm_squared());
            let scale = bound.abs().max(*energy.last().unwrap()).max(f64::MIN_POSITIVE);
            for (k, e) in energy.iter().enumerate() {
                let margin = (bound - e) / scale;
                if margin < worst.0 {
                    worst = (margin, traj.t[k]);
                }
                checked += 1;
            }
        }
        GramianKind::Reach => {
            if traj.x[0].iter().any(|&v| v != 0.0) {
                return Err(Error::Precondition("reachability bound needs zero initial state".into()));
            }
            let energy = traj.cumulative_integral(|k| traj.u[k].norm_squared());
            for j in &traj.jumps {
                let p = &x[j.from - 1];
                let chol = p
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::AssumptionViolated(format!("reach Gramian of mode {} not PD", j.from)))?;
                let value = j.pre.dot(&chol.solve(&j.pre));
                let bound = energy[j.sample];
                let scale = value.abs().max(bound).max(f64::MIN_POSITIVE);
                let margin = (bound - value) / scale;
                if margin < worst.0 {
                    worst = (margin, j.time);
                }
                checked += 1;
            }
        }
    }
    if checked == 0 {
        worst = (0.0, 0.0);
    }
    Ok(EnergyReport {
        kind: side,
        checked,
        worst_margin: worst.0,
        worst_time: worst.1,
        passed: worst.0 >= -ENERGY_TOL,
    })
}

/// How the stability dwell time was derived. Both routes give the same
/// numbers; the tag records which argument certifies them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityRoute {
    /// Per-mode rate `M*` halved, `μ = −ln γ / (M*/2)`.
    HalvedRate,
    /// Full rate `M*` with doubled dwell, `μ = 2 · (−ln γ / M*)`.
    DoubledDwell,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub assumption: Assumption,
    pub route: StabilityRoute,
    /// Certified decay rate.
    pub m: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Envelope constant `K = (φ² / ε²) e^{M μ}`.
    pub k: f64,
    pub epsilon: f64,
    pub phi: f64,
    /// Largest `M*_q` with `A_qᵀ Q_q + Q_q A_q + M*_q Q_q ⪯ 0`.
    pub m_star: Vec<f64>,
}

impl StabilityCertificate {
    /// `K e^{−M t}`, the envelope in the form it is usually stated.
    pub fn envelope(&self, t: f64) -> f64 {
        self.k * (-self.m * t).exp()
    }

    /// `√K e^{−M t / 2}`: the envelope the quadratic storage argument proves
    /// for `‖x(t)‖ / ‖x(0)‖` (it bounds the squared norm by `K e^{−M t}`).
    pub fn norm_envelope(&self, t: f64) -> f64 {
        self.k.sqrt() * (-0.5 * self.m * t).exp()
    }
}

/// Certify uniform exponential stability under dwell-time switching using
/// `V_q(x) = xᵀ Q_q x`.
pub fn stability_certificate(model: &LssModel, q: &[DMatrix<f64>], route: StabilityRoute, slack: f64) -> Result<StabilityCertificate> {
    model.require_normalized()?;
    check_counts(model, q)?;
    if !(0.0..1.0).contains(&slack) {
        return Err(Error::InvalidArgument(format!("slack {slack} not in [0, 1)")));
    }
    for (i, qi) in q.iter().enumerate() {
        if linalg::symmetrize(qi).cholesky().is_none() {
            return Err(Error::NoCertificate(format!("Q of mode {} is not positive definite", i + 1)));
        }
    }
    let mut m_star = Vec::with_capacity(q.len());
    for (i, (ms, qi)) in model.modes.iter().zip(q).enumerate() {
        let lhs = -(ms.a.transpose() * qi + qi * &ms.a);
        let ev = gen_sym_eigenvalues(&lhs, qi).expect("checked PD");
        if !(ev[0] > 0.0) {
            return Err(Error::NoCertificate(format!(
                "mode {} does not decrease its storage function (rate {:.3e})",
                i + 1,
                ev[0]
            )));
        }
        m_star.push((1.0 - slack) * ev[0]);
    }
    let table = model.coupling_table()?;
    let d = model.num_modes();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (0..d).filter(|&j| j != i) {
            let k = &table[i][j];
            let ev = gen_sym_eigenvalues(&(k.transpose() * &q[j] * k), &q[i]).expect("checked PD");
            worst = worst.max(ev[ev.len() - 1]);
        }
    }
    let gamma = if worst > 0.0 { (1.0 - slack) / worst } else { f64::INFINITY };
    let full = m_star.iter().copied().fold(f64::INFINITY, f64::min);
    let m = 0.5 * full;
    let mu = match route {
        StabilityRoute::HalvedRate => mu_from(gamma, m),
        StabilityRoute::DoubledDwell => 2.0 * mu_from(gamma, full),
    };
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for qi in q {
        let (a, b) = min_max_sym_eig(qi);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let epsilon = (1.0 / hi).sqrt();
    let phi = (1.0 / lo).sqrt();
    let k = (phi * phi) / (epsilon * epsilon) * (m * mu).exp();
    Ok(StabilityCertificate { assumption: Assumption::Stability, route, m, mu, gamma, k, epsilon, phi, m_star })
}
