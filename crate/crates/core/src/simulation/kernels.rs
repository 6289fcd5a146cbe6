//! Impulse-response kernels and generalized transfer functions.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::LssModel;

type C64 = Complex<f64>;

fn check_sequence(model: &LssModel, seq: &[usize], len: usize) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::InvalidSequence("empty mode sequence".into()));
    }
    if seq.len() != len {
        return Err(Error::InvalidSequence(format!("{} modes but {} arguments", seq.len(), len)));
    }
    let d = model.num_modes();
    if let Some(q) = seq.iter().find(|&&q| q == 0 || q > d) {
        return Err(Error::InvalidSequence(format!("mode {q} out of range for {d} modes")));
    }
    if seq.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSequence("neighbouring modes must differ".into()));
    }
    Ok(())
}

/// `e^{A_{qk} t_k} K_{q(k−1),qk} ⋯ K_{q1,q2} e^{A_{q1} t_1} · start`.
fn propagate(model: &LssModel, seq: &[usize], times: &[f64], start: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("kernel times must be finite and non-negative".into()));
    }
    let mut v = start;
    for (i, (&q, &t)) in seq.iter().zip(times).enumerate() {
        if i > 0 {
            v = model.coupling(seq[i - 1], q)?.as_ref() * v;
        }
        v = (&model.mode(q).a * t).exp() * v;
    }
    Ok(v)
}

/// Kernel `h_{q1…qk}(t_1, …, t_k) = C_{qk} e^{A_{qk} t_k} K_{q(k−1),qk} ⋯ e^{A_{q1} t_1} B_{q1}`,
/// a `p × m` matrix.
pub fn kernel_eval(model: &LssModel, seq: &[usize], times: &[f64]) -> Result<DMatrix<f64>> {
    model.require_normalized()?;
    check_sequence(model, seq, times.len())?;
    let v = propagate(model, seq, times, model.mode(seq[0]).b.clone())?;
    Ok(&model.mode(*seq.last().unwrap()).c * v)
}

/// Free response `C_{qk} e^{A_{qk} t_k} ⋯ e^{A_{q1} t_1} x0`, a `p`-vector.
pub fn initial_kernel_eval(model: &LssModel, seq: &[usize], times: &[f64], x0: &DVector<f64>) -> Result<DVector<f64>> {
    model.require_normalized()?;
    check_sequence(model, seq, times.len())?;
    if x0.len() != model.mode(seq[0]).n() {
        return Err(Error::DimensionMismatch(format!("x0 length {} for mode {}", x0.len(), seq[0])));
    }
    let v = propagate(model, seq, times, DMatrix::from_column_slice(x0.len(), 1, x0.as_slice()))?;
    Ok((&model.mode(*seq.last().unwrap()).c * v).column(0).into_owned())
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// `(s E_q − A_q)⁻¹ · rhs`, failing when the pencil is (numerically) singular.
fn resolvent_solve(model: &LssModel, q: usize, s: C64, rhs: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let ms = model.mode(q);
    let n = ms.n();
    let e = ms.e.clone().unwrap_or_else(|| DMatrix::identity(n, n));
    let pencil = to_complex(&e) * s - to_complex(&ms.a);
    let scale = pencil.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = pencil.lu();
    let diag = lu.u().diagonal();
    let min_piv = diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if n > 0 && !(min_piv > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularResolvent { mode: q, s: format!("{s}") });
    }
    lu.solve(&rhs).ok_or_else(|| Error::SingularResolvent { mode: q, s: format!("{s}") })
}

/// Generalized transfer function
/// `H_{q1…qk}(s_1, …, s_k) = C_{q1} Φ_{q1}(s_1) K_{q2,q1} Φ_{q2}(s_2) ⋯ Φ_{qk}(s_k) B_{qk}`
/// with `Φ_q(s) = (s E_q − A_q)⁻¹`.
pub fn transfer_eval(model: &LssModel, seq: &[usize], s: &[C64]) -> Result<DMatrix<C64>> {
    check_sequence(model, seq, s.len())?;
    let k = seq.len();
    let mut v = to_complex(&model.mode(seq[k - 1]).b);
    for i in (0..k).rev() {
        v = resolvent_solve(model, seq[i], s[i], v)?;
        if i > 0 {
            v = to_complex(model.coupling(seq[i], seq[i - 1])?.as_ref()) * v;
        }
    }
    Ok(to_complex(&model.mode(seq[0]).c) * v)
}

/// One frequency sample of a level-1 transfer function, row-major `p × m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub omega: f64,
    pub magnitude: Vec<f64>,
    pub phase: Vec<f64>,
}

/// `H_q(iω)` on a frequency grid.
pub fn frequency_response(model: &LssModel, mode: usize, omegas: &[f64]) -> Result<Vec<FrequencyPoint>> {
    omegas
        .iter()
        .map(|&w| {
            let h = transfer_eval(model, &[mode], &[C64::new(0.0, w)])?;
            let rows = (0..h.nrows()).flat_map(|r| (0..h.ncols()).map(move |c| (r, c)));
            let (magnitude, phase) = rows.map(|(r, c)| (h[(r, c)].norm(), h[(r, c)].arg())).unzip();
            Ok(FrequencyPoint { omega: w, magnitude, phase })
        })
        .collect()
}
