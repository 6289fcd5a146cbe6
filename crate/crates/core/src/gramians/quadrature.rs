//! Slow reference Gramians from the defining integrals.
//!
//! For a mode tuple `(q_1, …, q_k)` without repeated neighbours the reach
//! integrand is `g gᵀ` with
//! `g = e^{A_{q1} t_1} K_{q2,q1} e^{A_{q2} t_2} ⋯ K_{qk,q(k−1)} e^{A_{qk} t_k} B_{qk}`.
//! The tensor-product trapezoid rule over `[0, t_max]^k` factorizes into
//! nested one-dimensional rules, which keeps the cost linear in `steps`.

use nalgebra::DMatrix;

use super::GramianKind;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::LssModel;

fn trapezoid_weights(steps: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |i| if i == 0 || i == steps { 0.5 * h } else { h })
}

/// `∫_0^{t_max} e^{A t} W e^{Aᵀ t} dt` by the trapezoid rule.
fn sandwich_integral(a: &DMatrix<f64>, w: &DMatrix<f64>, t_max: f64, steps: usize) -> DMatrix<f64> {
    let h = t_max / steps as f64;
    let step = (a * h).exp();
    let mut e = DMatrix::identity(a.nrows(), a.ncols());
    let mut acc = DMatrix::zeros(a.nrows(), a.nrows());
    for wgt in trapezoid_weights(steps, h) {
        acc += (&e * w * e.transpose()) * wgt;
        e = &e * &step;
    }
    linalg::symmetrize(&acc)
}

fn tuples(d: usize, first: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![first]];
    for _ in 1..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                let last = *t.last().unwrap();
                (0..d).filter(move |&j| j != last).map(move |j| {
                    let mut t2 = t.clone();
                    t2.push(j);
                    t2
                })
            })
            .collect();
    }
    out
}

/// Level-`k` Gramian of `mode` (1-based) by quadrature of its defining
/// integral, summed over all admissible mode tuples. Test oracle only.
pub fn gramian_by_quadrature(
    model: &LssModel,
    mode: usize,
    k: usize,
    kind: GramianKind,
    t_max: f64,
    steps: usize,
) -> Result<DMatrix<f64>> {
    model.require_normalized()?;
    let d = model.num_modes();
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("quadrature supports k in 1..=3, got {k}")));
    }
    if mode == 0 || mode > d {
        return Err(Error::InvalidArgument(format!("mode {mode} out of range")));
    }
    if steps == 0 || !(t_max > 0.0) {
        return Err(Error::InvalidArgument("need t_max > 0 and steps > 0".into()));
    }
    for (q, ms) in model.modes.iter().enumerate() {
        let abscissa = linalg::spectral_abscissa(&ms.a);
        if !(abscissa < 0.0) {
            return Err(Error::Unstable { mode: q + 1, abscissa });
        }
    }
    let table = model.coupling_table()?;
    let n = model.mode(mode).n();
    let mut total = DMatrix::zeros(n, n);
    for tup in tuples(d, mode - 1, k) {
        // Innermost factor first, working outwards to q_1.
        let last = *tup.last().unwrap();
        let ms = &model.modes[last];
        let (a_last, w_last) = match kind {
            GramianKind::Reach => (ms.a.clone(), &ms.b * ms.b.transpose()),
            GramianKind::Obs => (ms.a.transpose(), ms.c.transpose() * &ms.c),
        };
        let mut w = sandwich_integral(&a_last, &w_last, t_max, steps);
        for pos in (0..tup.len() - 1).rev() {
            let (q, next) = (tup[pos], tup[pos + 1]);
            let (a, kw) = match kind {
                GramianKind::Reach => {
                    let kk = &table[next][q];
                    (model.modes[q].a.clone(), kk * &w * kk.transpose())
                }
                GramianKind::Obs => {
                    let kk = &table[q][next];
                    (model.modes[q].a.transpose(), kk.transpose() * &w * kk)
                }
            };
            w = sandwich_integral(&a, &kw, t_max, steps);
        }
        total += w;
    }
    Ok(total)
}
