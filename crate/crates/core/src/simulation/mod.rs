//! Time-domain simulation with state resets at switch instants.
//!
//! Each interval `(T_{i−1}, T_i]` is split into `⌈(T_i − T_{i−1}) / dt⌉`
//! equal classical RK4 steps, so switch instants always land on the grid.
//! The sample at `T_i` belongs to the outgoing mode; the reset
//! `x(T_i⁺) = K_{q_i,q_{i+1}} x(T_i)` is recorded as a [`Jump`] and the next
//! sample is the first one of the incoming mode.

mod kernels;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LssModel, SwitchingSignal};
use crate::par::{self, Execution};

pub use kernels::{frequency_response, initial_kernel_eval, kernel_eval, transfer_eval, FrequencyPoint};

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Scalar input profile applied identically to every input channel, or
/// sampled vector data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InputSignal {
    Zero,
    /// `u(t) = (amplitude · sin(frequency · t) + offset) · e^{−decay · t}`.
    Damped { amplitude: f64, frequency: f64, offset: f64, decay: f64 },
    /// Piecewise-linear interpolation of samples; `values[k]` has one entry
    /// per input channel. Constant extrapolation outside the sample range.
    Sampled { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl InputSignal {
    /// `u(t) = ½ sin(20t) e^{−t/2} + (1/20) e^{−t/2}`.
    pub fn reference() -> Self {
        InputSignal::Damped { amplitude: 0.5, frequency: 20.0, offset: 0.05, decay: 0.5 }
    }

    pub fn check(&self, m: usize) -> Result<()> {
        if let InputSignal::Sampled { times, values } = self {
            if times.is_empty() || times.len() != values.len() {
                return Err(Error::InvalidArgument("sampled input needs matching non-empty times/values".into()));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
            }
            if values.iter().any(|v| v.len() != m) {
                return Err(Error::DimensionMismatch(format!("sampled input must have {m} channels")));
            }
        }
        Ok(())
    }

    /// Value at `t` for `m` channels.
    pub fn eval(&self, t: f64, m: usize) -> DVector<f64> {
        match self {
            InputSignal::Zero => DVector::zeros(m),
            InputSignal::Damped { amplitude, frequency, offset, decay } => {
                let v = (amplitude * (frequency * t).sin() + offset) * (-decay * t).exp();
                DVector::from_element(m, v)
            }
            InputSignal::Sampled { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    return DVector::from_column_slice(&values[0]);
                }
                if k == times.len() {
                    return DVector::from_column_slice(&values[k - 1]);
                }
                let (t0, t1) = (times[k - 1], times[k]);
                let w = (t - t0) / (t1 - t0);
                DVector::from_iterator(m, values[k - 1].iter().zip(&values[k]).map(|(a, b)| a + w * (b - a)))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InputSignal::Zero => true,
            InputSignal::Damped { amplitude, offset, .. } => *amplitude == 0.0 && *offset == 0.0,
            InputSignal::Sampled { values, .. } => values.iter().flatten().all(|&v| v == 0.0),
        }
    }
}

/// A state reset at a switch instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    /// Index of the pre-jump sample in the trajectory.
    pub sample: usize,
    pub time: f64,
    pub from: usize,
    pub to: usize,
    pub pre: DVector<f64>,
    pub post: DVector<f64>,
}

/// Simulated samples. State dimension varies with the active mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub mode: Vec<usize>,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub jumps: Vec<Jump>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    /// Cumulative trapezoid integral of `f(sample)` over the grid; entry `k`
    /// is the integral up to `t[k]`.
    pub fn cumulative_integral(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        let mut prev = f(0);
        out.push(0.0);
        for k in 1..self.len() {
            let cur = f(k);
            acc += 0.5 * (self.t[k] - self.t[k - 1]) * (prev + cur);
            out.push(acc);
            prev = cur;
        }
        out
    }

    /// `‖u‖₂` over the trajectory's horizon (trapezoid rule).
    pub fn input_l2(&self) -> f64 {
        self.cumulative_integral(|k| self.u[k].norm_squared()).last().copied().unwrap_or(0.0).sqrt()
    }

    /// `‖y‖₂` over the trajectory's horizon (trapezoid rule).
    pub fn output_l2(&self) -> f64 {
        self.cumulative_integral(|k| self.y[k].norm_squared()).last().copied().unwrap_or(0.0).sqrt()
    }
}

struct ModeData<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DMatrix<f64>,
    c: &'a DMatrix<f64>,
}

fn rk4_step(md: &ModeData<'_>, x: &DVector<f64>, u0: &DVector<f64>, um: &DVector<f64>, u1: &DVector<f64>, h: f64) -> DVector<f64> {
    let f = |x: &DVector<f64>, u: &DVector<f64>| md.a * x + md.b * u;
    let k1 = f(x, u0);
    let k2 = f(&(x + &k1 * (0.5 * h)), um);
    let k3 = f(&(x + &k2 * (0.5 * h)), um);
    let k4 = f(&(x + &k3 * h), u1);
    x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// Integrate the switched system along `signal` from `x0`.
pub fn simulate(
    model: &LssModel,
    signal: &SwitchingSignal,
    u: &InputSignal,
    x0: &DVector<f64>,
    dt: f64,
) -> Result<Trajectory> {
    model.require_normalized()?;
    if signal.events.is_empty() {
        return Err(Error::EmptySignal);
    }
    signal.check()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let d = model.num_modes();
    if let Some(&(q, _)) = signal.events.iter().find(|e| e.0 > d) {
        return Err(Error::InvalidSequence(format!("mode {q} out of range for {d} modes")));
    }
    let q1 = signal.events[0].0;
    if x0.len() != model.mode(q1).n() {
        return Err(Error::DimensionMismatch(format!(
            "x0 has length {}, mode {q1} has dimension {}",
            x0.len(),
            model.mode(q1).n()
        )));
    }
    let m = model.inputs();
    u.check(m)?;
    // Resolve all couplings up front so invalid models fail before integrating.
    let mut resets = Vec::with_capacity(signal.events.len());
    for w in signal.events.windows(2) {
        resets.push(model.coupling(w[0].0, w[1].0)?.into_owned());
    }

    let total_steps: usize = signal.events.iter().map(|&(_, l)| steps_for(l, dt)).sum();
    let mut tr = Trajectory {
        t: Vec::with_capacity(total_steps + 1),
        mode: Vec::with_capacity(total_steps + 1),
        x: Vec::with_capacity(total_steps + 1),
        y: Vec::with_capacity(total_steps + 1),
        u: Vec::with_capacity(total_steps + 1),
        jumps: Vec::with_capacity(resets.len()),
    };

    let mut x = x0.clone();
    let mut t_start = 0.0;
    for (i, &(q, len)) in signal.events.iter().enumerate() {
        let ms = model.mode(q);
        let md = ModeData { a: &ms.a, b: &ms.b, c: &ms.c };
        let n_steps = steps_for(len, dt);
        let h = len / n_steps as f64;
        if i == 0 {
            let u0 = u.eval(0.0, m);
            tr.t.push(0.0);
            tr.mode.push(q);
            tr.y.push(md.c * &x);
            tr.x.push(x.clone());
            tr.u.push(u0);
        }
        let mut u_prev = u.eval(t_start, m);
        for s in 0..n_steps {
            let t0 = t_start + s as f64 * h;
            let t1 = if s + 1 == n_steps { t_start + len } else { t_start + (s + 1) as f64 * h };
            let um = u.eval(t0 + 0.5 * h, m);
            let u1 = u.eval(t1, m);
            x = rk4_step(&md, &x, &u_prev, &um, &u1, h);
            tr.t.push(t1);
            tr.mode.push(q);
            tr.y.push(md.c * &x);
            tr.x.push(x.clone());
            tr.u.push(u1.clone());
            u_prev = u1;
        }
        t_start += len;
        if let Some(k) = resets.get(i) {
            let post = k * &x;
            tr.jumps.push(Jump {
                sample: tr.t.len() - 1,
                time: t_start,
                from: q,
                to: signal.events[i + 1].0,
                pre: x.clone(),
                post: post.clone(),
            });
            x = post;
        }
    }
    Ok(tr)
}

fn steps_for(len: f64, dt: f64) -> usize {
    // Tolerate roundoff so that e.g. 0.3 / 0.1 does not become 4 steps.
    ((len / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Simulate many signals concurrently; results are in input order. With
/// `x0 = None` each run starts from the zero state of its first mode.
pub fn simulate_batch(
    model: &LssModel,
    signals: &[SwitchingSignal],
    u: &InputSignal,
    x0: Option<&DVector<f64>>,
    dt: f64,
    exec: Execution,
) -> Vec<Result<Trajectory>> {
    par::map_slice(exec, signals, |s| {
        let x0 = match (x0, s.events.first()) {
            (Some(x), _) => x.clone(),
            (None, Some(&(q, _))) if q >= 1 && q <= model.num_modes() => DVector::zeros(model.mode(q).n()),
            (None, _) => DVector::zeros(0),
        };
        simulate(model, s, u, &x0, dt)
    })
}

fn interp_y(tr: &Trajectory, t: f64) -> DVector<f64> {
    let k = tr.t.partition_point(|&s| s < t);
    if k == 0 {
        return tr.y[0].clone();
    }
    if k == tr.len() {
        return tr.y[k - 1].clone();
    }
    let (t0, t1) = (tr.t[k - 1], tr.t[k]);
    if t1 == t {
        return tr.y[k].clone();
    }
    let w = (t - t0) / (t1 - t0);
    &tr.y[k - 1] + (&tr.y[k] - &tr.y[k - 1]) * w
}

/// `‖y_a − y_b‖₂` over the common horizon, trapezoid rule on the grid of `a`
/// (with `b` linearly interpolated when grids differ).
pub fn output_l2_error(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DisjointHorizons);
    }
    if a.y[0].len() != b.y[0].len() {
        return Err(Error::DimensionMismatch("trajectories have different output counts".into()));
    }
    if a.t == b.t {
        let e = a.cumulative_integral(|k| (&a.y[k] - &b.y[k]).norm_squared());
        return Ok(e.last().copied().unwrap_or(0.0).sqrt());
    }
    let lo = a.t[0].max(b.t[0]);
    let hi = a.horizon().min(b.horizon());
    if !(hi > lo) {
        return Err(Error::DisjointHorizons);
    }
    let mut grid: Vec<f64> = a.t.iter().copied().filter(|&t| t >= lo && t <= hi).collect();
    if grid.first() != Some(&lo) {
        grid.insert(0, lo);
    }
    if grid.last() != Some(&hi) {
        grid.push(hi);
    }
    let mut acc = 0.0;
    let mut prev = (interp_y(a, grid[0]) - interp_y(b, grid[0])).norm_squared();
    for w in grid.windows(2) {
        let cur = (interp_y(a, w[1]) - interp_y(b, w[1])).norm_squared();
        acc += 0.5 * (w[1] - w[0]) * (prev + cur);
        prev = cur;
    }
    Ok(acc.sqrt())
}

/// `‖u‖₂` on `[0, horizon]` with `m` channels, trapezoid rule with step `dt`.
pub fn input_l2_norm(u: &InputSignal, m: usize, horizon: f64, dt: f64) -> Result<f64> {
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument("horizon and dt must be positive".into()));
    }
    u.check(m)?;
    let n = steps_for(horizon, dt);
    let h = horizon / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * u.eval(k as f64 * h, m).norm_squared();
    }
    Ok((acc * h).sqrt())
}
