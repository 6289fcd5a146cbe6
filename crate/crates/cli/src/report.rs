//! JSON run reports and CSV trajectory export.

use std::fmt::Write as _;

use serde::Serialize;

use switched_bt::analysis::DwellTimeCertificate;
use switched_bt::balancing::ErrorBound;
use switched_bt::gramians::SolveDiagnostics;
use switched_bt::simulation::{FrequencyPoint, Trajectory};
use switched_bt::{LssModel, ValidationReport};

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub modes: usize,
    pub state_dims: Vec<usize>,
    pub inputs: usize,
    pub outputs: usize,
}

impl ModelSummary {
    pub fn of(m: &LssModel) -> Self {
        Self { modes: m.num_modes(), state_dims: m.state_dims(), inputs: m.inputs(), outputs: m.outputs() }
    }
}

#[derive(Debug, Serialize)]
pub struct GramianReport {
    pub reach: SolveDiagnostics,
    pub obs: SolveDiagnostics,
}

#[derive(Debug, Default, Serialize)]
pub struct Certificates {
    pub observability: Option<DwellTimeCertificate>,
    pub reachability: Option<DwellTimeCertificate>,
    /// Larger of the two dwell times; the one simulations must respect.
    pub dwell_time: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SimulationReport {
    pub dt: f64,
    pub horizon: f64,
    pub signal: Vec<(usize, f64)>,
    pub min_dwell: Option<f64>,
    pub dwell_respected: Option<bool>,
    pub input_l2: f64,
    pub output_l2: f64,
}

#[derive(Debug, Serialize)]
pub struct ArmReport {
    pub method: &'static str,
    pub orders: Vec<usize>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<ErrorBound>,
    pub error_l2: f64,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub model: ModelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gramians: Option<GramianReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<ErrorBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Certificates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub arms: Vec<ArmReport>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: &'static str, model: &LssModel) -> Self {
        Self {
            command,
            model: ModelSummary::of(model),
            validation: None,
            gramians: None,
            sigma: None,
            orders: None,
            error_bound: None,
            certificates: None,
            simulation: None,
            arms: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Shortest round-trip decimal form, with an exponent for extreme magnitudes.
fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:?}");
}

/// `t,mode,u_1..u_m,y_1..y_p[,yhat_1..yhat_p]`. `reduced` must share the grid
/// of `full`.
pub fn trajectory_csv(full: &Trajectory, reduced: Option<&Trajectory>, m: usize, p: usize) -> String {
    let mut out = String::from("t,mode");
    for i in 1..=m {
        let _ = write!(out, ",u_{i}");
    }
    for i in 1..=p {
        let _ = write!(out, ",y_{i}");
    }
    if reduced.is_some() {
        for i in 1..=p {
            let _ = write!(out, ",yhat_{i}");
        }
    }
    out.push('\n');
    for k in 0..full.len() {
        num(&mut out, full.t[k]);
        let _ = write!(out, ",{}", full.mode[k]);
        let rows = [Some(&full.u[k]), Some(&full.y[k]), reduced.map(|r| &r.y[k])];
        for v in rows.into_iter().flatten() {
            for x in v.iter() {
                out.push(',');
                num(&mut out, *x);
            }
        }
        out.push('\n');
    }
    out
}

/// `omega,mag_r_c..,phase_r_c..` with row-major `(r, c)` entries.
pub fn frequency_csv(points: &[FrequencyPoint], p: usize, m: usize) -> String {
    let mut out = String::from("omega");
    for kind in ["mag", "phase"] {
        for r in 1..=p {
            for c in 1..=m {
                let _ = write!(out, ",{kind}_{r}_{c}");
            }
        }
    }
    out.push('\n');
    for pt in points {
        num(&mut out, pt.omega);
        for v in pt.magnitude.iter().chain(&pt.phase) {
            out.push(',');
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}
