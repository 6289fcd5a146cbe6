use nalgebra::DVector;
use serde::Serialize;

use switched_bt::analysis::{dwell_time, DEFAULT_SLACK};
use switched_bt::balancing::{balance, balance_average, error_bound, truncate, BalancedRealization, ReductionPlan};
use switched_bt::gramians::{compute_gramians, CoupledOptions, GramianSet};
use switched_bt::simulation::{frequency_response, output_l2_error, simulate, InputSignal, Trajectory};
use switched_bt::{examples, normalize_descriptor, validate_model, GramianKind, LssModel, SwitchingSignal, Violation};

use crate::error::{CliError, CliResult};
use crate::model_file::ModelFile;
use crate::report::{
    frequency_csv, trajectory_csv, ArmReport, Certificates, GramianReport, RunReport, SimulationReport,
};
use crate::spec::{parse_input, parse_signal, SignalSpec};

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &str, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Write to `path`, or stdout when absent.
pub fn emit(path: Option<&str>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_model_file(path: &str) -> CliResult<LssModel> {
    ModelFile::parse(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{path}: {e}")))?
        .to_model()
        .map_err(|e| CliError::Parse(format!("{path}: {e}")))
}

/// Parse, validate and normalize a model file.
pub fn load_model(path: &str) -> CliResult<LssModel> {
    let model = parse_model_file(path)?;
    let report = validate_model(&model);
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(Violation::to_string).collect();
        return Err(CliError::Domain(format!("{path}: invalid model: {}", list.join("; "))));
    }
    Ok(normalize_descriptor(&model)?)
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    violations: Vec<Violation>,
    messages: Vec<String>,
}

pub fn validate(model_path: &str) -> CliResult<()> {
    let model = parse_model_file(model_path)?;
    let report = validate_model(&model);
    let out = ValidateOutput {
        valid: report.is_valid(),
        messages: report.violations.iter().map(Violation::to_string).collect(),
        violations: report.violations,
    };
    print!("{}\n", serde_json::to_string_pretty(&out).expect("serializable"));
    if out.valid {
        Ok(())
    } else {
        Err(CliError::Domain(format!("{model_path}: {} violation(s)", out.violations.len())))
    }
}

pub fn example(name: &str, out: Option<&str>) -> CliResult<()> {
    let model = examples::by_name(name).ok_or_else(|| {
        CliError::Domain(format!("unknown example `{name}`; available: {}", examples::AVAILABLE.join(", ")))
    })?;
    emit(out, &ModelFile::from_model(&model).to_canonical_json())
}

fn certificates(model: &LssModel, g: &GramianSet, warnings: &mut Vec<String>) -> Certificates {
    let mut side = |kind: GramianKind| match dwell_time(model, g, kind, DEFAULT_SLACK) {
        Ok(c) => Some(c),
        Err(e) => {
            warnings.push(format!("no {kind} dwell-time certificate: {e}"));
            None
        }
    };
    let observability = side(GramianKind::Obs);
    let reachability = side(GramianKind::Reach);
    let dwell_time = match (&observability, &reachability) {
        (Some(o), Some(r)) => Some(o.mu.max(r.mu)),
        _ => None,
    };
    Certificates { observability, reachability, dwell_time }
}

/// Gramians, per-mode balancing and dwell-time certificates of `model`.
struct Analysis {
    gramians: GramianSet,
    balanced: BalancedRealization,
    certificates: Certificates,
}

fn analyze(model: &LssModel, report: &mut RunReport) -> CliResult<Analysis> {
    let gramians = compute_gramians(model, &CoupledOptions::default())?;
    report.gramians =
        Some(GramianReport { reach: gramians.reach_diagnostics.clone(), obs: gramians.obs_diagnostics.clone() });
    let balanced = balance(model, &gramians)?;
    report.sigma = Some(sigma_rows(&balanced));
    let certificates = certificates(model, &gramians, &mut report.warnings);
    Ok(Analysis { gramians, balanced, certificates })
}

fn sigma_rows(b: &BalancedRealization) -> Vec<Vec<f64>> {
    b.sigma.iter().map(|s| s.iter().copied().collect()).collect()
}

fn plan(orders: Option<&[usize]>, threshold: Option<f64>, bal: &BalancedRealization, dims: &[usize]) -> CliResult<ReductionPlan> {
    match (orders, threshold) {
        (Some(o), None) => Ok(ReductionPlan::new(o.to_vec(), dims)?),
        (None, Some(t)) => Ok(ReductionPlan::from_threshold(&bal.sigma, t)?),
        _ => Err(CliError::Parse("give exactly one of --orders or --threshold".into())),
    }
}

pub struct ReduceArgs<'a> {
    pub model: &'a str,
    pub orders: Option<&'a [usize]>,
    pub threshold: Option<f64>,
    pub out: Option<&'a str>,
}

pub fn reduce(args: &ReduceArgs<'_>) -> CliResult<()> {
    let model = load_model(args.model)?;
    let mut report = RunReport::new("reduce", &model);
    let an = analyze(&model, &mut report)?;
    let plan = plan(args.orders, args.threshold, &an.balanced, &model.state_dims())?;
    let reduced = truncate(&an.balanced, &plan)?;
    report.error_bound = Some(error_bound(&an.balanced.sigma, &plan)?);
    report.orders = Some(plan.orders);
    report.certificates = Some(an.certificates);
    if let Some(out) = args.out {
        write(out, &ModelFile::from_model(&reduced).to_canonical_json())?;
    }
    emit(None, &report.to_json())
}

pub struct SimArgs<'a> {
    pub signal: Option<&'a str>,
    pub input: &'a str,
    pub dt: f64,
    pub seed: u64,
}

struct Scenario {
    signal: SwitchingSignal,
    input: InputSignal,
    dt: f64,
}

fn scenario(args: &SimArgs<'_>, model: &LssModel, dwell: Option<f64>) -> CliResult<Scenario> {
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Parse(format!("--dt must be positive, got {}", args.dt)));
    }
    let spec = match args.signal {
        Some(s) => parse_signal(s)?,
        None => SignalSpec::Random { seed: None, count: 4, dwell: None },
    };
    let signal = spec.resolve(model.num_modes(), dwell, args.seed)?;
    Ok(Scenario { signal, input: parse_input(args.input)?, dt: args.dt })
}

fn initial_state(model: &LssModel, signal: &SwitchingSignal) -> CliResult<DVector<f64>> {
    let n = model.mode(signal.events[0].0).n();
    match &model.x0 {
        None => Ok(DVector::zeros(n)),
        Some(x) if x.len() == n => Ok(x.clone()),
        Some(x) => Err(CliError::Domain(format!(
            "x0 has length {} but the signal starts in mode {} of dimension {n}",
            x.len(),
            signal.events[0].0
        ))),
    }
}

fn simulation_report(sc: &Scenario, full: &Trajectory, dwell: Option<f64>, warnings: &mut Vec<String>) -> SimulationReport {
    let respected = dwell.map(|mu| sc.signal.respects_dwell(mu));
    if respected == Some(false) {
        warnings.push(format!(
            "signal dwell {} is below the certified dwell time {}; the error bound is not guaranteed",
            sc.signal.min_dwell(),
            dwell.unwrap()
        ));
    }
    SimulationReport {
        dt: sc.dt,
        horizon: sc.signal.horizon(),
        signal: sc.signal.events.clone(),
        min_dwell: (sc.signal.events.len() > 1).then(|| sc.signal.min_dwell()),
        dwell_respected: respected,
        input_l2: full.input_l2(),
        output_l2: full.output_l2(),
    }
}

fn arm(
    method: &'static str,
    model: &LssModel,
    reduced: &LssModel,
    sc: &Scenario,
    full: &Trajectory,
    sigma: &BalancedRealization,
    bound: bool,
) -> CliResult<(ArmReport, Trajectory)> {
    let traj = simulate(reduced, &sc.signal, &sc.input, &DVector::zeros(reduced.mode(sc.signal.events[0].0).n()), sc.dt)?;
    let err = output_l2_error(full, &traj)?;
    let u = full.input_l2();
    let ratio = if u > 0.0 { err / u } else { f64::NAN };
    let orders = reduced.state_dims();
    let error_bound = if bound {
        Some(error_bound(&sigma.sigma, &ReductionPlan::new(orders.clone(), &model.state_dims())?)?)
    } else {
        None
    };
    let within_bound = error_bound.as_ref().map(|b| ratio <= b.bound);
    let report = ArmReport { method, orders, sigma: sigma_rows(sigma), error_bound, error_l2: err, ratio, within_bound };
    Ok((report, traj))
}

pub fn simulate_cmd(
    model_path: &str,
    reduced_path: Option<&str>,
    args: &SimArgs<'_>,
    csv: Option<&str>,
    out: Option<&str>,
) -> CliResult<()> {
    let model = load_model(model_path)?;
    let reduced = reduced_path.map(load_model).transpose()?;
    let mut report = RunReport::new("simulate", &model);
    let an = match analyze(&model, &mut report) {
        Ok(a) => Some(a),
        Err(e) => {
            report.warnings.push(format!("analysis unavailable: {e}"));
            None
        }
    };
    let dwell = an.as_ref().and_then(|a| a.certificates.dwell_time);
    let sc = scenario(args, &model, dwell)?;
    let x0 = initial_state(&model, &sc.signal)?;
    let full = simulate(&model, &sc.signal, &sc.input, &x0, sc.dt)?;
    report.simulation = Some(simulation_report(&sc, &full, dwell, &mut report.warnings));

    let mut red_traj = None;
    if let Some(red) = &reduced {
        if red.num_modes() != model.num_modes() || red.inputs() != model.inputs() || red.outputs() != model.outputs() {
            return Err(CliError::Domain("reduced model does not match the full model's modes, inputs or outputs".into()));
        }
        if x0.iter().any(|&v| v != 0.0) {
            report.warnings.push("reduced model starts from zero; x0 is not transferred".into());
        }
        let an = an.as_ref().ok_or_else(|| CliError::Domain("cannot bound the error without full-model Gramians".into()))?;
        let valid_orders = ReductionPlan::new(red.state_dims(), &model.state_dims()).is_ok();
        let (a, traj) = arm("bt", &model, red, &sc, &full, &an.balanced, valid_orders)?;
        report.orders = Some(a.orders.clone());
        report.error_bound = a.error_bound.clone();
        report.arms.push(a);
        red_traj = Some(traj);
    }
    report.certificates = an.map(|a| a.certificates);
    if let Some(path) = csv {
        write(path, &trajectory_csv(&full, red_traj.as_ref(), model.inputs(), model.outputs()))?;
    }
    emit(out, &report.to_json())
}

pub struct CompareArgs<'a> {
    pub model: &'a str,
    pub orders: Option<&'a [usize]>,
    pub threshold: Option<f64>,
    pub sim: SimArgs<'a>,
    pub out: Option<&'a str>,
}

pub fn compare(args: &CompareArgs<'_>) -> CliResult<()> {
    let model = load_model(args.model)?;
    let mut report = RunReport::new("compare", &model);
    let an = analyze(&model, &mut report)?;
    let plan = plan(args.orders, args.threshold, &an.balanced, &model.state_dims())?;
    report.orders = Some(plan.orders.clone());
    report.error_bound = Some(error_bound(&an.balanced.sigma, &plan)?);
    let dwell = an.certificates.dwell_time;
    let sc = scenario(&args.sim, &model, dwell)?;
    let x0 = initial_state(&model, &sc.signal)?;
    let full = simulate(&model, &sc.signal, &sc.input, &x0, sc.dt)?;
    report.simulation = Some(simulation_report(&sc, &full, dwell, &mut report.warnings));

    let bt1 = truncate(&an.balanced, &plan)?;
    report.arms.push(arm("bt1", &model, &bt1, &sc, &full, &an.balanced, true)?.0);
    match balance_average(&model, &an.gramians) {
        Ok(avg) => {
            let bt2 = truncate(&avg, &plan)?;
            report.arms.push(arm("bt2", &model, &bt2, &sc, &full, &avg, false)?.0);
        }
        Err(e) => report.warnings.push(format!("average-Gramian arm skipped: {e}")),
    }
    report.certificates = Some(an.certificates);
    emit(args.out, &report.to_json())
}

pub struct FreqArgs<'a> {
    pub model: &'a str,
    pub mode: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub points: usize,
    pub csv: Option<&'a str>,
}

pub fn freq(args: &FreqArgs<'_>) -> CliResult<()> {
    let model = load_model(args.model)?;
    if args.mode == 0 || args.mode > model.num_modes() {
        return Err(CliError::Parse(format!("--mode {} out of range 1..={}", args.mode, model.num_modes())));
    }
    if !(args.w_min > 0.0 && args.w_max > args.w_min && args.points >= 2) {
        return Err(CliError::Parse("need 0 < --w-min < --w-max and --points >= 2".into()));
    }
    let (lo, hi) = (args.w_min.log10(), args.w_max.log10());
    let omegas: Vec<f64> = (0..args.points)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (args.points - 1) as f64))
        .collect();
    let points = frequency_response(&model, args.mode, &omegas)?;
    emit(args.csv, &frequency_csv(&points, model.outputs(), model.inputs()))
}
