//! Parsing of `--signal` and `--input` arguments.

use std::path::Path;

use serde::Deserialize;

use switched_bt::simulation::InputSignal;
use switched_bt::SwitchingSignal;

use crate::error::{CliError, CliResult};

/// A switching-signal argument before the model's dwell time is known.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Explicit(SwitchingSignal),
    /// `random:seed=N,count=M[,dwell=D]`: `count` intervals with durations in
    /// `[dwell, 2·dwell]`; `dwell` defaults to the certified dwell time.
    Random { seed: Option<u64>, count: usize, dwell: Option<f64> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SignalJson {
    Pairs(Vec<(usize, f64)>),
    Object { events: Vec<(usize, f64)> },
}

fn read(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_signal_json(text: &str, origin: &str) -> CliResult<SwitchingSignal> {
    let parsed: SignalJson =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("signal {origin}: {e}")))?;
    let events = match parsed {
        SignalJson::Pairs(p) => p,
        SignalJson::Object { events } => events,
    };
    SwitchingSignal::new(events).map_err(|e| CliError::Parse(format!("signal {origin}: {e}")))
}

/// `key=value` pairs after a `prefix:`.
fn key_values(body: &str) -> CliResult<Vec<(&str, &str)>> {
    body.split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| kv.split_once('=').ok_or_else(|| CliError::Parse(format!("expected key=value, got `{kv}`"))))
        .collect()
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim().parse().map_err(|_| CliError::Parse(format!("invalid value for {key}: `{v}`")))
}

pub fn parse_signal(arg: &str) -> CliResult<SignalSpec> {
    let arg = arg.trim();
    if let Some(body) = arg.strip_prefix("random:") {
        let (mut seed, mut count, mut dwell) = (None, 4, None);
        for (k, v) in key_values(body)? {
            match k.trim() {
                "seed" => seed = Some(number::<u64>(k, v)?),
                "count" => count = number(k, v)?,
                "dwell" => dwell = Some(number::<f64>(k, v)?),
                other => return Err(CliError::Parse(format!("unknown random signal key `{other}`"))),
            }
        }
        if count == 0 {
            return Err(CliError::Parse("random signal needs count >= 1".into()));
        }
        if let Some(d) = dwell {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Parse(format!("dwell must be positive, got {d}")));
            }
        }
        return Ok(SignalSpec::Random { seed, count, dwell });
    }
    if arg.starts_with('[') || arg.starts_with('{') {
        return parse_signal_json(arg, "argument").map(SignalSpec::Explicit);
    }
    parse_signal_json(&read(arg)?, arg).map(SignalSpec::Explicit)
}

impl SignalSpec {
    /// Resolve to a concrete signal. `certified` is the model's dwell time if
    /// one could be computed.
    pub fn resolve(&self, num_modes: usize, certified: Option<f64>, default_seed: u64) -> CliResult<SwitchingSignal> {
        match self {
            SignalSpec::Explicit(s) => Ok(s.clone()),
            SignalSpec::Random { seed, count, dwell } => {
                let dwell = match dwell.or(certified) {
                    Some(d) if d > 0.0 => d,
                    Some(_) => 1.0,
                    None => {
                        return Err(CliError::Domain(
                            "no certified dwell time for this model; pass dwell=D in the random signal".into(),
                        ))
                    }
                };
                let horizon = 2.0 * dwell * (*count as f64 + 1.0);
                let mut s = SwitchingSignal::random_dwell(num_modes, dwell, 2.0 * dwell, horizon, seed.unwrap_or(default_seed))?;
                s.events.truncate(*count);
                Ok(s)
            }
        }
    }
}

/// `reference`, `zero`, `damped:amplitude=..,frequency=..,offset=..,decay=..`,
/// or a path to a JSON input description.
pub fn parse_input(arg: &str) -> CliResult<InputSignal> {
    let arg = arg.trim();
    match arg {
        "reference" => return Ok(InputSignal::reference()),
        "zero" => return Ok(InputSignal::Zero),
        _ => {}
    }
    if let Some(body) = arg.strip_prefix("damped:") {
        let (mut amplitude, mut frequency, mut offset, mut decay) = (1.0, 1.0, 0.0, 0.0);
        for (k, v) in key_values(body)? {
            let x: f64 = number(k, v)?;
            match k.trim() {
                "amplitude" => amplitude = x,
                "frequency" => frequency = x,
                "offset" => offset = x,
                "decay" => decay = x,
                other => return Err(CliError::Parse(format!("unknown input parameter `{other}`"))),
            }
        }
        return Ok(InputSignal::Damped { amplitude, frequency, offset, decay });
    }
    if !Path::new(arg).exists() {
        return Err(CliError::Parse(format!(
            "input `{arg}` is neither a builtin (reference, zero, damped:...) nor an existing file"
        )));
    }
    serde_json::from_str(&read(arg)?).map_err(|e| CliError::Parse(format!("input {arg}: {e}")))
}
