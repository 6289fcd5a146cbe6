//! JSON model files: row-major matrices, 1-based mode indices.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use switched_bt::{LssModel, ModeSystem};

use crate::error::{CliError, CliResult};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeFile {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFile {
    pub from: usize,
    pub to: usize,
    #[serde(rename = "K")]
    pub k: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub modes: Vec<ModeFile>,
    #[serde(default)]
    pub couplings: Vec<CouplingFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

fn to_matrix(rows: &Rows, field: &str) -> CliResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(CliError::Parse(format!(
            "{field}: row {i} has {} entries, row 0 has {ncols}",
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.iter().flatten().copied()))
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ModelFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse(format!("at `{path}`: {inner}"))
        })
    }

    pub fn to_model(&self) -> CliResult<LssModel> {
        let mut modes = Vec::with_capacity(self.modes.len());
        for (i, m) in self.modes.iter().enumerate() {
            let mut ms = ModeSystem::new(
                to_matrix(&m.a, &format!("modes[{i}].A"))?,
                to_matrix(&m.b, &format!("modes[{i}].B"))?,
                to_matrix(&m.c, &format!("modes[{i}].C"))?,
            );
            if let Some(e) = &m.e {
                ms = ms.with_descriptor(to_matrix(e, &format!("modes[{i}].E"))?);
            }
            modes.push(ms);
        }
        let mut model = LssModel::new(modes);
        for (i, k) in self.couplings.iter().enumerate() {
            let mat = to_matrix(&k.k, &format!("couplings[{i}].K"))?;
            if model.couplings.insert((k.from, k.to), mat).is_some() {
                return Err(CliError::Parse(format!("couplings[{i}]: duplicate entry ({}, {})", k.from, k.to)));
            }
        }
        model.x0 = self.x0.as_ref().map(|v| DVector::from_column_slice(v));
        Ok(model)
    }

    pub fn from_model(model: &LssModel) -> Self {
        ModelFile {
            modes: model
                .modes
                .iter()
                .map(|ms| ModeFile { a: to_rows(&ms.a), b: to_rows(&ms.b), c: to_rows(&ms.c), e: ms.e.as_ref().map(to_rows) })
                .collect(),
            couplings: model
                .couplings
                .iter()
                .map(|(&(from, to), k)| CouplingFile { from, to, k: to_rows(k) })
                .collect(),
            x0: model.x0.as_ref().map(|v| v.iter().copied().collect()),
        }
    }

    /// Canonical text form: one matrix row per line, shortest round-trip
    /// numbers, trailing newline. Parsing and re-emitting is byte-identical.
    pub fn to_canonical_json(&self) -> String {
        fn num_row(r: &[f64]) -> String {
            serde_json::to_string(r).expect("finite numbers serialize")
        }
        fn matrix(out: &mut String, indent: &str, name: &str, rows: &Rows, last: bool) {
            let _ = write!(out, "{indent}\"{name}\": [");
            for (i, r) in rows.iter().enumerate() {
                let sep = if i + 1 == rows.len() { "" } else { "," };
                let _ = write!(out, "\n{indent}  {}{sep}", num_row(r));
            }
            if !rows.is_empty() {
                let _ = write!(out, "\n{indent}");
            }
            out.push(']');
            out.push_str(if last { "\n" } else { ",\n" });
        }

        let mut out = String::from("{\n  \"modes\": [\n");
        for (i, m) in self.modes.iter().enumerate() {
            out.push_str("    {\n");
            matrix(&mut out, "      ", "A", &m.a, false);
            matrix(&mut out, "      ", "B", &m.b, false);
            matrix(&mut out, "      ", "C", &m.c, m.e.is_none());
            if let Some(e) = &m.e {
                matrix(&mut out, "      ", "E", e, true);
            }
            out.push_str(if i + 1 == self.modes.len() { "    }\n" } else { "    },\n" });
        }
        out.push_str("  ],\n  \"couplings\": [\n");
        for (i, k) in self.couplings.iter().enumerate() {
            let _ = writeln!(out, "    {{\n      \"from\": {},\n      \"to\": {},", k.from, k.to);
            matrix(&mut out, "      ", "K", &k.k, true);
            out.push_str(if i + 1 == self.couplings.len() { "    }\n" } else { "    },\n" });
        }
        out.push_str("  ]");
        if let Some(x0) = &self.x0 {
            let _ = write!(out, ",\n  \"x0\": {}", num_row(x0));
        }
        out.push_str("\n}\n");
        out
    }
}
