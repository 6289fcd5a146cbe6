use thiserror::Error;

use crate::gramians::ExistenceReport;

/// Which Gramian family a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramianKind {
    Reach,
    Obs,
}

impl std::fmt::Display for GramianKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GramianKind::Reach => f.write_str("reachability"),
            GramianKind::Obs => f.write_str("observability"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("mode {mode}: descriptor matrix E is singular (rcond {rcond:.3e})")]
    SingularDescriptor { mode: usize, rcond: f64 },

    #[error("model has descriptor matrices; call normalize_descriptor first")]
    NotNormalized,

    #[error("mode {mode} is not stable (spectral abscissa {abscissa:.6e})")]
    Unstable { mode: usize, abscissa: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error(
        "coupled {kind} series did not converge after {levels} levels (last increment {last_increment:.3e})"
    )]
    NotConverged {
        kind: GramianKind,
        levels: usize,
        last_increment: f64,
        report: Box<ExistenceReport>,
    },

    #[error("matrix is indefinite: eigenvalue {min_eig:.3e} below tolerance (largest {max_eig:.3e})")]
    Indefinite { min_eig: f64, max_eig: f64 },

    #[error("mode {mode}: {kind} Gramian is singular; cannot balance")]
    SingularGramian { mode: usize, kind: GramianKind },

    #[error("resolvent (sE - A) of mode {mode} is singular at s = {s}")]
    SingularResolvent { mode: usize, s: String },

    #[error("invalid reduction order: {0}")]
    InvalidOrder(String),

    #[error("invalid mode sequence: {0}")]
    InvalidSequence(String),

    #[error("empty switching signal")]
    EmptySignal,

    #[error("trajectories have disjoint horizons")]
    DisjointHorizons,

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("no stability certificate: {0}")]
    NoCertificate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
