//! Model order reduction for continuous-time linear switched systems.
//!
//! The pipeline is: build or load an [`LssModel`], compute its coupled
//! Gramians with [`gramians::compute_gramians`], balance each mode with
//! [`balancing::balance`], and truncate with [`balancing::truncate`]. The
//! guaranteed output-error bound comes from [`balancing::error_bound`], and
//! [`analysis`] provides the dwell time under which that bound holds.
//! [`simulation`] replays both models on concrete switching signals.

pub mod analysis;
pub mod balancing;
pub mod error;
pub mod examples;
pub mod gramians;
pub mod linalg;
pub mod model;
pub mod par;
pub mod random;
pub mod simulation;

pub use error::{Error, GramianKind, Result};
pub use model::{
    apply_equivalence, normalize_descriptor, validate_model, EquivalenceTransform, LssModel,
    ModeSystem, SwitchingSignal, ValidationReport, Violation,
};
pub use par::Execution;
