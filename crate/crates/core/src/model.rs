//! Linear switched systems: modes, couplings, switching signals and
//! state-space equivalence.
//!
//! Mode indices are 1-based in every public API. A coupling `K_{i,j}` maps
//! the state of mode `i` at a switch into the state space of mode `j`, so it
//! has shape `n_j × n_i`.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Reciprocal condition number below which a descriptor matrix is singular.
pub const DESCRIPTOR_RCOND_MIN: f64 = 1e-12;

/// One linear subsystem `E ẋ = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub e: Option<DMatrix<f64>>,
}

impl ModeSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Self {
        Self { a, b, c, e: None }
    }

    pub fn with_descriptor(mut self, e: DMatrix<f64>) -> Self {
        self.e = Some(e);
        self
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
}

/// A linear switched system with explicit jump (coupling) maps.
#[derive(Debug, Clone, PartialEq)]
pub struct LssModel {
    pub modes: Vec<ModeSystem>,
    /// Keyed by 1-based `(from, to)`. Missing entries default to the identity
    /// when `n_from == n_to`.
    pub couplings: BTreeMap<(usize, usize), DMatrix<f64>>,
    /// Initial state for the first active mode; zero when absent.
    pub x0: Option<DVector<f64>>,
}

impl LssModel {
    pub fn new(modes: Vec<ModeSystem>) -> Self {
        Self { modes, couplings: BTreeMap::new(), x0: None }
    }

    pub fn with_coupling(mut self, from: usize, to: usize, k: DMatrix<f64>) -> Self {
        self.couplings.insert((from, to), k);
        self
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Mode `q` (1-based).
    pub fn mode(&self, q: usize) -> &ModeSystem {
        &self.modes[q - 1]
    }

    pub fn state_dims(&self) -> Vec<usize> {
        self.modes.iter().map(ModeSystem::n).collect()
    }

    pub fn inputs(&self) -> usize {
        self.modes.first().map_or(0, ModeSystem::m)
    }

    pub fn outputs(&self) -> usize {
        self.modes.first().map_or(0, ModeSystem::p)
    }

    pub fn is_normalized(&self) -> bool {
        self.modes.iter().all(|m| m.e.is_none())
    }

    /// Coupling `K_{from,to}`, resolving the identity default.
    pub fn coupling(&self, from: usize, to: usize) -> Result<Cow<'_, DMatrix<f64>>> {
        let d = self.num_modes();
        if from == 0 || to == 0 || from > d || to > d {
            return Err(Error::InvalidArgument(format!(
                "coupling ({from},{to}) out of range for {d} modes"
            )));
        }
        if let Some(k) = self.couplings.get(&(from, to)) {
            return Ok(Cow::Borrowed(k));
        }
        let (ni, nj) = (self.mode(from).n(), self.mode(to).n());
        if ni == nj {
            Ok(Cow::Owned(DMatrix::identity(nj, ni)))
        } else {
            Err(Error::InvalidModel(format!(
                "no coupling from mode {from} (n={ni}) to mode {to} (n={nj})"
            )))
        }
    }

    /// Dense table `table[from-1][to-1]` of resolved couplings. Diagonal
    /// entries hold the identity of the corresponding mode.
    pub fn coupling_table(&self) -> Result<Vec<Vec<DMatrix<f64>>>> {
        let d = self.num_modes();
        (1..=d)
            .map(|i| {
                (1..=d)
                    .map(|j| {
                        if i == j {
                            Ok(DMatrix::identity(self.mode(i).n(), self.mode(i).n()))
                        } else {
                            self.coupling(i, j).map(Cow::into_owned)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized)
        }
    }

    /// Validate and return `self`, or the first violation as an error.
    pub fn checked(self) -> Result<Self> {
        let report = validate_model(&self);
        match report.violations.first() {
            None => Ok(self),
            Some(v) => Err(Error::InvalidModel(v.to_string())),
        }
    }
}

/// One violated well-formedness constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TooFewModes { found: usize },
    NonSquareA { mode: usize, rows: usize, cols: usize },
    BRows { mode: usize, expected: usize, found: usize },
    CCols { mode: usize, expected: usize, found: usize },
    InputCount { mode: usize, expected: usize, found: usize },
    OutputCount { mode: usize, expected: usize, found: usize },
    DescriptorShape { mode: usize, rows: usize, cols: usize },
    SingularDescriptor { mode: usize, rcond: f64 },
    NonFinite { what: String },
    SelfCoupling { mode: usize },
    CouplingOutOfRange { from: usize, to: usize },
    CouplingShape { from: usize, to: usize, expected: (usize, usize), found: (usize, usize) },
    MissingCoupling { from: usize, to: usize, n_from: usize, n_to: usize },
    InitialStateLength { expected: Vec<usize>, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TooFewModes { found } => write!(f, "at least two modes required, found {found}"),
            NonSquareA { mode, rows, cols } => write!(f, "mode {mode}: A is {rows}x{cols}, not square"),
            BRows { mode, expected, found } => {
                write!(f, "mode {mode}: B has {found} rows, expected {expected}")
            }
            CCols { mode, expected, found } => {
                write!(f, "mode {mode}: C has {found} columns, expected {expected}")
            }
            InputCount { mode, expected, found } => {
                write!(f, "mode {mode}: {found} inputs, other modes have {expected}")
            }
            OutputCount { mode, expected, found } => {
                write!(f, "mode {mode}: {found} outputs, other modes have {expected}")
            }
            DescriptorShape { mode, rows, cols } => {
                write!(f, "mode {mode}: E is {rows}x{cols}, does not match A")
            }
            SingularDescriptor { mode, rcond } => {
                write!(f, "mode {mode}: E is singular (rcond {rcond:.3e})")
            }
            NonFinite { what } => write!(f, "{what} contains non-finite entries"),
            SelfCoupling { mode } => write!(f, "self-coupling ({mode},{mode}) must not be stored"),
            CouplingOutOfRange { from, to } => write!(f, "coupling ({from},{to}) names an unknown mode"),
            CouplingShape { from, to, expected, found } => write!(
                f,
                "K_{{{from},{to}}} is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            MissingCoupling { from, to, n_from, n_to } => write!(
                f,
                "K_{{{from},{to}}} missing and dimensions differ ({n_from} -> {n_to})"
            ),
            InitialStateLength { expected, found } => {
                write!(f, "x0 has length {found}, no mode has that dimension (dims {expected:?})")
            }
        }
    }
}

/// Result of [`validate_model`]; empty iff the model is well-formed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Check every shape and invariant constraint, collecting all violations.
pub fn validate_model(model: &LssModel) -> ValidationReport {
    let mut v = Vec::new();
    let d = model.num_modes();
    if d < 2 {
        v.push(Violation::TooFewModes { found: d });
    }
    let m0 = model.inputs();
    let p0 = model.outputs();
    for (idx, ms) in model.modes.iter().enumerate() {
        let q = idx + 1;
        let (r, c) = ms.a.shape();
        if r != c {
            v.push(Violation::NonSquareA { mode: q, rows: r, cols: c });
        }
        if ms.b.nrows() != r {
            v.push(Violation::BRows { mode: q, expected: r, found: ms.b.nrows() });
        }
        if ms.c.ncols() != r {
            v.push(Violation::CCols { mode: q, expected: r, found: ms.c.ncols() });
        }
        if ms.m() != m0 {
            v.push(Violation::InputCount { mode: q, expected: m0, found: ms.m() });
        }
        if ms.p() != p0 {
            v.push(Violation::OutputCount { mode: q, expected: p0, found: ms.p() });
        }
        for (name, mat) in [("A", &ms.a), ("B", &ms.b), ("C", &ms.c)] {
            if !finite(mat) {
                v.push(Violation::NonFinite { what: format!("mode {q} {name}") });
            }
        }
        if let Some(e) = &ms.e {
            if e.shape() != (r, r) {
                v.push(Violation::DescriptorShape { mode: q, rows: e.nrows(), cols: e.ncols() });
            } else if !finite(e) {
                v.push(Violation::NonFinite { what: format!("mode {q} E") });
            } else {
                let rc = linalg::rcond(e);
                if rc < DESCRIPTOR_RCOND_MIN {
                    v.push(Violation::SingularDescriptor { mode: q, rcond: rc });
                }
            }
        }
    }
    for (&(i, j), k) in &model.couplings {
        if i == j {
            v.push(Violation::SelfCoupling { mode: i });
            continue;
        }
        if i == 0 || j == 0 || i > d || j > d {
            v.push(Violation::CouplingOutOfRange { from: i, to: j });
            continue;
        }
        let expected = (model.mode(j).n(), model.mode(i).n());
        if k.shape() != expected {
            v.push(Violation::CouplingShape { from: i, to: j, expected, found: k.shape() });
        }
        if !finite(k) {
            v.push(Violation::NonFinite { what: format!("K_{{{i},{j}}}") });
        }
    }
    for i in 1..=d {
        for j in 1..=d {
            if i != j && !model.couplings.contains_key(&(i, j)) {
                let (ni, nj) = (model.mode(i).n(), model.mode(j).n());
                if ni != nj {
                    v.push(Violation::MissingCoupling { from: i, to: j, n_from: ni, n_to: nj });
                }
            }
        }
    }
    if let Some(x0) = &model.x0 {
        let dims = model.state_dims();
        if !dims.contains(&x0.len()) {
            v.push(Violation::InitialStateLength { expected: dims, found: x0.len() });
        }
        if x0.iter().any(|x| !x.is_finite()) {
            v.push(Violation::NonFinite { what: "x0".into() });
        }
    }
    ValidationReport { violations: v }
}

fn invert(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if linalg::rcond(m) < DESCRIPTOR_RCOND_MIN {
        return None;
    }
    m.clone().lu().try_inverse()
}

/// Fold descriptor matrices into the dynamics: `Ã = E⁻¹A`, `B̃ = E⁻¹B`,
/// `K̃_{i,j} = E_j⁻¹ K_{i,j}`. Idempotent.
pub fn normalize_descriptor(model: &LssModel) -> Result<LssModel> {
    if model.is_normalized() {
        return Ok(model.clone());
    }
    let mut inverses = Vec::with_capacity(model.num_modes());
    for (idx, ms) in model.modes.iter().enumerate() {
        inverses.push(match &ms.e {
            None => None,
            Some(e) => {
                if e.shape() != ms.a.shape() {
                    return Err(Error::DimensionMismatch(format!(
                        "mode {}: E shape {:?} vs A shape {:?}",
                        idx + 1,
                        e.shape(),
                        ms.a.shape()
                    )));
                }
                match invert(e) {
                    Some(inv) => Some(inv),
                    None => {
                        return Err(Error::SingularDescriptor { mode: idx + 1, rcond: linalg::rcond(e) })
                    }
                }
            }
        });
    }
    let modes = model
        .modes
        .iter()
        .zip(&inverses)
        .map(|(ms, inv)| match inv {
            None => ModeSystem::new(ms.a.clone(), ms.b.clone(), ms.c.clone()),
            Some(ei) => ModeSystem::new(ei * &ms.a, ei * &ms.b, ms.c.clone()),
        })
        .collect();
    let d = model.num_modes();
    let mut couplings = BTreeMap::new();
    for i in 1..=d {
        for j in 1..=d {
            if i == j {
                continue;
            }
            match (&inverses[j - 1], model.couplings.get(&(i, j))) {
                (None, Some(k)) => {
                    couplings.insert((i, j), k.clone());
                }
                (None, None) => {}
                (Some(ej), _) => {
                    let k = model.coupling(i, j)?;
                    couplings.insert((i, j), ej * k.as_ref());
                }
            }
        }
    }
    Ok(LssModel { modes, couplings, x0: model.x0.clone() })
}

/// Per-mode pair `(Z^L_q, Z^R_q)` of invertible matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceTransform {
    pub left: Vec<DMatrix<f64>>,
    pub right: Vec<DMatrix<f64>>,
    similarity: bool,
}

impl EquivalenceTransform {
    /// General equivalence. The transformed model carries `Ē = Z^L E Z^R`.
    pub fn new(left: Vec<DMatrix<f64>>, right: Vec<DMatrix<f64>>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} left factors vs {} right factors",
                left.len(),
                right.len()
            )));
        }
        for (q, (l, r)) in left.iter().zip(&right).enumerate() {
            if !l.is_square() || l.shape() != r.shape() {
                return Err(Error::DimensionMismatch(format!(
                    "mode {}: factors {:?} and {:?}",
                    q + 1,
                    l.shape(),
                    r.shape()
                )));
            }
        }
        Ok(Self { left, right, similarity: false })
    }

    /// Change of state basis `x̄ = S x`, i.e. `Z^L = S`, `Z^R = S⁻¹`.
    pub fn similarity(s: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut right = Vec::with_capacity(s.len());
        for (q, sq) in s.iter().enumerate() {
            if !sq.is_square() {
                return Err(Error::DimensionMismatch(format!("mode {}: S not square", q + 1)));
            }
            right.push(invert(sq).ok_or_else(|| {
                Error::InvalidArgument(format!("mode {}: S is singular", q + 1))
            })?);
        }
        Ok(Self { left: s, right, similarity: true })
    }

    /// Similarity with a known inverse (no inversion performed).
    pub fn similarity_with_inverse(s: Vec<DMatrix<f64>>, s_inv: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut t = Self::new(s, s_inv)?;
        t.similarity = true;
        Ok(t)
    }

    pub fn is_similarity(&self) -> bool {
        self.similarity
    }
}

/// `Ā = Z^L A Z^R`, `B̄ = Z^L B`, `C̄ = C Z^R`, `K̄_{i,j} = Z^L_j K_{i,j} Z^R_i`.
///
/// `x0` is dropped: it lives in the first active mode's coordinates, which
/// the model alone does not determine.
pub fn apply_equivalence(model: &LssModel, t: &EquivalenceTransform) -> Result<LssModel> {
    let d = model.num_modes();
    if t.left.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "transform has {} modes, model has {d}",
            t.left.len()
        )));
    }
    for (q, ms) in model.modes.iter().enumerate() {
        if t.left[q].nrows() != ms.n() {
            return Err(Error::DimensionMismatch(format!(
                "mode {}: transform size {} vs state dimension {}",
                q + 1,
                t.left[q].nrows(),
                ms.n()
            )));
        }
    }
    let modes = model
        .modes
        .iter()
        .enumerate()
        .map(|(q, ms)| {
            let (zl, zr) = (&t.left[q], &t.right[q]);
            let e = match (&ms.e, t.similarity) {
                (None, true) => None,
                (None, false) => Some(zl * zr),
                (Some(e), _) => Some(zl * e * zr),
            };
            ModeSystem { a: zl * &ms.a * zr, b: zl * &ms.b, c: &ms.c * zr, e }
        })
        .collect();
    let mut couplings = BTreeMap::new();
    for i in 1..=d {
        for j in 1..=d {
            if i != j {
                let k = model.coupling(i, j)?;
                couplings.insert((i, j), &t.left[j - 1] * k.as_ref() * &t.right[i - 1]);
            }
        }
    }
    Ok(LssModel { modes, couplings, x0: None })
}

/// Finite sequence of `(mode, duration)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSignal {
    pub events: Vec<(usize, f64)>,
}

impl SwitchingSignal {
    /// Checks positivity of durations and that neighbouring modes differ.
    pub fn new(events: Vec<(usize, f64)>) -> Result<Self> {
        let s = Self { events };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        for (i, &(q, t)) in self.events.iter().enumerate() {
            if q == 0 {
                return Err(Error::InvalidSequence("mode indices are 1-based".into()));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidSequence(format!("duration {t} at position {i}")));
            }
            if i > 0 && self.events[i - 1].0 == q {
                return Err(Error::InvalidSequence(format!("mode {q} repeated at position {i}")));
            }
        }
        Ok(())
    }

    /// Switch instants `T_1 < T_2 < …` (cumulative durations).
    pub fn switch_times(&self) -> Vec<f64> {
        self.events
            .iter()
            .scan(0.0, |acc, &(_, t)| {
                *acc += t;
                Some(*acc)
            })
            .collect()
    }

    pub fn horizon(&self) -> f64 {
        self.events.iter().map(|e| e.1).sum()
    }

    pub fn modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.events.iter().map(|e| e.0)
    }

    /// Shortest duration among intervals that end in a switch. The final
    /// interval is open-ended and does not count.
    pub fn min_dwell(&self) -> f64 {
        let k = self.events.len();
        self.events[..k.saturating_sub(1)]
            .iter()
            .map(|e| e.1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn respects_dwell(&self, mu: f64) -> bool {
        self.min_dwell() >= mu
    }

    /// Random signal with durations uniform on `[min_dwell, max_dwell]`,
    /// each successor drawn uniformly from the other modes. The last
    /// duration is clipped so the signal ends exactly at `horizon`.
    pub fn random_dwell(
        num_modes: usize,
        min_dwell: f64,
        max_dwell: f64,
        horizon: f64,
        seed: u64,
    ) -> Result<Self> {
        if num_modes < 2 {
            return Err(Error::InvalidArgument("need at least two modes".into()));
        }
        if !(min_dwell > 0.0 && max_dwell >= min_dwell && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bad dwell range [{min_dwell}, {max_dwell}] or horizon {horizon}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = rng.random_range(1..=num_modes);
        let mut events = Vec::new();
        let mut t = 0.0;
        loop {
            let dur = if max_dwell > min_dwell {
                rng.random_range(min_dwell..=max_dwell)
            } else {
                min_dwell
            };
            if t + dur >= horizon {
                events.push((q, horizon - t));
                break;
            }
            events.push((q, dur));
            t += dur;
            let mut next = rng.random_range(1..num_modes);
            if next >= q {
                next += 1;
            }
            q = next;
        }
        Ok(Self { events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::three_mode_example;
    use nalgebra::dmatrix;

    fn scalar_mode(a: f64) -> ModeSystem {
        ModeSystem::new(dmatrix![a], dmatrix![1.0], dmatrix![1.0])
    }

    #[test]
    fn bundled_model_is_valid() {
        assert!(validate_model(&three_mode_example()).is_valid());
    }

    #[test]
    fn wrong_coupling_shape_reported_once() {
        let mut m = three_mode_example();
        m.couplings.insert((1, 2), DMatrix::zeros(2, 3));
        let r = validate_model(&m);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::CouplingShape { from: 1, to: 2, .. }));
    }

    #[test]
    fn single_mode_rejected() {
        let m = LssModel::new(vec![scalar_mode(-1.0)]);
        let r = validate_model(&m);
        assert_eq!(r.violations, vec![Violation::TooFewModes { found: 1 }]);
    }

    #[test]
    fn missing_coupling_identity_only_for_equal_dims() {
        let m = LssModel::new(vec![scalar_mode(-1.0), scalar_mode(-2.0)]);
        assert!(validate_model(&m).is_valid());
        assert_eq!(m.coupling(1, 2).unwrap().as_ref(), &dmatrix![1.0]);

        let big = ModeSystem::new(-DMatrix::identity(2, 2), DMatrix::zeros(2, 1), DMatrix::zeros(1, 2));
        let m = LssModel::new(vec![scalar_mode(-1.0), big]);
        let r = validate_model(&m);
        assert_eq!(r.violations.len(), 2);
        assert!(m.coupling(1, 2).is_err());
    }

    #[test]
    fn descriptor_identity_unchanged() {
        let mut m = three_mode_example();
        for ms in &mut m.modes {
            ms.e = Some(DMatrix::identity(3, 3));
        }
        let n = normalize_descriptor(&m).unwrap();
        assert_eq!(n, three_mode_example());
    }

    #[test]
    fn descriptor_scalar_scaling() {
        let mut m = LssModel::new(vec![
            ModeSystem::new(-2.0 * DMatrix::identity(2, 2), DMatrix::from_element(2, 1, 1.0), DMatrix::from_element(1, 2, 1.0))
                .with_descriptor(2.0 * DMatrix::identity(2, 2)),
            ModeSystem::new(-DMatrix::identity(2, 2), DMatrix::from_element(2, 1, 1.0), DMatrix::from_element(1, 2, 1.0)),
        ]);
        m.x0 = Some(DVector::from_vec(vec![1.0, 0.0]));
        let n = normalize_descriptor(&m).unwrap();
        assert_eq!(n.mode(1).a, -DMatrix::identity(2, 2));
        assert!(n.is_normalized());
        // implicit identity coupling into mode 1 becomes E_1^{-1}
        assert_eq!(n.couplings[&(2, 1)], 0.5 * DMatrix::identity(2, 2));
        assert!(!n.couplings.contains_key(&(1, 2)));
        assert_eq!(normalize_descriptor(&n).unwrap(), n);
    }

    #[test]
    fn singular_descriptor_names_mode() {
        let mut m = three_mode_example();
        m.modes[1].e = Some(DMatrix::zeros(3, 3));
        match normalize_descriptor(&m) {
            Err(Error::SingularDescriptor { mode, .. }) => assert_eq!(mode, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_equivalence_is_noop() {
        let m = three_mode_example();
        let t = EquivalenceTransform::similarity(vec![DMatrix::identity(3, 3); 3]).unwrap();
        let mut expected = m.clone();
        expected.x0 = None;
        assert_eq!(apply_equivalence(&m, &t).unwrap(), expected);
    }

    #[test]
    fn equivalence_dimension_checked() {
        let m = three_mode_example();
        let t = EquivalenceTransform::similarity(vec![DMatrix::identity(2, 2); 3]).unwrap();
        assert!(matches!(apply_equivalence(&m, &t), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn signal_invariants() {
        let s = SwitchingSignal::new(vec![(1, 1.0), (3, 0.5), (1, 2.0)]).unwrap();
        assert_eq!(s.switch_times(), vec![1.0, 1.5, 3.5]);
        assert_eq!(s.min_dwell(), 0.5);
        assert!(SwitchingSignal::new(vec![(1, 1.0), (1, 1.0)]).is_err());
        assert!(SwitchingSignal::new(vec![(1, 0.0)]).is_err());
    }

    #[test]
    fn random_signal_respects_dwell() {
        for seed in 0..20 {
            let s = SwitchingSignal::random_dwell(3, 0.5, 1.5, 15.0, seed).unwrap();
            s.check().unwrap();
            assert!(s.respects_dwell(0.5));
            assert!((s.horizon() - 15.0).abs() < 1e-12);
            assert!(s.modes().all(|q| (1..=3).contains(&q)));
        }
        let a = SwitchingSignal::random_dwell(3, 0.5, 1.5, 15.0, 7).unwrap();
        let b = SwitchingSignal::random_dwell(3, 0.5, 1.5, 15.0, 7).unwrap();
        assert_eq!(a, b);
    }
}
