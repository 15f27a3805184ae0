//! JSON instance and report files.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use stoq_core::distances::JointDistribution;
use stoq_core::extension::ExtensionLayout;
use stoq_core::product_value::ProductWitness;
use stoq_core::rounding::{BosonicState, StateRepr};
use stoq_core::tensor::{RealOperator, RegisterLayout};
use stoq_core::verifier::{BranchOverlapVerifier, ReversibleCircuit};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Dense row-major matrix with explicit register dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPayload {
    pub dims: Vec<usize>,
    pub entries: Vec<f64>,
    /// A known nonnegative product witness, one factor per register.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_value: Option<f64>,
}

impl MatrixPayload {
    pub fn from_operator(op: &RealOperator) -> Self {
        Self { dims: op.layout().dims().to_vec(), entries: op.row_major(), witness: None, planted_value: None }
    }

    pub fn to_operator(&self) -> CliResult<RealOperator> {
        let layout = RegisterLayout::new(self.dims.clone())?;
        Ok(RealOperator::from_row_major(layout, &self.entries)?)
    }

    pub fn to_witness(&self) -> CliResult<Option<ProductWitness>> {
        self.witness
            .as_ref()
            .map(|w| ProductWitness::new(w.iter().map(|f| DVector::from_vec(f.clone())).collect()).map_err(Into::into))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionPayload {
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum StateData {
    /// Amplitudes in full extended coordinates.
    Pure { amplitudes: Vec<f64> },
    /// Row-major density matrix in full extended coordinates.
    Mixed { entries: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePayload {
    pub base_dims: Vec<usize>,
    pub copies: Vec<usize>,
    pub state: StateData,
    /// Operator the state is meant to be rounded against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<MatrixPayload>,
}

impl StatePayload {
    pub fn from_state(state: &BosonicState) -> Self {
        let layout = state.layout();
        let data = match state.repr() {
            StateRepr::Pure(v) => StateData::Pure { amplitudes: v.iter().copied().collect() },
            StateRepr::Mixed(rho) => StateData::Mixed { entries: row_major(rho) },
        };
        Self { base_dims: layout.base_dims().to_vec(), copies: layout.copies().to_vec(), state: data, operator: None }
    }

    pub fn to_state(&self) -> CliResult<BosonicState> {
        let layout = ExtensionLayout::new(self.base_dims.clone(), self.copies.clone())?;
        match &self.state {
            StateData::Pure { amplitudes } => Ok(BosonicState::pure(layout, DVector::from_vec(amplitudes.clone()))?),
            StateData::Mixed { entries } => {
                let n = (entries.len() as f64).sqrt().round() as usize;
                if n * n != entries.len() {
                    return Err(CliError::Invalid(format!("{} entries do not form a square matrix", entries.len())));
                }
                Ok(BosonicState::mixed(layout, DMatrix::from_row_slice(n, n, entries))?)
            }
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Payload {
    Verifier(BranchOverlapVerifier),
    Matrix(MatrixPayload),
    Distribution(DistributionPayload),
    BosonicState(StatePayload),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Verifier(_) => "verifier",
            Payload::Matrix(_) => "matrix",
            Payload::Distribution(_) => "distribution",
            Payload::BosonicState(_) => "bosonic-state",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: String,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub payload: Payload,
    pub metadata: Metadata,
}

impl InstanceFile {
    pub fn new(payload: Payload, metadata: Metadata) -> Self {
        Self { format_version: FORMAT_VERSION, payload, metadata }
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates an instance.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let file: Self = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_text(path, &self.to_json()?)
    }

    /// Rebuilds every payload through the checked constructors.
    pub fn validate(&self) -> CliResult<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Version(self.format_version));
        }
        match &self.payload {
            Payload::Verifier(v) => {
                self.verifier_checked(v)?;
            }
            Payload::Matrix(m) => {
                m.to_operator()?;
                m.to_witness()?;
            }
            Payload::Distribution(d) => {
                JointDistribution::new(RegisterLayout::new(d.dims.clone())?, d.probs.clone())?;
            }
            Payload::BosonicState(s) => {
                s.to_state()?;
                if let Some(op) = &s.operator {
                    op.to_operator()?;
                }
            }
        }
        Ok(())
    }

    fn verifier_checked(&self, v: &BranchOverlapVerifier) -> CliResult<BranchOverlapVerifier> {
        let circuit = ReversibleCircuit::new(v.circuit().num_bits(), v.circuit().gates().to_vec())?;
        Ok(BranchOverlapVerifier::new(v.witness_registers().to_vec(), v.ancilla(), circuit)?)
    }

    pub fn as_verifier(&self) -> Option<&BranchOverlapVerifier> {
        match &self.payload {
            Payload::Verifier(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&MatrixPayload> {
        match &self.payload {
            Payload::Matrix(m) => Some(m),
            _ => None,
        }
    }

    /// The operator an instance describes: the matrix itself, or a
    /// verifier's acceptance matrix.
    pub fn operator(&self) -> CliResult<RealOperator> {
        match &self.payload {
            Payload::Matrix(m) => m.to_operator(),
            Payload::Verifier(v) => Ok(stoq_core::verifier::acceptance_matrix(v)?),
            Payload::BosonicState(StatePayload { operator: Some(m), .. }) => m.to_operator(),
            other => Err(CliError::Invalid(format!("a {} instance does not describe an operator", other.kind()))),
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// One checked inequality `measured ≤ bound` (or `≥`), with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The property the check exercises.
    pub anchor: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl CheckRecord {
    /// `measured ≤ bound + tolerance`.
    pub fn at_most(name: impl Into<String>, anchor: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            relation: Relation::AtMost,
            bound,
            tolerance,
            pass: measured <= bound + tolerance,
            values: BTreeMap::new(),
        }
    }

    /// `measured ≥ bound − tolerance`.
    pub fn at_least(name: impl Into<String>, anchor: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            relation: Relation::AtLeast,
            bound,
            tolerance,
            pass: measured >= bound - tolerance,
            values: BTreeMap::new(),
        }
    }

    /// `|measured − expected| ≤ tolerance`, stored as `|difference| ≤ 0`.
    pub fn close(name: impl Into<String>, anchor: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let mut r = Self::at_most(name, anchor, (measured - expected).abs(), 0.0, tolerance);
        r.values.insert("value".into(), measured);
        r.values.insert("expected".into(), expected);
        r
    }

    pub fn with_value(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub suite: String,
    pub seed: u64,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl ReportFile {
    /// Sorts records by name (stable) and tallies them.
    pub fn new(suite: impl Into<String>, seed: u64, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = records.iter().filter(|r| r.pass).count();
        Self {
            format_version: FORMAT_VERSION,
            suite: suite.into(),
            seed,
            summary: Summary { total: records.len(), passed, failed: records.len() - passed },
            records,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_relations() {
        assert!(CheckRecord::at_most("a", "", 1.0, 1.0, 0.0).pass);
        assert!(!CheckRecord::at_most("a", "", 1.1, 1.0, 0.05).pass);
        assert!(CheckRecord::at_least("a", "", 0.99, 1.0, 0.02).pass);
        assert!(CheckRecord::close("a", "", 0.5, 0.5 + 1e-13, 1e-12).pass);
    }

    #[test]
    fn report_sorted_and_counted() {
        let r = ReportFile::new(
            "s",
            0,
            vec![CheckRecord::at_most("b", "", 2.0, 1.0, 0.0), CheckRecord::at_most("a", "", 0.0, 1.0, 0.0)],
        );
        assert_eq!(r.records[0].name, "a");
        assert_eq!(r.summary, Summary { total: 2, passed: 1, failed: 1 });
        assert!(!r.passed());
        assert_eq!(ReportFile::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn version_rejected() {
        let text = r#"{"format_version":9,"kind":"distribution","payload":{"dims":[2],"probs":[0.5,0.5]},"metadata":{}}"#;
        assert!(matches!(InstanceFile::from_json(text), Err(CliError::Version(9))));
    }
}
