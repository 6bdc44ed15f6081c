//! Problem and report files: a JSON schema for describing one inequality
//! instance plus a state, and the report wrapper emitted by the CLI.
//!
//! Complex entries are two-element arrays `[re, im]`; matrices are row-major.

use crate::bell::{
    BellError, BellInstance, InequalityReport, ScanReport, SearchReport, TracePoint,
};
use crate::forms::GroupingTree;
use crate::hypercomplex::StructureTable;
use crate::quantum::{
    ghz_state, identity, pauli_x, pauli_y, pauli_z, phi_plus, singlet, CMatrix, CVector,
    HermitianOperator, QuantumState, SiteObservables,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Row-major complex matrix, each entry `[re, im]`.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
}

fn invalid(context: impl Into<String>, message: impl std::fmt::Display) -> ProblemError {
    ProblemError::Invalid { context: context.into(), message: message.to_string() }
}

/// One observable: either a fixture name or an explicit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(String),
    Matrix(MatrixData),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSpec {
    pub dim: usize,
    pub observables: Vec<ObservableSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTermSpec {
    pub weight: f64,
    pub factors: Vec<MatrixData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    Named { name: String },
    Pure { vector: Vec<[f64; 2]> },
    Density { matrix: MatrixData },
    Separable { terms: Vec<SeparableTermSpec> },
}

/// The on-disk description of one inequality instance plus a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    /// Algebra dimension; defaults to the convention's dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra: Option<usize>,
    /// Structure-table convention name; defaults per algebra dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    /// Grouping string such as `((1 2) 3)`; defaults to the left fold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grouping: Option<String>,
    pub sites: Vec<SiteSpec>,
    pub state: StateSpec,
}

pub fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_data(data: &MatrixData, context: &str) -> Result<CMatrix, ProblemError> {
    let rows = data.len();
    if rows == 0 {
        return Err(invalid(context, "matrix has no rows"));
    }
    for (r, row) in data.iter().enumerate() {
        if row.len() != rows {
            return Err(invalid(
                context,
                format!("row {} has {} entries, expected {rows}", r + 1, row.len()),
            ));
        }
    }
    Ok(CMatrix::from_fn(rows, rows, |r, c| Complex64::new(data[r][c][0], data[r][c][1])))
}

pub fn vector_to_data(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn named_observable(name: &str, dim: usize, context: &str) -> Result<HermitianOperator, ProblemError> {
    let op = match name {
        "pauli_x" => pauli_x(),
        "pauli_y" => pauli_y(),
        "pauli_z" => pauli_z(),
        "identity" => identity(dim),
        "zero" => HermitianOperator::zero(dim),
        other => return Err(invalid(context, format!("unknown observable name `{other}`"))),
    };
    if op.dim() != dim {
        return Err(invalid(
            context,
            format!("observable `{name}` has dimension {}, site has {dim}", op.dim()),
        ));
    }
    Ok(op)
}

fn named_state(name: &str, sites: usize, global_dim: usize) -> Result<QuantumState, ProblemError> {
    let context = format!("state `{name}`");
    let state = match name {
        "ghz" => ghz_state(sites),
        "phi+" => phi_plus(),
        "singlet" => singlet(),
        other => return Err(invalid(&context, format!("unknown named state `{other}`"))),
    };
    if state.dim() != global_dim {
        return Err(invalid(
            &context,
            format!("state dimension {} does not match global dimension {global_dim}", state.dim()),
        ));
    }
    Ok(state)
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ProblemError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text)
            .map_err(|source| ProblemError::Json { path: path.display().to_string(), source })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    /// Resolves the structure table from the `algebra` / `convention` pair.
    pub fn resolve_table(&self) -> Result<StructureTable, ProblemError> {
        let table = match (&self.convention, self.algebra) {
            (Some(name), _) => StructureTable::builtin(name)
                .map_err(|e| invalid("convention", e))?,
            (None, Some(dim)) => StructureTable::default_for_dim(dim)
                .map_err(|e| invalid("algebra", e))?,
            (None, None) => return Err(invalid("problem", "one of `algebra` or `convention` is required")),
        };
        if let Some(dim) = self.algebra {
            if dim != table.dim() {
                return Err(invalid(
                    "algebra",
                    format!("algebra dimension {dim} conflicts with convention `{}` (dimension {})",
                        table.name(), table.dim()),
                ));
            }
        }
        Ok(table)
    }

    /// Validates and builds the instance and state this file describes.
    pub fn build(&self) -> Result<(BellInstance, QuantumState), ProblemError> {
        let table = self.resolve_table()?;
        let k = table.dim();
        if self.sites.is_empty() {
            return Err(invalid("sites", "at least one site is required"));
        }
        let mut sites = Vec::with_capacity(self.sites.len());
        for (m, spec) in self.sites.iter().enumerate() {
            let site_context = format!("site {}", m + 1);
            if spec.observables.len() != k {
                return Err(invalid(
                    &site_context,
                    format!("{} observables given, algebra dimension {k} requires {k}", spec.observables.len()),
                ));
            }
            let mut observables = Vec::with_capacity(k);
            for (l, obs) in spec.observables.iter().enumerate() {
                let context = format!("site {}, observable {}", m + 1, l + 1);
                let op = match obs {
                    ObservableSpec::Named(name) => named_observable(name, spec.dim, &context)?,
                    ObservableSpec::Matrix(data) => {
                        let matrix = matrix_from_data(data, &context)?;
                        if matrix.nrows() != spec.dim {
                            return Err(invalid(
                                &context,
                                format!("matrix dimension {} does not match site dimension {}", matrix.nrows(), spec.dim),
                            ));
                        }
                        HermitianOperator::new(matrix).map_err(|e| invalid(&context, e))?
                    }
                };
                observables.push(op);
            }
            sites.push(SiteObservables::new(observables, k).map_err(|e| invalid(&site_context, e))?);
        }

        let n = sites.len();
        let grouping = match &self.grouping {
            Some(text) => {
                let tree = GroupingTree::parse(text).map_err(|e| invalid("grouping", e))?;
                if tree.leaf_count() != n {
                    return Err(invalid(
                        "grouping",
                        format!("grouping leaf count {} != {n}", tree.leaf_count()),
                    ));
                }
                tree
            }
            None => left_fold_grouping(n),
        };

        let global_dim: usize = sites.iter().map(SiteObservables::site_dim).product();
        let state = match &self.state {
            StateSpec::Named { name } => named_state(name, n, global_dim)?,
            StateSpec::Pure { vector } => {
                let psi = CVector::from_iterator(
                    vector.len(),
                    vector.iter().map(|[re, im]| Complex64::new(*re, *im)),
                );
                if psi.len() != global_dim {
                    return Err(invalid(
                        "state",
                        format!("vector length {} does not match global dimension {global_dim}", psi.len()),
                    ));
                }
                QuantumState::pure(psi).map_err(|e| invalid("state", e))?
            }
            StateSpec::Density { matrix } => {
                let rho = matrix_from_data(matrix, "state")?;
                if rho.nrows() != global_dim {
                    return Err(invalid(
                        "state",
                        format!("density dimension {} does not match global dimension {global_dim}", rho.nrows()),
                    ));
                }
                QuantumState::density(rho).map_err(|e| invalid("state", e))?
            }
            StateSpec::Separable { terms } => {
                let mut parsed = Vec::with_capacity(terms.len());
                for (j, term) in terms.iter().enumerate() {
                    let context = format!("state, term {}", j + 1);
                    if term.factors.len() != n {
                        return Err(invalid(
                            &context,
                            format!("{} factors given for {n} sites", term.factors.len()),
                        ));
                    }
                    let factors = term
                        .factors
                        .iter()
                        .map(|f| matrix_from_data(f, &context))
                        .collect::<Result<Vec<_>, _>>()?;
                    parsed.push((term.weight, factors));
                }
                let ensemble = crate::quantum::SeparableEnsemble::new(parsed)
                    .map_err(|e| invalid("state", e))?;
                let rho = ensemble.assemble().map_err(|e| invalid("state", e))?;
                QuantumState::density(rho).map_err(|e| invalid("state", e))?
            }
        };
        if state.dim() != global_dim {
            return Err(invalid(
                "state",
                format!("state dimension {} does not match global dimension {global_dim}", state.dim()),
            ));
        }

        let instance = BellInstance::new(table, sites, grouping)
            .map_err(|e: BellError| invalid("problem", e))?;
        Ok((instance, state))
    }
}

/// The default grouping `((...(1 2) 3) ... n)`.
pub fn left_fold_grouping(n: usize) -> GroupingTree {
    let mut tree = GroupingTree::Leaf(1);
    for site in 2..=n {
        tree = GroupingTree::Node(Box::new(tree), Box::new(GroupingTree::Leaf(site)));
    }
    tree
}

/// Serializable snapshot of a search result: the best observables, state and
/// report together with the optimizer trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReportData {
    pub best: InequalityReport,
    pub best_sites: Vec<SiteSpec>,
    pub best_state: Vec<[f64; 2]>,
    pub trace: Vec<TracePoint>,
    pub restarts: usize,
    pub seed: u64,
}

impl SearchReportData {
    pub fn from_report(report: &SearchReport) -> Self {
        let best_sites = report
            .best_instance
            .sites()
            .iter()
            .map(|site| SiteSpec {
                dim: site.site_dim(),
                observables: site
                    .observables()
                    .iter()
                    .map(|op| ObservableSpec::Matrix(matrix_to_data(op.matrix())))
                    .collect(),
            })
            .collect();
        let best_state = match &report.best_state {
            QuantumState::Pure(psi) => vector_to_data(psi),
            QuantumState::Density(rho) => {
                // Search states are always pure; fall back to the leading row.
                matrix_to_data(rho).into_iter().next().unwrap_or_default()
            }
        };
        SearchReportData {
            best: report.best.clone(),
            best_sites,
            best_state,
            trace: report.trace.clone(),
            restarts: report.restarts,
            seed: report.seed,
        }
    }
}

/// Payload of a report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReportBody {
    Evaluate(InequalityReport),
    Scan(ScanReport),
    Search(SearchReportData),
}

/// The emitted report file: input echo (hash), seed, version and payload.
/// Re-running with the same inputs reproduces the file byte-for-byte apart
/// from the `timestamp` field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub toolkit_version: String,
    pub timestamp: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub body: ReportBody,
}
