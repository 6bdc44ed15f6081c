//! Assembly and evaluation of the inequalities: global form operators `X_s`,
//! the bound operator `(x)_m F_m`, separable-state scans and a
//! derivative-free violation search.

use crate::forms::{build_forms, grouped_product, FormsError, GroupingTree};
use crate::hypercomplex::{AlgebraError, StructureTable};
use crate::quantum::{
    expectation, hypercomplex_expectation, sample_separable, tensor_product,
    CMatrix, CVector, HermitianOperator, QuantumError, QuantumState, SiteObservables,
    MAX_GLOBAL_DIM,
};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for declaring a scan sample violated; guards float
/// noise so a separable scan never false-positives.
pub const SCAN_TOL: f64 = 1e-9;
/// Tolerance for declaring a search success.
pub const SEARCH_TOL: f64 = 1e-6;
/// Below this right-hand side the ratio is reported as undefined.
pub const RHS_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BellError {
    #[error("grouping has {grouping} leaves but the instance has {sites} sites")]
    GroupingMismatch { grouping: usize, sites: usize },
    #[error("site {site} has {got} observables, the algebra requires {expected}")]
    SiteArity { site: usize, got: usize, expected: usize },
    #[error("global dimension {0} exceeds the supported cap {MAX_GLOBAL_DIM}")]
    DimensionCap(usize),
    #[error("expected {expected} per-site states, got {got}")]
    SiteStateCount { got: usize, expected: usize },
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One fully specified inequality: an algebra convention, `K` observables on
/// each of `n` sites and a product grouping.
#[derive(Debug, Clone)]
pub struct BellInstance {
    table: StructureTable,
    sites: Vec<SiteObservables>,
    grouping: GroupingTree,
}

impl BellInstance {
    pub fn new(
        table: StructureTable,
        sites: Vec<SiteObservables>,
        grouping: GroupingTree,
    ) -> Result<Self, BellError> {
        if grouping.leaf_count() != sites.len() {
            return Err(BellError::GroupingMismatch {
                grouping: grouping.leaf_count(),
                sites: sites.len(),
            });
        }
        for (m, site) in sites.iter().enumerate() {
            if site.algebra_dim() != table.dim() {
                return Err(BellError::SiteArity {
                    site: m + 1,
                    got: site.algebra_dim(),
                    expected: table.dim(),
                });
            }
        }
        let global_dim: usize = sites.iter().map(SiteObservables::site_dim).product();
        if global_dim > MAX_GLOBAL_DIM {
            return Err(BellError::DimensionCap(global_dim));
        }
        Ok(BellInstance { table, sites, grouping })
    }

    pub fn table(&self) -> &StructureTable {
        &self.table
    }

    pub fn sites(&self) -> &[SiteObservables] {
        &self.sites
    }

    pub fn grouping(&self) -> &GroupingTree {
        &self.grouping
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn global_dim(&self) -> usize {
        self.sites.iter().map(SiteObservables::site_dim).product()
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(SiteObservables::site_dim).collect()
    }

    /// The `K` global Hermitian form operators `X_s`: each component tuple of
    /// the coefficient tensor contributes one signed tensor product of
    /// per-site observables.
    pub fn build_global_operators(&self) -> Result<Vec<HermitianOperator>, BellError> {
        let tensor = build_forms(&self.table, self.sites.len(), &self.grouping)?;
        let dim = self.global_dim();
        let mut accumulators = vec![CMatrix::zeros(dim, dim); self.table.dim()];
        for (tuple, unit) in tensor.iter() {
            let factors: Vec<CMatrix> = tuple
                .iter()
                .enumerate()
                .map(|(m, &l)| self.sites[m].observables()[l].matrix().clone())
                .collect();
            let product = tensor_product(&factors)?;
            accumulators[unit.index] += product * Complex64::new(f64::from(unit.sign), 0.0);
        }
        accumulators
            .into_iter()
            .map(|m| HermitianOperator::new(m).map_err(BellError::from))
            .collect()
    }

    /// The right-hand-side operator `(x)_m F_m` with `F_m` the per-site sum
    /// of squared observables. The factors act on distinct sites, so the
    /// product needs no grouping.
    pub fn global_bound_operator(&self) -> Result<HermitianOperator, BellError> {
        let factors: Vec<CMatrix> = self
            .sites
            .iter()
            .map(|s| s.local_bound_operator().matrix().clone())
            .collect();
        Ok(HermitianOperator::new(tensor_product(&factors)?)?)
    }

    /// Evaluates both sides of the inequality on a state.
    pub fn evaluate(&self, state: &QuantumState, tol: f64) -> Result<InequalityReport, BellError> {
        let operators = self.build_global_operators()?;
        let bound = self.global_bound_operator()?;
        self.evaluate_with(&operators, &bound, state, tol)
    }

    /// Like [`BellInstance::evaluate`] but reuses prebuilt operators; used by
    /// scans that evaluate many states against one instance.
    pub fn evaluate_with(
        &self,
        operators: &[HermitianOperator],
        bound: &HermitianOperator,
        state: &QuantumState,
        tol: f64,
    ) -> Result<InequalityReport, BellError> {
        let mut form_expectations = Vec::with_capacity(operators.len());
        for op in operators {
            form_expectations.push(expectation(op, state)?);
        }
        let lhs: f64 = form_expectations.iter().map(|x| x * x).sum();
        let rhs = expectation(bound, state)?;
        let ratio = if rhs < RHS_FLOOR { None } else { Some(lhs / rhs) };
        let violated = matches!(ratio, Some(r) if r > 1.0 + tol);
        Ok(InequalityReport {
            form_expectations,
            lhs,
            rhs,
            ratio,
            violated,
            grouping: self.grouping.label(),
            convention: self.table.name().to_string(),
        })
    }

    /// Left-hand side on a completely factorizable state, computed through
    /// the per-site hypercomplex averages: the grouped product of the `<q_m>`
    /// values, squared norm.
    pub fn factorized_evaluate(&self, site_states: &[QuantumState]) -> Result<f64, BellError> {
        if site_states.len() != self.sites.len() {
            return Err(BellError::SiteStateCount {
                got: site_states.len(),
                expected: self.sites.len(),
            });
        }
        let averages = self
            .sites
            .iter()
            .zip(site_states)
            .map(|(site, state)| hypercomplex_expectation(site, state))
            .collect::<Result<Vec<_>, _>>()?;
        let product = grouped_product(&self.table, &averages, &self.grouping)?;
        Ok(product.norm_squared())
    }

    /// Draws `samples` random separable states and evaluates each; the max
    /// ratio must stay at or below 1 for the inequality to hold. Samples run
    /// in parallel with seeds derived as `base_seed + index`, so the report
    /// is schedule-independent.
    pub fn separable_scan(
        &self,
        samples: usize,
        rank: usize,
        base_seed: u64,
    ) -> Result<ScanReport, BellError> {
        let operators = self.build_global_operators()?;
        let bound = self.global_bound_operator()?;
        let site_dims = self.site_dims();
        let ratios: Vec<Option<f64>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let seed = base_seed + i as u64;
                let (_, state) = sample_separable(&site_dims, rank, seed)?;
                let report = self.evaluate_with(&operators, &bound, &state, SCAN_TOL)?;
                Ok(report.ratio)
            })
            .collect::<Result<_, BellError>>()?;
        let mut max_ratio = f64::NEG_INFINITY;
        let mut argmax_seed = base_seed;
        let mut undefined = 0usize;
        let mut histogram = vec![0u64; ScanReport::BINS];
        for (i, ratio) in ratios.iter().enumerate() {
            match ratio {
                Some(r) => {
                    if *r > max_ratio {
                        max_ratio = *r;
                        argmax_seed = base_seed + i as u64;
                    }
                    let bin = ((r / ScanReport::BIN_WIDTH) as usize).min(ScanReport::BINS - 1);
                    histogram[bin] += 1;
                }
                None => undefined += 1,
            }
        }
        Ok(ScanReport {
            samples,
            rank,
            base_seed,
            max_ratio,
            argmax_seed,
            undefined_count: undefined,
            histogram,
        })
    }
}

/// LHS/RHS/ratio/verdict for one (observables, state, grouping, convention)
/// instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    /// The `K` expectations `<X_s>`.
    pub form_expectations: Vec<f64>,
    /// `sum_s <X_s>^2`.
    pub lhs: f64,
    /// `<(x)_m F_m>`.
    pub rhs: f64,
    /// `lhs / rhs`, or `None` when `rhs` is below [`RHS_FLOOR`].
    pub ratio: Option<f64>,
    pub violated: bool,
    pub grouping: String,
    pub convention: String,
}

/// Result of a separable Monte-Carlo scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub samples: usize,
    pub rank: usize,
    pub base_seed: u64,
    pub max_ratio: f64,
    pub argmax_seed: u64,
    pub undefined_count: usize,
    /// Ratio histogram over `[0, BINS * BIN_WIDTH)`, overflow in the last bin.
    pub histogram: Vec<u64>,
}

impl ScanReport {
    pub const BINS: usize = 12;
    pub const BIN_WIDTH: f64 = 0.1;
}

/// Shape of the search problem: a convention, site dimensions and a grouping.
#[derive(Debug, Clone)]
pub struct SearchTemplate {
    pub table: StructureTable,
    pub site_dims: Vec<usize>,
    pub grouping: GroupingTree,
}

/// Knobs for the stochastic hill-climbing search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub iterations: usize,
    /// Initial Gaussian step scale.
    pub initial_step: f64,
    /// Final step scale; the schedule decays geometrically between the two.
    pub final_step: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 20,
            iterations: 500,
            initial_step: 0.5,
            final_step: 0.01,
            seed: 0,
        }
    }
}

/// One point of the optimizer trace: iteration index and best ratio so far.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TracePoint {
    pub restart: usize,
    pub iteration: usize,
    pub ratio: f64,
}

/// Best configuration found by [`violation_search`].
#[derive(Debug, Clone)]
pub struct SearchReport {
    pub best: InequalityReport,
    pub best_instance: BellInstance,
    pub best_state: QuantumState,
    pub trace: Vec<TracePoint>,
    pub restarts: usize,
    pub seed: u64,
}

/// Flat real parameter vector: one Hermitian-basis coefficient block per
/// observable, then the real and imaginary parts of the global state vector.
struct SearchSpace {
    template: SearchTemplate,
    global_dim: usize,
}

impl SearchSpace {
    fn new(template: SearchTemplate) -> Result<Self, BellError> {
        let global_dim: usize = template.site_dims.iter().product();
        if global_dim > MAX_GLOBAL_DIM {
            return Err(BellError::DimensionCap(global_dim));
        }
        Ok(SearchSpace { template, global_dim })
    }

    fn param_count(&self) -> usize {
        let k = self.template.table.dim();
        let observable_params: usize = self.template.site_dims.iter().map(|d| k * d * d).sum();
        observable_params + 2 * self.global_dim
    }

    fn decode(&self, params: &[f64]) -> Result<(BellInstance, QuantumState), BellError> {
        let k = self.template.table.dim();
        let mut offset = 0;
        let mut sites = Vec::with_capacity(self.template.site_dims.len());
        for &d in &self.template.site_dims {
            let mut observables = Vec::with_capacity(k);
            for _ in 0..k {
                let block = &params[offset..offset + d * d];
                offset += d * d;
                observables.push(hermitian_from_params(d, block));
            }
            sites.push(SiteObservables::new(observables, k)?);
        }
        let instance =
            BellInstance::new(self.template.table.clone(), sites, self.template.grouping.clone())?;
        let mut psi = CVector::from_fn(self.global_dim, |i, _| {
            Complex64::new(params[offset + 2 * i], params[offset + 2 * i + 1])
        });
        let norm = psi.norm();
        if norm < 1e-12 {
            psi[0] = Complex64::new(1.0, 0.0);
        } else {
            psi /= Complex64::new(norm, 0.0);
        }
        Ok((instance, QuantumState::Pure(psi)))
    }

    fn objective(&self, params: &[f64]) -> f64 {
        match self.decode(params) {
            Ok((instance, state)) => match instance.evaluate(&state, SEARCH_TOL) {
                Ok(report) => report.ratio.unwrap_or(0.0),
                Err(_) => 0.0,
            },
            Err(_) => 0.0,
        }
    }
}

/// Builds a Hermitian matrix from `d*d` real parameters: `d` diagonal values,
/// then a real and an imaginary part per upper-triangle entry.
fn hermitian_from_params(d: usize, params: &[f64]) -> HermitianOperator {
    let mut m = CMatrix::zeros(d, d);
    let mut offset = 0;
    for i in 0..d {
        m[(i, i)] = Complex64::new(params[offset], 0.0);
        offset += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let entry = Complex64::new(params[offset], params[offset + 1]);
            offset += 2;
            m[(i, j)] = entry;
            m[(j, i)] = entry.conj();
        }
    }
    HermitianOperator::new(m).expect("construction is Hermitian")
}

/// Multi-restart stochastic hill climbing over observables and a global pure
/// state: Gaussian perturbations with a geometrically decaying step scale,
/// accepted on improvement. Restarts run in parallel with derived seeds and
/// are merged by index, so the result is reproducible per seed.
pub fn violation_search(
    template: &SearchTemplate,
    config: &SearchConfig,
) -> Result<SearchReport, BellError> {
    let space = SearchSpace::new(template.clone())?;
    let decay = if config.iterations > 1 {
        (config.final_step / config.initial_step).powf(1.0 / (config.iterations as f64 - 1.0))
    } else {
        1.0
    };

    let results: Vec<(f64, Vec<f64>, Vec<TracePoint>)> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed + restart as u64);
            let mut current: Vec<f64> =
                (0..space.param_count()).map(|_| rng.sample(StandardNormal)).collect();
            let mut current_value = space.objective(&current);
            let mut trace = vec![TracePoint { restart, iteration: 0, ratio: current_value }];
            let mut step = config.initial_step;
            for iteration in 0..config.iterations {
                let candidate: Vec<f64> = current
                    .iter()
                    .map(|&x| x + step * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let value = space.objective(&candidate);
                if value > current_value {
                    current = candidate;
                    current_value = value;
                    trace.push(TracePoint { restart, iteration: iteration + 1, ratio: value });
                }
                step *= decay;
            }
            (current_value, current, trace)
        })
        .collect();

    let mut trace = Vec::new();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_params: Option<&Vec<f64>> = None;
    for (value, params, restart_trace) in &results {
        trace.extend_from_slice(restart_trace);
        if *value > best_value {
            best_value = *value;
            best_params = Some(params);
        }
    }
    let best_params = best_params.expect("at least one restart");
    let (best_instance, best_state) = space.decode(best_params)?;
    let best = best_instance.evaluate(&best_state, SEARCH_TOL)?;
    Ok(SearchReport {
        best,
        best_instance,
        best_state,
        trace,
        restarts: config.restarts,
        seed: config.seed,
    })
}

/// A convenience instance: `K = 2` with Pauli X and Y on each of `n` qubit
/// sites. The GHZ state violates this inequality for `n = 3`.
pub fn pauli_xy_instance(n: usize, grouping: GroupingTree) -> Result<BellInstance, BellError> {
    use crate::quantum::{pauli_x, pauli_y};
    let sites = (0..n)
        .map(|_| SiteObservables::new(vec![pauli_x(), pauli_y()], 2))
        .collect::<Result<Vec<_>, _>>()?;
    BellInstance::new(StructureTable::complex(), sites, grouping)
}
