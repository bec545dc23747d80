//! End-to-end blind extraction and the benchmark harness.
//!
//! The extraction runs sample covariance -> top-r eigenvectors -> solver ->
//! partition recovery. The benchmark samples planted instances, draws
//! signals through configurable filters at several sample sizes, runs every
//! configured solver, and writes per-trial plus aggregate CSV tables. All
//! randomness flows from one experiment seed through per-(trial, filter, m,
//! solver) substreams, so runs are byte-reproducible.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eep::{generate_planted_eep, PlantedInstance};
use crate::error::{Error, Result};
use crate::filters::{filter_matrix_from_eig, GraphFilter};
use crate::graph::Graph;
use crate::metrics::{evaluate, EvalReport};
use crate::partition::{partition_from_indicator, IndicatorMatrix, Partition};
use crate::seeding;
use crate::signals::{sample_covariance, sample_observations, SignalBatch};
use crate::solvers::{solve_with_seed, ProblemInstance, SolverConfig, SolverResult};
use crate::spectral::{eig_sym, structural_basis, top_r, TopREigenspace};

const TAG_INSTANCE: u64 = 0x11;
const TAG_SIGNALS: u64 = 0x22;
const TAG_SOLVER: u64 = 0x33;

/// Reference data for scoring an extraction.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub partition: Partition,
    /// Structural eigenvectors of the Laplacian, one column per cell.
    pub structural_vectors: Array2<f64>,
}

impl GroundTruth {
    pub fn from_graph(graph: &Graph, partition: &Partition) -> Result<Self> {
        let (structural_vectors, _) = structural_basis(graph, partition)?;
        Ok(Self {
            partition: partition.clone(),
            structural_vectors,
        })
    }

    pub fn from_instance(inst: &PlantedInstance) -> Result<Self> {
        Self::from_graph(&inst.graph, &inst.truth)
    }
}

/// Result of one blind extraction.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub indicator: IndicatorMatrix,
    pub partition: Partition,
    pub solver: SolverResult,
    pub top: TopREigenspace,
    /// Set when the eigengap at the r/(r+1) boundary is below 1e-12, where
    /// the chosen eigenspace is numerically ambiguous.
    pub eigengap_warning: bool,
    pub report: Option<EvalReport>,
}

/// Run the extraction from an already-formed covariance matrix. The
/// covariance may be the exact one (the infinite-sample surrogate) or any
/// symmetric estimate.
pub fn extract_from_covariance(
    covariance: &Array2<f64>,
    r: usize,
    solver_cfg: &SolverConfig,
    seed_override: Option<u64>,
    truth: Option<&GroundTruth>,
) -> Result<Extraction> {
    let n = covariance.nrows();
    if r >= n {
        return Err(Error::DimensionMismatch(format!(
            "extraction needs r < n, got r = {r}, n = {n}"
        )));
    }
    let dec = eig_sym(covariance)?;
    let top = top_r(&dec, r)?;
    let eigengap_warning = top.gap().abs() < 1e-12;
    let inst = ProblemInstance::new(top.vectors.clone())?;
    let solver = solve_with_seed(&inst, solver_cfg, seed_override)?;
    let partition = partition_from_indicator(solver.h_hat.binary())?;
    let report = match truth {
        Some(t) => Some(evaluate(&partition, &t.partition, &t.structural_vectors)?),
        None => None,
    };
    Ok(Extraction {
        indicator: solver.h_hat.clone(),
        partition,
        solver,
        top,
        eigengap_warning,
        report,
    })
}

/// Blind EEP extraction from observed signals: sample covariance, top-r
/// eigenvectors, solver, indicator-to-partition recovery.
pub fn be_eeps(
    batch: &SignalBatch,
    r: usize,
    solver_cfg: &SolverConfig,
    truth: Option<&GroundTruth>,
) -> Result<Extraction> {
    let est = sample_covariance(batch);
    extract_from_covariance(&est.matrix, r, solver_cfg, None, truth)
}

/// A filter spec as it appears in experiment configs. With `per_dmax`, the
/// heat `sigma` or IIR `alpha` is divided by the instance's maximum degree
/// at resolution time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(flatten)]
    pub filter: GraphFilter,
    #[serde(default)]
    pub per_dmax: bool,
}

impl FilterSpec {
    pub fn fixed(filter: GraphFilter) -> Self {
        Self {
            filter,
            per_dmax: false,
        }
    }

    /// Heat filter with `sigma = numerator / D_max` (strong low pass).
    pub fn heat_per_dmax(numerator: f64) -> Self {
        Self {
            filter: GraphFilter::Heat { sigma: numerator },
            per_dmax: true,
        }
    }

    /// IIR filter with `alpha = numerator / D_max` (weak low pass).
    pub fn iir_per_dmax(numerator: f64) -> Self {
        Self {
            filter: GraphFilter::Iir { alpha: numerator },
            per_dmax: true,
        }
    }

    pub fn resolve(&self, graph: &Graph) -> Result<GraphFilter> {
        if !self.per_dmax {
            self.filter.validate()?;
            return Ok(self.filter.clone());
        }
        let dmax = graph.max_degree();
        if dmax == 0 {
            return Err(Error::Config(
                "per_dmax filter on an edgeless graph (maximum degree is zero)".into(),
            ));
        }
        match &self.filter {
            GraphFilter::Heat { sigma } => GraphFilter::heat(sigma / dmax as f64),
            GraphFilter::Iir { alpha } => GraphFilter::iir(alpha / dmax as f64),
            GraphFilter::Poly { .. } => Err(Error::Config(
                "per_dmax scaling applies to heat and iir filters only".into(),
            )),
        }
    }

    /// Stable label used in result tables, independent of the instance.
    pub fn label(&self) -> String {
        match (&self.filter, self.per_dmax) {
            (GraphFilter::Heat { sigma }, false) => format!("heat(sigma={sigma})"),
            (GraphFilter::Heat { sigma }, true) => format!("heat(sigma={sigma}/Dmax)"),
            (GraphFilter::Iir { alpha }, false) => format!("iir(alpha={alpha})"),
            (GraphFilter::Iir { alpha }, true) => format!("iir(alpha={alpha}/Dmax)"),
            (GraphFilter::Poly { coeffs }, _) => {
                format!("poly(degree={})", coeffs.len().saturating_sub(1))
            }
        }
    }

    /// Short token for file names: filter kind only.
    pub fn file_key(&self) -> String {
        self.filter.key()
    }
}

/// Full benchmark protocol: planted instances, filters, sample sizes,
/// solvers, trial count, and the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub cross: Vec<Vec<u64>>,
    #[serde(default = "default_p_intra")]
    pub p_intra: f64,
    pub filters: Vec<FilterSpec>,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    pub r: usize,
    pub m_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub solvers: Vec<SolverConfig>,
    #[serde(default)]
    pub seed: u64,
    /// Sample a fresh graph per trial (default) or reuse one fixed instance.
    #[serde(default = "default_true")]
    pub regenerate_per_trial: bool,
}

fn default_p_intra() -> f64 {
    0.3
}

fn default_noise_var() -> f64 {
    0.01
}

fn default_trials() -> usize {
    50
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// The 378-vertex three-class chain protocol: equal cells of 126, unit
    /// cross-degrees along a chain, dense-enough intra-cell edges for a
    /// clean spectral separation.
    pub fn three_class_default(filters: Vec<FilterSpec>) -> Self {
        use crate::solvers::SolverKind;
        let mut psnmf = SolverConfig::new(SolverKind::Psnmf);
        // Rounding dominates the final answer; cap the multiplicative phase
        // to keep the 150-solve protocol fast.
        psnmf.max_iter = Some(400);
        psnmf.tol = Some(1e-7);
        Self {
            sizes: vec![126, 126, 126],
            cross: vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]],
            p_intra: 0.3,
            filters,
            // Calibrated so that m = 100 recovery is clearly imperfect and
            // m = 1000 nearly exact, spreading the trend across the sample
            // sizes.
            noise_var: 0.15,
            r: 3,
            m_list: vec![100, 300, 1000],
            trials: 50,
            solvers: vec![
                SolverConfig::new(SolverKind::KMeans),
                psnmf,
                SolverConfig::new(SolverKind::Penalty),
            ],
            seed: 0,
            regenerate_per_trial: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.r < 2 {
            return Err(Error::Config("r must be >= 2".into()));
        }
        if self.r > 8 {
            return Err(Error::Config("label matching supports r <= 8".into()));
        }
        if self.sizes.len() != self.r {
            return Err(Error::Config(format!(
                "r = {} must match the planted cell count {}",
                self.r,
                self.sizes.len()
            )));
        }
        if self.filters.is_empty() || self.solvers.is_empty() || self.m_list.is_empty() {
            return Err(Error::Config(
                "filters, solvers, and m_list must all be nonempty".into(),
            ));
        }
        if self.m_list.contains(&0) {
            return Err(Error::Config("sample sizes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One solver run within the benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub solver: String,
    pub filter: String,
    pub m: usize,
    /// Seed of the signal batch this row was extracted from.
    pub seed: u64,
    pub f_c: f64,
    pub gamma: f64,
    pub matched_acc: f64,
    pub iters: usize,
    pub objective: f64,
    pub per_cell_counts: Vec<(usize, usize)>,
}

/// Mean metrics for one (solver, filter, m) combination.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub solver: String,
    pub filter: String,
    pub m: usize,
    pub trials: usize,
    pub mean_f_c: f64,
    pub mean_gamma: f64,
    pub mean_matched_acc: f64,
    pub stderr_f_c: f64,
    pub stderr_gamma: f64,
    pub stderr_matched_acc: f64,
    /// Mean correct/incorrect vertex counts per output cell.
    pub mean_per_cell: Vec<(f64, f64)>,
}

/// Aggregate benchmark table; row count is
/// `|solvers| * |filters| * |m_list|`.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkTable {
    pub rows: Vec<AggregateRow>,
}

/// Benchmark output: aggregate table, per-trial rows, and failed trials.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub table: BenchmarkTable,
    pub trial_rows: Vec<TrialRow>,
    pub failures: Vec<(usize, String)>,
}

fn run_trial(cfg: &ExperimentConfig, trial: usize, fixed: Option<&PlantedInstance>) -> Result<Vec<TrialRow>> {
    let generated;
    let inst = match fixed {
        Some(inst) => inst,
        None => {
            let inst_seed = seeding::derive_path(cfg.seed, &[TAG_INSTANCE, trial as u64]);
            generated = generate_planted_eep(&cfg.sizes, &cfg.cross, cfg.p_intra, inst_seed)?;
            &generated
        }
    };
    let truth = GroundTruth::from_instance(inst)?;
    let lap_dec = eig_sym(&inst.graph.laplacian())?;
    let mut rows = Vec::new();
    for (fi, fspec) in cfg.filters.iter().enumerate() {
        let filter = fspec.resolve(&inst.graph)?;
        let fm = filter_matrix_from_eig(&filter, &lap_dec)?;
        for (mi, &m) in cfg.m_list.iter().enumerate() {
            let sig_seed =
                seeding::derive_path(cfg.seed, &[TAG_SIGNALS, trial as u64, fi as u64, mi as u64]);
            let batch = sample_observations(&fm, &filter, m, cfg.noise_var, sig_seed)?;
            let est = sample_covariance(&batch);
            let dec = eig_sym(&est.matrix)?;
            let top = top_r(&dec, cfg.r)?;
            let problem = ProblemInstance::new(top.vectors.clone())?;
            for (si, scfg) in cfg.solvers.iter().enumerate() {
                let solver_seed = seeding::derive_path(
                    cfg.seed,
                    &[TAG_SOLVER, trial as u64, fi as u64, mi as u64, si as u64],
                );
                let result = solve_with_seed(&problem, scfg, Some(solver_seed))?;
                let partition = partition_from_indicator(result.h_hat.binary())?;
                let report = evaluate(&partition, &truth.partition, &truth.structural_vectors)?;
                rows.push(TrialRow {
                    trial,
                    solver: result.solver_id.clone(),
                    filter: fspec.label(),
                    m,
                    seed: sig_seed,
                    f_c: report.cost_fc,
                    gamma: report.group_accuracy,
                    matched_acc: report.matched_accuracy,
                    iters: result.iterations,
                    objective: result.objective,
                    per_cell_counts: report.per_cell_counts,
                });
            }
        }
    }
    Ok(rows)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Execute the full protocol. Trials run in parallel; every output ordering
/// is fixed by the configuration, so equal seeds give byte-identical CSV.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkRun> {
    cfg.validate()?;
    let fixed = if cfg.regenerate_per_trial {
        None
    } else {
        let inst_seed = seeding::derive_path(cfg.seed, &[TAG_INSTANCE, 0]);
        Some(generate_planted_eep(&cfg.sizes, &cfg.cross, cfg.p_intra, inst_seed)?)
    };

    let outcomes: Vec<Result<Vec<TrialRow>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial, fixed.as_ref()))
        .collect();

    let mut trial_rows = Vec::new();
    let mut failures = Vec::new();
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rows) => trial_rows.extend(rows),
            Err(e) => failures.push((trial, e.to_string())),
        }
    }

    let mut rows = Vec::new();
    for scfg in &cfg.solvers {
        let solver_id = scfg.solver.id().to_string();
        for fspec in &cfg.filters {
            let filter_label = fspec.label();
            for &m in &cfg.m_list {
                let group: Vec<&TrialRow> = trial_rows
                    .iter()
                    .filter(|row| row.solver == solver_id && row.filter == filter_label && row.m == m)
                    .collect();
                let fcs: Vec<f64> = group.iter().map(|r| r.f_c).collect();
                let gammas: Vec<f64> = group.iter().map(|r| r.gamma).collect();
                let matched: Vec<f64> = group.iter().map(|r| r.matched_acc).collect();
                let (mean_f_c, stderr_f_c) = mean_and_stderr(&fcs);
                let (mean_gamma, stderr_gamma) = mean_and_stderr(&gammas);
                let (mean_matched_acc, stderr_matched_acc) = mean_and_stderr(&matched);
                let mut mean_per_cell = vec![(0.0, 0.0); cfg.r];
                if !group.is_empty() {
                    for row in &group {
                        for (k, &(c, w)) in row.per_cell_counts.iter().enumerate() {
                            mean_per_cell[k].0 += c as f64;
                            mean_per_cell[k].1 += w as f64;
                        }
                    }
                    let count = group.len() as f64;
                    for pair in &mut mean_per_cell {
                        pair.0 /= count;
                        pair.1 /= count;
                    }
                }
                rows.push(AggregateRow {
                    solver: solver_id.clone(),
                    filter: filter_label.clone(),
                    m,
                    trials: group.len(),
                    mean_f_c,
                    mean_gamma,
                    mean_matched_acc,
                    stderr_f_c,
                    stderr_gamma,
                    stderr_matched_acc,
                    mean_per_cell,
                });
            }
        }
    }

    Ok(BenchmarkRun {
        table: BenchmarkTable { rows },
        trial_rows,
        failures,
    })
}

/// Write `trials.csv`, `aggregate.csv`, and one plot-ready
/// `curves_<i>_<kind>.csv` per filter into `out_dir`.
pub fn write_benchmark_csv(cfg: &ExperimentConfig, run: &BenchmarkRun, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;

    let mut trials = fs::File::create(out_dir.join("trials.csv"))?;
    writeln!(trials, "solver,filter,m,seed,F_c,gamma,matched_acc,iters,objective")?;
    for row in &run.trial_rows {
        writeln!(
            trials,
            "{},{},{},{},{},{},{},{},{}",
            row.solver,
            row.filter,
            row.m,
            row.seed,
            row.f_c,
            row.gamma,
            row.matched_acc,
            row.iters,
            row.objective
        )?;
    }

    let mut agg = fs::File::create(out_dir.join("aggregate.csv"))?;
    let mut header =
        "solver,filter,m,trials,mean_F_c,mean_gamma,mean_matched_acc,stderr_F_c,stderr_gamma,stderr_matched_acc"
            .to_string();
    for k in 0..cfg.r {
        header.push_str(&format!(",cell{k}_correct,cell{k}_incorrect"));
    }
    writeln!(agg, "{header}")?;
    for row in &run.table.rows {
        let mut line = format!(
            "{},{},{},{},{},{},{},{},{},{}",
            row.solver,
            row.filter,
            row.m,
            row.trials,
            row.mean_f_c,
            row.mean_gamma,
            row.mean_matched_acc,
            row.stderr_f_c,
            row.stderr_gamma,
            row.stderr_matched_acc
        );
        for &(c, w) in &row.mean_per_cell {
            line.push_str(&format!(",{c},{w}"));
        }
        writeln!(agg, "{line}")?;
    }

    for (fi, fspec) in cfg.filters.iter().enumerate() {
        let name = format!("curves_{fi}_{}.csv", fspec.file_key());
        let mut curves = fs::File::create(out_dir.join(name))?;
        writeln!(curves, "m,solver,metric,mean,stderr")?;
        let label = fspec.label();
        for row in run.table.rows.iter().filter(|r| r.filter == label) {
            for (metric, mean, stderr) in [
                ("F_c", row.mean_f_c, row.stderr_f_c),
                ("gamma", row.mean_gamma, row.stderr_gamma),
                ("matched_acc", row.mean_matched_acc, row.stderr_matched_acc),
            ] {
                writeln!(curves, "{},{},{},{},{}", row.m, row.solver, metric, mean, stderr)?;
            }
        }
    }
    Ok(())
}
