//! Monte Carlo validation of the violation bound.
//!
//! For every `(m, rep)` pair: draw `m` scenarios, solve, evaluate the
//! complexity by greedy removal, look up `g(s_star)`, and measure the
//! violation probability of the solution exactly and/or on an independent
//! test set. Each pair gets its own derived seed, so serial and parallel
//! runs produce identical rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_table, BoundTable, DEFAULT_TOL};
use crate::complexity::greedy_support_sublist;
use crate::error::{Error, Result};
use crate::problem::ScenarioProblem;
use crate::problems::synthetic::{SyntheticInstance, SyntheticProblem};
use crate::problems::unit_commitment::UnitCommitmentInstance;
use crate::rng::{derive_seed, SplitMix64};
use crate::sample::{sample_multisample, ScenarioDistribution};
use crate::stationary::GdaParams;

/// Stream tag for the seed of the synthetic problem's multistart solver.
const SOLVER_STREAM: u64 = 0x5EED_501E;
/// Third tag of the test-scenario stream, after `(m, rep)`.
const TEST_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    UnitCommitment,
    Synthetic,
}

impl ProblemKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "unit_commitment" => Ok(Self::UnitCommitment),
            "synthetic" => Ok(Self::Synthetic),
            other => Err(Error::invalid(format!(
                "unknown problem '{other}' (expected unit_commitment or synthetic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationMode {
    Empirical,
    Exact,
    Both,
}

impl ViolationMode {
    fn wants_exact(self) -> bool {
        matches!(self, Self::Exact | Self::Both)
    }

    fn wants_empirical(self) -> bool {
        matches!(self, Self::Empirical | Self::Both)
    }
}

fn default_problem() -> ProblemKind {
    ProblemKind::UnitCommitment
}
fn default_beta() -> f64 {
    0.01
}
fn default_m_values() -> Vec<usize> {
    (1..=100).collect()
}
fn default_repetitions() -> usize {
    200
}
fn default_n_test() -> usize {
    10_000
}
fn default_violation_mode() -> ViolationMode {
    ViolationMode::Both
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

/// Experiment configuration; the JSON form uses these field names and
/// rejects unknown fields. Omitted fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_problem")]
    pub problem: ProblemKind,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_m_values")]
    pub m_values: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_violation_mode")]
    pub violation_mode: ViolationMode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Run repetitions on the rayon pool.
    #[serde(default = "default_true")]
    pub parallel: bool,
    /// When false, `wall_time_ms` is left empty so outputs are byte-reproducible.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: default_problem(),
            beta: default_beta(),
            m_values: default_m_values(),
            repetitions: default_repetitions(),
            n_test: default_n_test(),
            master_seed: 0,
            violation_mode: default_violation_mode(),
            output_dir: default_output_dir(),
            parallel: true,
            record_wall_time: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.m_values.contains(&0) {
            return Err(Error::invalid("every m must be at least 1"));
        }
        if self.violation_mode.wants_empirical() && self.n_test == 0 {
            return Err(Error::invalid("n_test must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub m: usize,
    pub rep: usize,
    pub s_star: usize,
    pub bound: f64,
    pub violation_exact: Option<f64>,
    pub violation_empirical: Option<f64>,
    pub payoff: f64,
    pub wall_time_ms: Option<f64>,
}

impl ResultRow {
    /// Violation used for the exceedance test: exact when available.
    pub fn gate_violation(&self) -> Option<f64> {
        self.violation_exact.or(self.violation_empirical)
    }

    /// Violation plotted against the bound: empirical when available.
    pub fn plotted_violation(&self) -> Option<f64> {
        self.violation_empirical.or(self.violation_exact)
    }

    pub fn exceeds_bound(&self) -> bool {
        self.gate_violation().is_some_and(|v| v > self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRow {
    pub m: usize,
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerMSummary {
    pub m: usize,
    /// Largest bound over the repetitions; equal to every row's bound when `s_star` is constant.
    pub bound: Option<f64>,
    pub v_mean: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRange {
    pub m: usize,
    pub s_star_min: usize,
    pub s_star_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub per_m: Vec<PerMSummary>,
    pub total_runs: usize,
    pub bound_exceedances: usize,
    pub beta_hat: f64,
    pub failed_runs: usize,
    pub complexity: Vec<ComplexityRange>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<FailedRow>,
    pub summary: Summary,
}

/// Fraction of `n_test` i.i.d. scenarios for which `point` is infeasible.
pub fn estimate_violation<P: ScenarioProblem>(
    problem: &P,
    point: &P::Point,
    dist: &ScenarioDistribution,
    n_test: usize,
    seed: u64,
) -> Result<f64> {
    if n_test == 0 {
        return Err(Error::invalid("n_test must be at least 1"));
    }
    let mut rng = SplitMix64::new(seed);
    let misses = (0..n_test).filter(|_| !problem.membership(dist.draw(&mut rng), point)).count();
    Ok(misses as f64 / n_test as f64)
}

pub fn synthetic_problem(master_seed: u64) -> SyntheticProblem<f64> {
    SyntheticProblem::new(
        SyntheticInstance::reference(),
        GdaParams::default(),
        derive_seed(master_seed, &[SOLVER_STREAM]),
    )
    .expect("default GDA parameters are valid")
}

/// Bound tables for every distinct `m`, computed once and shared.
pub fn bound_tables(m_values: &[usize], beta: f64) -> Result<BTreeMap<usize, BoundTable<f64>>> {
    let mut tables = BTreeMap::new();
    for &m in m_values {
        if let std::collections::btree_map::Entry::Vacant(slot) = tables.entry(m) {
            slot.insert(bound_table(m, beta, DEFAULT_TOL)?);
        }
    }
    Ok(tables)
}

/// One repetition against a prepared problem and bound table.
pub fn run_repetition_with<P: ScenarioProblem>(
    problem: &P,
    cfg: &ExperimentConfig,
    table: &BoundTable<f64>,
    m: usize,
    rep: usize,
) -> Result<ResultRow> {
    let started = Instant::now();
    let ms = sample_multisample(problem.distribution(), m, derive_seed(cfg.master_seed, &[m as u64, rep as u64]))?;
    let complexity = greedy_support_sublist(problem, &ms)?;
    let point = &complexity.reference_point;
    let bound = table
        .bound(complexity.s_star)
        .ok_or_else(|| Error::NumericalFailure(format!("no bound for s_star = {}", complexity.s_star)))?;

    let violation_exact = if cfg.violation_mode.wants_exact() {
        problem.exact_violation(point).transpose()?
    } else {
        None
    };
    let violation_empirical = if cfg.violation_mode.wants_empirical() {
        let seed = derive_seed(cfg.master_seed, &[m as u64, rep as u64, TEST_STREAM]);
        Some(estimate_violation(problem, point, problem.distribution(), cfg.n_test, seed)?)
    } else {
        None
    };

    Ok(ResultRow {
        m,
        rep,
        s_star: complexity.s_star,
        bound,
        violation_exact,
        violation_empirical,
        payoff: problem.payoff(point),
        wall_time_ms: cfg.record_wall_time.then(|| started.elapsed().as_secs_f64() * 1e3),
    })
}

/// One repetition, building the problem and bound table from `cfg`.
pub fn run_repetition(cfg: &ExperimentConfig, m: usize, rep: usize) -> Result<ResultRow> {
    cfg.validate()?;
    if rep >= cfg.repetitions {
        return Err(Error::invalid(format!("rep {rep} out of range")));
    }
    let table = bound_table(m, cfg.beta, DEFAULT_TOL)?;
    match cfg.problem {
        ProblemKind::UnitCommitment => {
            run_repetition_with(&UnitCommitmentInstance::reference(), cfg, &table, m, rep)
        }
        ProblemKind::Synthetic => run_repetition_with(&synthetic_problem(cfg.master_seed), cfg, &table, m, rep),
    }
}

fn run_all<P: ScenarioProblem>(problem: &P, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let tables = bound_tables(&cfg.m_values, cfg.beta)?;
    let mut tasks: Vec<(usize, usize)> =
        cfg.m_values.iter().flat_map(|&m| (0..cfg.repetitions).map(move |rep| (m, rep))).collect();
    tasks.sort_unstable();
    tasks.dedup();

    let one = |&(m, rep): &(usize, usize)| {
        run_repetition_with(problem, cfg, &tables[&m], m, rep)
            .map_err(|e| FailedRow { m, rep, error: e.to_string() })
    };
    let outcomes: Vec<std::result::Result<ResultRow, FailedRow>> = if cfg.parallel {
        tasks.par_iter().map(one).collect()
    } else {
        tasks.iter().map(one).collect()
    };

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(failed) => failures.push(failed),
        }
    }
    let summary = summarize(&rows, failures.len(), &cfg.m_values);
    Ok(ExperimentOutput { rows, failures, summary })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.problem {
        ProblemKind::UnitCommitment => run_all(&UnitCommitmentInstance::reference(), cfg),
        ProblemKind::Synthetic => run_all(&synthetic_problem(cfg.master_seed), cfg),
    }
}

/// Aggregates rows into the per-`m` series and the exceedance count.
pub fn summarize(rows: &[ResultRow], failed_runs: usize, m_values: &[usize]) -> Summary {
    let mut ms: Vec<usize> = m_values.to_vec();
    ms.sort_unstable();
    ms.dedup();

    let mut per_m = Vec::with_capacity(ms.len());
    let mut complexity = Vec::new();
    for &m in &ms {
        let group: Vec<&ResultRow> = rows.iter().filter(|r| r.m == m).collect();
        let bound = group.iter().map(|r| r.bound).reduce(f64::max);
        let vs: Vec<f64> = group.iter().filter_map(|r| r.plotted_violation()).collect();
        let v_mean = (!vs.is_empty()).then(|| vs.iter().sum::<f64>() / vs.len() as f64);
        per_m.push(PerMSummary {
            m,
            bound,
            v_mean,
            v_min: vs.iter().copied().reduce(f64::min),
            v_max: vs.iter().copied().reduce(f64::max),
        });
        if let (Some(lo), Some(hi)) =
            (group.iter().map(|r| r.s_star).min(), group.iter().map(|r| r.s_star).max())
        {
            complexity.push(ComplexityRange { m, s_star_min: lo, s_star_max: hi });
        }
    }

    let total_runs = rows.len();
    let bound_exceedances = rows.iter().filter(|r| r.exceeds_bound()).count();
    let beta_hat = if total_runs == 0 { 0.0 } else { bound_exceedances as f64 / total_runs as f64 };
    Summary { per_m, total_runs, bound_exceedances, beta_hat, failed_runs, complexity }
}

pub const ROWS_HEADER: [&str; 8] =
    ["m", "rep", "s_star", "bound", "violation_exact", "violation_empirical", "payoff", "wall_time_ms"];
pub const FIGURE_HEADER: [&str; 5] = ["m", "bound", "v_mean", "v_min", "v_max"];
pub const FAILURES_HEADER: [&str; 3] = ["m", "rep", "error"];

fn write_csv<S: Serialize>(path: &Path, header: &[&str], records: &[S]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows.csv`, `figure1.csv`, `failures.csv` and `summary.json` into `output_dir`.
pub fn emit_outputs(output: &ExperimentOutput, output_dir: &Path) -> Result<()> {
    fs::create_dir_all(output_dir)?;
    write_csv(&output_dir.join("rows.csv"), &ROWS_HEADER, &output.rows)?;
    write_csv(&output_dir.join("figure1.csv"), &FIGURE_HEADER, &output.summary.per_m)?;
    write_csv(&output_dir.join("failures.csv"), &FAILURES_HEADER, &output.failures)?;
    let mut json = serde_json::to_string_pretty(&output.summary)?;
    json.push('\n');
    fs::write(output_dir.join("summary.json"), json)?;
    Ok(())
}

pub fn read_rows_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::unit_commitment::UcPoint;

    fn small(problem: ProblemKind) -> ExperimentConfig {
        ExperimentConfig {
            problem,
            m_values: vec![1, 3, 8],
            repetitions: 6,
            n_test: 2000,
            master_seed: 17,
            record_wall_time: false,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_parsing() {
        let cfg = ExperimentConfig::from_json(r#"{"beta": 0.05, "m_values": [2, 4], "violation_mode": "exact"}"#).unwrap();
        assert_eq!(cfg.beta, 0.05);
        assert_eq!(cfg.repetitions, 200);
        assert_eq!(cfg.violation_mode, ViolationMode::Exact);
        assert!(ExperimentConfig::from_json(r#"{"betta": 0.05}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"beta": 1.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"m_values": [0]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"repetitions": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"problem": "synthetic"}"#).is_ok());
        assert_eq!(ExperimentConfig::default().m_values.len(), 100);
    }

    #[test]
    fn estimator_bounds() {
        let inst = UnitCommitmentInstance::reference();
        let always = inst.solve(&crate::MultiSample::new(vec![0.5, 1.5]).unwrap()).unwrap();
        // Feasible for theta in [0.5, capacity/3] where capacity/3 >= 1.5.
        assert_eq!(estimate_violation(&inst, &always, &inst.dist, 5000, 3).unwrap(), 0.0);
        let one = estimate_violation(&inst, &always, &inst.dist, 1, 3).unwrap();
        assert!(one == 0.0 || one == 1.0);
        let active = 3.0;
        let pt = UcPoint {
            u: vec![1, 0, 1, 1, 0],
            v: [1u8, 0, 1, 1, 0].iter().flat_map(|&b| vec![f64::from(b) / active; 5]).collect(),
            y: vec![0.8; 5],
        };
        let exact = inst.exact_violation(&pt).unwrap();
        assert!((exact - 0.8).abs() < 1e-12);
        for seed in 0..5 {
            let est = estimate_violation(&inst, &pt, &inst.dist, 10_000, seed).unwrap();
            assert!((est - exact).abs() <= 0.02, "{est}");
        }
        assert!(estimate_violation(&inst, &pt, &inst.dist, 0, 1).is_err());
    }

    #[test]
    fn repetition_is_deterministic_and_uses_table() {
        let cfg = small(ProblemKind::UnitCommitment);
        let a = run_repetition(&cfg, 8, 2).unwrap();
        let b = run_repetition(&cfg, 8, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.s_star <= 2);
        assert_eq!(a.bound, bound_table(8, cfg.beta, DEFAULT_TOL).unwrap().g[a.s_star]);
        assert!(run_repetition(&cfg, 8, 6).is_err());
    }

    #[test]
    fn single_run_summary() {
        let cfg = ExperimentConfig { m_values: vec![1], repetitions: 1, ..small(ProblemKind::UnitCommitment) };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.summary.beta_hat == 0.0 || out.summary.beta_hat == 1.0);
        // m = 1 means s_star = 1 = m, so the bound is 1 and cannot be exceeded.
        assert_eq!(out.rows[0].bound, 1.0);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let cfg = small(ProblemKind::UnitCommitment);
        let par = run_experiment(&cfg).unwrap();
        let ser = run_experiment(&ExperimentConfig { parallel: false, ..cfg }).unwrap();
        assert_eq!(par, ser);
        assert!(par.rows.windows(2).all(|w| (w[0].m, w[0].rep) < (w[1].m, w[1].rep)));
    }

    #[test]
    fn outputs_round_trip() {
        let cfg = small(ProblemKind::UnitCommitment);
        let out = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_outputs(&out, dir.path()).unwrap();
        let rows = read_rows_csv(&dir.path().join("rows.csv")).unwrap();
        assert_eq!(rows, out.rows);
        let again = summarize(&rows, out.failures.len(), &cfg.m_values);
        assert_eq!(again.beta_hat, out.summary.beta_hat);
        assert_eq!(again, out.summary);

        let fig = fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
        assert_eq!(fig.lines().next().unwrap(), "m,bound,v_mean,v_min,v_max");
        assert_eq!(fig.lines().count(), 1 + cfg.m_values.len());
        assert!(!fig.contains('\r'));
        let summary: Summary =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary, out.summary);
    }

    #[test]
    fn empty_rows_write_headers() {
        let out = ExperimentOutput { rows: vec![], failures: vec![], summary: summarize(&[], 0, &[]) };
        let dir = tempfile::tempdir().unwrap();
        emit_outputs(&out, dir.path()).unwrap();
        let rows = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
        assert_eq!(rows, "m,rep,s_star,bound,violation_exact,violation_empirical,payoff,wall_time_ms\n");
        let fig = fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
        assert_eq!(fig, "m,bound,v_mean,v_min,v_max\n");
    }

    #[test]
    fn unwritable_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let out = ExperimentOutput { rows: vec![], failures: vec![], summary: summarize(&[], 0, &[]) };
        assert!(matches!(emit_outputs(&out, &blocker.join("sub")), Err(Error::Io(_))));
    }

    #[test]
    fn synthetic_smoke() {
        let cfg = ExperimentConfig {
            m_values: vec![2, 4],
            repetitions: 3,
            violation_mode: ViolationMode::Exact,
            ..small(ProblemKind::Synthetic)
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert!(out.failures.is_empty());
        for row in &out.rows {
            assert!(row.violation_empirical.is_none());
            assert!((0.0..=1.0).contains(&row.violation_exact.unwrap()));
        }
    }

    #[test]
    fn mixed_complexity_uses_max_bound() {
        let row = |rep, s_star, bound| ResultRow {
            m: 4,
            rep,
            s_star,
            bound,
            violation_exact: Some(0.1),
            violation_empirical: None,
            payoff: 0.0,
            wall_time_ms: None,
        };
        let s = summarize(&[row(0, 1, 0.5), row(1, 2, 0.7)], 0, &[4]);
        assert_eq!(s.per_m[0].bound, Some(0.7));
        assert_eq!(s.complexity[0], ComplexityRange { m: 4, s_star_min: 1, s_star_max: 2 });
    }
}
