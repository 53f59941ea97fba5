//! `scenario-cert` command-line interface.
//!
//! Results go to stdout as CSV or JSON; diagnostics go to stderr.
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use scenario_cert::bounds::{bound_table, DEFAULT_TOL};
use scenario_cert::consistency::{check_consistency, ConsistencyOptions};
use scenario_cert::experiment::{emit_outputs, run_experiment, synthetic_problem};
use scenario_cert::{
    greedy_support_sublist, sample_multisample, ExperimentConfig, ProblemKind, ScenarioProblem,
    UnitCommitmentInstance,
};

#[derive(Debug, Parser)]
#[command(name = "scenario-cert", version, about = "Robustness certificates for scenario minimax problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound table g(k), k = 0..=m, or a single g(k).
    Bound {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        k: Option<usize>,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a sampled scenario problem and print the equilibrium.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        m: usize,
        #[arg(long, env = "SCENARIO_SEED")]
        seed: u64,
    },
    /// Greedy complexity of a sampled multisample.
    Complexity {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        m: usize,
        #[arg(long, env = "SCENARIO_SEED")]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Randomized check of the solver map's consistency conditions.
    CheckConsistency {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        trials: usize,
        #[arg(long, env = "SCENARIO_SEED")]
        seed: u64,
    },
    /// Multistart GDA on the synthetic game, with its certificate.
    Stationary {
        #[arg(long)]
        m: usize,
        #[arg(long, env = "SCENARIO_SEED")]
        seed: u64,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
    },
}

type CliResult = Result<bool, Box<dyn std::error::Error>>;

fn print_json<T: Serialize>(value: &T) -> Result<(), serde_json::Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn solve_with<P: ScenarioProblem>(problem: &P, m: usize, seed: u64) -> CliResult {
    let ms = sample_multisample(problem.distribution(), m, seed)?;
    let point = problem.solve(&ms)?;
    print_json(&json!({
        "problem": problem.name(),
        "thetas": ms.thetas(),
        "point": point,
        "payoff": problem.payoff(&point),
    }))?;
    Ok(true)
}

fn complexity_with<P: ScenarioProblem>(problem: &P, m: usize, seed: u64, format: Format) -> CliResult {
    let ms = sample_multisample(problem.distribution(), m, seed)?;
    let res = greedy_support_sublist(problem, &ms)?;
    let kept: Vec<f64> = res.kept_indices.iter().map(|&i| ms.thetas()[i]).collect();
    match format {
        Format::Csv => {
            println!("s_star,index,theta");
            for (&i, theta) in res.kept_indices.iter().zip(&kept) {
                println!("{},{i},{theta:?}", res.s_star);
            }
        }
        Format::Json => print_json(&json!({
            "s_star": res.s_star,
            "kept_indices": res.kept_indices,
            "kept_thetas": kept,
        }))?,
    }
    Ok(true)
}

fn consistency_with<P: ScenarioProblem>(problem: &P, trials: usize, seed: u64) -> CliResult {
    let report = check_consistency(problem, trials, seed, &ConsistencyOptions::default())?;
    print_json(&report)?;
    Ok(report.all_passed())
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Bound { m, beta, k, out } => {
            let table = bound_table(m, beta, DEFAULT_TOL)?;
            match (k, out) {
                (Some(k), _) => {
                    let g = table.bound(k).ok_or_else(|| format!("k = {k} exceeds m = {m}"))?;
                    println!("{g:?}");
                }
                (None, Some(path)) => fs::write(path, table.to_csv())?,
                (None, None) => print!("{}", table.to_csv()),
            }
            Ok(true)
        }
        Command::Solve { problem, m, seed } => match ProblemKind::parse(&problem)? {
            ProblemKind::UnitCommitment => solve_with(&UnitCommitmentInstance::reference(), m, seed),
            ProblemKind::Synthetic => solve_with(&synthetic_problem(seed), m, seed),
        },
        Command::Complexity { problem, m, seed, format } => match ProblemKind::parse(&problem)? {
            ProblemKind::UnitCommitment => complexity_with(&UnitCommitmentInstance::reference(), m, seed, format),
            ProblemKind::Synthetic => complexity_with(&synthetic_problem(seed), m, seed, format),
        },
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            eprintln!(
                "running {} x {} repetitions ({:?})",
                cfg.m_values.len(),
                cfg.repetitions,
                cfg.problem
            );
            let output = run_experiment(&cfg)?;
            emit_outputs(&output, &cfg.output_dir)?;
            eprintln!("wrote outputs to {}", cfg.output_dir.display());
            print_json(&output.summary)?;
            Ok(true)
        }
        Command::CheckConsistency { problem, trials, seed } => match ProblemKind::parse(&problem)? {
            ProblemKind::UnitCommitment => consistency_with(&UnitCommitmentInstance::reference(), trials, seed),
            ProblemKind::Synthetic => consistency_with(&synthetic_problem(seed), trials, seed),
        },
        Command::Stationary { m, seed, starts, beta } => {
            let mut problem = synthetic_problem(seed);
            if let Some(n) = starts {
                problem.params.n_starts = n;
                problem.params.validate()?;
            }
            let ms = sample_multisample(problem.distribution(), m, seed)?;
            let result = problem.solve_detailed(&ms)?;
            let complexity = greedy_support_sublist(&problem, &ms)?;
            let table = bound_table(m, beta, DEFAULT_TOL)?;
            print_json(&json!({
                "residual": result.residual,
                "point": result.point,
                "iterations": result.iterations,
                "start_index": result.start_index,
                "s_star": complexity.s_star,
                "bound": table.g[complexity.s_star],
                "exact_violation": problem.instance.exact_violation(&result.point),
            }))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
