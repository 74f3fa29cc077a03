use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use qgl::bench::{self, ExperimentConfig, Subcommand};
use qgl::Error;

const CONFIG_DEFAULTS: &str = "\
Config fields and defaults (JSON object, all optional except n and epsilon):
  subcommand      this subcommand
  n               list of sizes; built-in grid when no config is given
  epsilon         list of dyadic biases, numbers or \"p/q\" strings
  trials          10
  seed            0
  family          biased_set, rotation or lazy; default biased_set,
                  or lazy for classical runs with n > 20
  solver          quantum_qsearch (classical for classical-gl);
                  also quantum_naive
  output          stdout
  growth          1.2 (schedule growth factor, in (1, 2))
  max_rounds      40
  naive_budget    ceil(3 / (4 eps^2))
  delta_star      0.5 (classical decoder target success)
  delta           1.0 (good-key fraction of synthetic predictors)
  permutation     table, odd_multiplier or feistel_rounds; default table
  record_timing   false (elapsed_ms is 0 unless true)

Exit codes: 0 success, 2 config error, 3 resource guard, 1 other failure.";

#[derive(Parser)]
#[command(
    name = "qgl",
    version,
    about = "Goldreich-Levin solvers, reduction and commitment experiments"
)]
#[command(after_help = CONFIG_DEFAULTS)]
enum Cli {
    /// Quantum GL solver over the n × ε grid (default n = 10, ε = 1/4, 1/8, 1/16)
    QuantumGl(Common),
    /// Classical list decoder over the grid (default n = 32, ε = 1/8, 1/16)
    ClassicalGl(Common),
    /// Invert a toy permutation with a synthetic predictor (default n = 10, ε = 1/4)
    Invert(Common),
    /// Bit commitment round trips with binding audits (default n = 8)
    CommitDemo(Common),
    /// Qubit commitment round trips plus a hiding audit (default n = 8)
    QubitCommitDemo(Common),
    /// Query-count scaling runs for any solver (default n = 10, ε = 1/4, 1/8, 1/16)
    Scaling(Common),
}

#[derive(Args)]
#[command(after_help = CONFIG_DEFAULTS)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed [default: config value, else 0]
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path [default: config value, else stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials per (n, ε) cell [default: config value, else 10]
    #[arg(long)]
    trials: Option<u64>,
}

impl Cli {
    fn split(self) -> (Subcommand, Common) {
        match self {
            Cli::QuantumGl(c) => (Subcommand::QuantumGl, c),
            Cli::ClassicalGl(c) => (Subcommand::ClassicalGl, c),
            Cli::Invert(c) => (Subcommand::Invert, c),
            Cli::CommitDemo(c) => (Subcommand::CommitDemo, c),
            Cli::QubitCommitDemo(c) => (Subcommand::QubitCommitDemo, c),
            Cli::Scaling(c) => (Subcommand::Scaling, c),
        }
    }
}

fn builtin(subcommand: Subcommand) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(subcommand);
    let (n, eps): (Vec<usize>, Vec<f64>) = match subcommand {
        Subcommand::QuantumGl | Subcommand::Scaling => (vec![10], vec![0.25, 0.125, 0.0625]),
        Subcommand::ClassicalGl => (vec![32], vec![0.125, 0.0625]),
        Subcommand::Invert => (vec![10], vec![0.25]),
        Subcommand::CommitDemo | Subcommand::QubitCommitDemo => (vec![8], vec![]),
    };
    cfg.n = n;
    cfg.epsilon = eps;
    cfg
}

fn load(subcommand: Subcommand, args: &Common) -> qgl::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            bench::parse_config_as(&text, subcommand)?
        }
        None => builtin(subcommand),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn hiding_report(cfg: &ExperimentConfig) -> qgl::Result<()> {
    for r in bench::run_hiding_audits(cfg)? {
        eprintln!(
            "hiding n={}: exact distance {:.3e} (bound {:.3e}), empirical {:.3e}, max |z| {:.2}",
            r.n,
            r.exact_trace_distance,
            r.bound,
            r.empirical_trace_distance,
            r.max_abs_z()
        );
    }
    Ok(())
}

fn run(subcommand: Subcommand, args: &Common) -> qgl::Result<()> {
    let cfg = load(subcommand, args)?;
    let rows = bench::run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => bench::emit_csv(&rows, path)?,
        None => print!("{}", bench::to_csv_string(&rows)),
    }
    let mut err = std::io::stderr().lock();
    for cell in bench::summarize(&rows) {
        let _ = writeln!(
            err,
            "n={} eps={} solver={} success={}/{} mean_queries={:.1} mean_ip={:.1}",
            cell.n,
            cell.epsilon,
            cell.solver,
            cell.successes,
            cell.trials,
            cell.mean_total_queries,
            cell.mean_ip_queries
        );
    }
    drop(err);
    if subcommand == Subcommand::QubitCommitDemo {
        hiding_report(&cfg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let (subcommand, args) = Cli::parse().split();
    match run(subcommand, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::InvalidArgument(_) => 2,
                Error::ResourceGuard { .. } => 3,
                _ => 1,
            })
        }
    }
}
