//! Experiment runner: JSON config in, one CSV row per trial out.
//!
//! Trials are independent. Each gets its own RNG from
//! [`trial_seed`](crate::seeds::trial_seed), so they run in parallel and are
//! merged back in `(n, ε, trial)` order. Inversion and commitment
//! experiments share one permutation (and predictor) per `(n, ε)` cell,
//! built from the seed of trial index `u64::MAX`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::commitment::{
    audit_binding, audit_qubit_hiding, commit_bit, commit_qubit, decommit_bit, decommit_qubit,
    fidelity, Decommit, HidingReport,
};
use crate::error::{Error, Result};
use crate::gl_classical::{derive_params, solve_classical};
use crate::gl_quantum::{solve_naive, solve_qsearch, QSearchParams, SolveReport};
use crate::oracles::{
    bias_count, AngleRule, EqBlackBox, EqOracle, FamilyKind, IpBlackBox, IpOracle,
};
use crate::reduction::{
    invert_with_predictor, make_synthetic_predictor, make_toy_permutation, InversionMode,
    Permutation, PermutationKind, Predictor, MAX_EXHAUSTIVE_BITS, MAX_TABLE_PERMUTATION_BITS,
    MAX_TABLE_PREDICTOR_BITS,
};
use crate::seeds::trial_seed;
use crate::statevector::{StateVector, MAX_QUBITS};

/// Largest `n` the runner accepts for any experiment.
pub const MAX_EXPERIMENT_BITS: usize = 64;
/// Above this `n`, the classical solver defaults to the lazy oracle family.
pub const EAGER_TABLE_LIMIT: usize = 20;
const CELL_TRIAL: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcommand {
    QuantumGl,
    ClassicalGl,
    Invert,
    CommitDemo,
    QubitCommitDemo,
    Scaling,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::QuantumGl,
        Subcommand::ClassicalGl,
        Subcommand::Invert,
        Subcommand::CommitDemo,
        Subcommand::QubitCommitDemo,
        Subcommand::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::QuantumGl => "quantum-gl",
            Subcommand::ClassicalGl => "classical-gl",
            Subcommand::Invert => "invert",
            Subcommand::CommitDemo => "commit-demo",
            Subcommand::QubitCommitDemo => "qubit-commit-demo",
            Subcommand::Scaling => "scaling",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    fn uses_epsilon(self) -> bool {
        !matches!(self, Subcommand::CommitDemo | Subcommand::QubitCommitDemo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    QuantumNaive,
    QuantumQsearch,
    Classical,
}

impl Solver {
    pub const ALL: [Solver; 3] = [
        Solver::QuantumNaive,
        Solver::QuantumQsearch,
        Solver::Classical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::QuantumNaive => "quantum_naive",
            Solver::QuantumQsearch => "quantum_qsearch",
            Solver::Classical => "classical",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_quantum(self) -> bool {
        self != Solver::Classical
    }
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// `None` picks per `n`: biased-set, or lazy for classical runs above
    /// [`EAGER_TABLE_LIMIT`].
    pub family: Option<FamilyKind>,
    pub solver: Solver,
    pub output: Option<PathBuf>,
    pub qsearch: QSearchParams,
    /// Circuit-C repetitions for the naive solver; `None` means `⌈3/(4ε²)⌉`.
    pub naive_budget: Option<u64>,
    /// Target success of the classical decoder's parameter rule.
    pub delta_star: f64,
    /// Fraction of good keys in synthetic predictors.
    pub delta: f64,
    pub permutation: PermutationKind,
    /// Fill `elapsed_ms`; otherwise it is 0 and output is reproducible.
    pub record_timing: bool,
}

pub const DEFAULT_TRIALS: u64 = 10;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_DELTA_STAR: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 1.0;

impl ExperimentConfig {
    /// Defaults for `subcommand`, with empty `n` and `ε` lists.
    pub fn new(subcommand: Subcommand) -> Self {
        ExperimentConfig {
            subcommand,
            n: Vec::new(),
            epsilon: Vec::new(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            family: None,
            solver: match subcommand {
                Subcommand::ClassicalGl => Solver::Classical,
                _ => Solver::QuantumQsearch,
            },
            output: None,
            qsearch: QSearchParams::default(),
            naive_budget: None,
            delta_star: DEFAULT_DELTA_STAR,
            delta: DEFAULT_DELTA,
            permutation: PermutationKind::Table,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(Error::config("n", "at least one value is required"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0 || n > MAX_EXPERIMENT_BITS) {
            return Err(Error::config(
                "n",
                format!("{n} is outside 1..={MAX_EXPERIMENT_BITS}"),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.subcommand.uses_epsilon() {
            if self.epsilon.is_empty() {
                return Err(Error::config("epsilon", "at least one value is required"));
            }
            for &eps in &self.epsilon {
                for &n in &self.n {
                    bias_count(n, eps).map_err(|e| {
                        Error::config("epsilon", format!("{eps} with n = {n}: {e}"))
                    })?;
                }
            }
        }
        match (self.subcommand, self.solver) {
            (Subcommand::QuantumGl, Solver::Classical) => {
                return Err(Error::config("solver", "quantum-gl needs a quantum solver"));
            }
            (Subcommand::ClassicalGl, s) if s.is_quantum() => {
                return Err(Error::config(
                    "solver",
                    "classical-gl needs the classical solver",
                ));
            }
            (Subcommand::Invert, Solver::QuantumNaive) => {
                return Err(Error::config(
                    "solver",
                    "invert supports quantum_qsearch or classical",
                ));
            }
            _ => {}
        }
        if !(self.qsearch.growth > 1.0 && self.qsearch.growth < 2.0) {
            return Err(Error::config(
                "growth",
                format!("{} is outside (1, 2)", self.qsearch.growth),
            ));
        }
        if self.qsearch.max_rounds == 0 {
            return Err(Error::config("max_rounds", "must be at least 1"));
        }
        if self.naive_budget == Some(0) {
            return Err(Error::config("naive_budget", "must be at least 1"));
        }
        if !(self.delta_star > 0.0 && self.delta_star < 1.0) {
            return Err(Error::config(
                "delta_star",
                format!("{} is outside (0, 1)", self.delta_star),
            ));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::config(
                "delta",
                format!("{} is outside [0, 1]", self.delta),
            ));
        }
        let max_n = self.n.iter().copied().max().unwrap_or(0);
        match self.subcommand {
            Subcommand::QuantumGl | Subcommand::ClassicalGl | Subcommand::Scaling => {
                if self.solver.is_quantum() && self.family == Some(FamilyKind::Lazy) {
                    return Err(Error::config(
                        "family",
                        "the lazy family only serves classical queries",
                    ));
                }
                if self.family.is_some_and(|f| f != FamilyKind::Lazy)
                    && max_n > crate::oracles::MAX_TABLE_BITS
                {
                    return Err(Error::config(
                        "family",
                        format!(
                            "table families need n <= {}",
                            crate::oracles::MAX_TABLE_BITS
                        ),
                    ));
                }
            }
            Subcommand::Invert => {
                if max_n > MAX_TABLE_PREDICTOR_BITS {
                    return Err(Error::config(
                        "n",
                        format!("invert builds table predictors, n <= {MAX_TABLE_PREDICTOR_BITS}"),
                    ));
                }
            }
            Subcommand::CommitDemo => {
                if max_n > MAX_EXHAUSTIVE_BITS {
                    return Err(Error::config(
                        "n",
                        format!(
                            "commit-demo audits binding exhaustively, n <= {MAX_EXHAUSTIVE_BITS}"
                        ),
                    ));
                }
            }
            Subcommand::QubitCommitDemo => {}
        }
        if self.permutation == PermutationKind::Table
            && matches!(
                self.subcommand,
                Subcommand::CommitDemo | Subcommand::QubitCommitDemo
            )
            && max_n > MAX_TABLE_PERMUTATION_BITS
        {
            return Err(Error::config(
                "permutation",
                format!("table permutations need n <= {MAX_TABLE_PERMUTATION_BITS}"),
            ));
        }
        Ok(())
    }

    fn family_for(&self, n: usize) -> FamilyKind {
        self.family
            .unwrap_or(if !self.solver.is_quantum() && n > EAGER_TABLE_LIMIT {
                FamilyKind::Lazy
            } else {
                FamilyKind::BiasedSet
            })
    }

    fn naive_budget_for(&self, epsilon: f64) -> u64 {
        self.naive_budget
            .unwrap_or_else(|| (3.0 / (4.0 * epsilon * epsilon)).ceil() as u64)
    }

    /// Grid coordinates in output order.
    fn cells(&self) -> Vec<(usize, f64)> {
        let eps: Vec<f64> = if self.subcommand.uses_epsilon() {
            self.epsilon.clone()
        } else {
            vec![0.0]
        };
        self.n
            .iter()
            .flat_map(|&n| eps.iter().map(move |&e| (n, e)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum RawEpsilon {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    subcommand: Option<String>,
    n: Option<Vec<usize>>,
    epsilon: Option<Vec<RawEpsilon>>,
    trials: Option<u64>,
    seed: Option<u64>,
    family: Option<String>,
    solver: Option<String>,
    output: Option<PathBuf>,
    growth: Option<f64>,
    max_rounds: Option<u32>,
    naive_budget: Option<u64>,
    delta_star: Option<f64>,
    delta: Option<f64>,
    permutation: Option<String>,
    record_timing: Option<bool>,
}

fn parse_epsilon(raw: &RawEpsilon) -> Result<f64> {
    match raw {
        RawEpsilon::Number(v) => Ok(*v),
        RawEpsilon::Text(s) => {
            let bad = || Error::config("epsilon", format!("cannot read {s:?} as a number or p/q"));
            match s.split_once('/') {
                Some((p, q)) => {
                    let p: f64 = p.trim().parse().map_err(|_| bad())?;
                    let q: f64 = q.trim().parse().map_err(|_| bad())?;
                    if q == 0.0 {
                        return Err(bad());
                    }
                    Ok(p / q)
                }
                None => s.trim().parse().map_err(|_| bad()),
            }
        }
    }
}

/// Parses and validates a JSON config. Fields absent from the JSON take the
/// defaults of [`ExperimentConfig::new`]; the subcommand defaults to
/// `scaling`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_raw(text, None)
}

/// Like [`parse_config`], for a config run under a known subcommand. A
/// config naming a different subcommand is rejected.
pub fn parse_config_as(text: &str, subcommand: Subcommand) -> Result<ExperimentConfig> {
    parse_raw(text, Some(subcommand))
}

fn parse_raw(text: &str, expected: Option<Subcommand>) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        let field = e
            .to_string()
            .split('`')
            .nth(1)
            .map(str::to_owned)
            .unwrap_or_else(|| "json".into());
        Error::config(field, e.to_string())
    })?;
    let subcommand = match &raw.subcommand {
        Some(s) => Subcommand::parse(s)
            .ok_or_else(|| Error::config("subcommand", format!("unknown subcommand {s:?}")))?,
        None => expected.unwrap_or(Subcommand::Scaling),
    };
    if expected.is_some_and(|e| e != subcommand) {
        return Err(Error::config(
            "subcommand",
            format!(
                "config is for {}, not {}",
                subcommand.name(),
                expected.map_or("", Subcommand::name)
            ),
        ));
    }
    let mut cfg = ExperimentConfig::new(subcommand);
    if let Some(n) = raw.n {
        cfg.n = n;
    }
    if let Some(eps) = &raw.epsilon {
        cfg.epsilon = eps.iter().map(parse_epsilon).collect::<Result<_>>()?;
    }
    if let Some(t) = raw.trials {
        cfg.trials = t;
    }
    if let Some(s) = raw.seed {
        cfg.seed = s;
    }
    if let Some(f) = &raw.family {
        cfg.family = Some(
            FamilyKind::parse(f)
                .ok_or_else(|| Error::config("family", format!("unknown family {f:?}")))?,
        );
    }
    if let Some(s) = &raw.solver {
        cfg.solver = Solver::parse(s)
            .ok_or_else(|| Error::config("solver", format!("unknown solver {s:?}")))?;
    }
    cfg.output = raw.output;
    if let Some(g) = raw.growth {
        cfg.qsearch.growth = g;
    }
    if let Some(r) = raw.max_rounds {
        cfg.qsearch.max_rounds = r;
    }
    cfg.naive_budget = raw.naive_budget;
    if let Some(d) = raw.delta_star {
        cfg.delta_star = d;
    }
    if let Some(d) = raw.delta {
        cfg.delta = d;
    }
    if let Some(p) = &raw.permutation {
        cfg.permutation = PermutationKind::parse(p)
            .ok_or_else(|| Error::config("permutation", format!("unknown permutation {p:?}")))?;
    }
    if let Some(t) = raw.record_timing {
        cfg.record_timing = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One CSV row. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub epsilon: f64,
    pub trial: u64,
    pub solver: String,
    pub success: u8,
    pub ip_fwd: u64,
    pub ip_inv: u64,
    pub eq: u64,
    pub f_calls: u64,
    pub rounds: u64,
    pub elapsed_ms: u64,
}

impl ResultRow {
    pub const COLUMNS: [&'static str; 11] = [
        "n",
        "epsilon",
        "trial",
        "solver",
        "success",
        "ip_fwd",
        "ip_inv",
        "eq",
        "f_calls",
        "rounds",
        "elapsed_ms",
    ];

    fn from_report(n: usize, epsilon: f64, trial: u64, solver: &str, report: &SolveReport) -> Self {
        ResultRow {
            n,
            epsilon,
            trial,
            solver: solver.to_owned(),
            success: report.success() as u8,
            ip_fwd: report.tally.ip_forward,
            ip_inv: report.tally.ip_inverse,
            eq: report.tally.eq,
            f_calls: report.tally.f_calls,
            rounds: report.rounds,
            elapsed_ms: 0,
        }
    }

    pub fn total_queries(&self) -> u64 {
        self.ip_fwd + self.ip_inv + self.eq
    }
}

fn run_trials<F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<ResultRow>>
where
    F: Fn(usize, f64, u64, u64) -> Result<ResultRow> + Sync,
{
    let tasks: Vec<(usize, f64, u64)> = cfg
        .cells()
        .into_iter()
        .flat_map(|(n, e)| (0..cfg.trials).map(move |t| (n, e, t)))
        .collect();
    tasks
        .into_par_iter()
        .map(|(n, eps, t)| {
            let started = Instant::now();
            let mut row = trial(
                n,
                eps,
                t,
                trial_seed(cfg.seed, n as u64, eps_numerator(n, eps), t),
            )?;
            if cfg.record_timing {
                row.elapsed_ms = started.elapsed().as_millis() as u64;
            }
            Ok(row)
        })
        .collect()
}

/// `ε·2ⁿ`, the integer the seed mixer takes; 0 for commitment runs.
pub fn eps_numerator(n: usize, epsilon: f64) -> u64 {
    if epsilon == 0.0 {
        0
    } else {
        bias_count(n, epsilon).map_or(0, |c| c as u64)
    }
}

fn cell_seed(cfg: &ExperimentConfig, n: usize, epsilon: f64) -> u64 {
    trial_seed(cfg.seed, n as u64, eps_numerator(n, epsilon), CELL_TRIAL)
}

fn check_report<I: IpBlackBox, E: EqBlackBox>(report: &SolveReport, ip: &I, eq: &E) {
    assert_eq!(
        report.tally,
        ip.tally() + eq.tally(),
        "solver tally drifted from the oracles"
    );
}

/// Runs the GL solvers over the `(n, ε, trial)` grid with a fresh secret and
/// fresh oracles per trial.
pub fn run_scaling_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if cfg.solver.is_quantum() {
        let widest = cfg.n.iter().copied().max().unwrap_or(0) + 2;
        if widest > MAX_QUBITS {
            return Err(Error::ResourceGuard {
                qubits: widest,
                limit: MAX_QUBITS,
            });
        }
    }
    run_trials(cfg, |n, eps, trial, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let secret = BitString::random(n, &mut rng)?;
        let mut ip = match cfg.family_for(n) {
            FamilyKind::BiasedSet => IpOracle::biased_set(n, eps, secret.clone(), &mut rng)?,
            FamilyKind::Rotation => {
                IpOracle::rotation(n, eps, secret.clone(), AngleRule::MatchBias, &mut rng)?
            }
            FamilyKind::Lazy => IpOracle::lazy(n, eps, secret.clone(), &mut rng)?,
        };
        let mut eq = EqOracle::new(secret.clone());
        let report = match cfg.solver {
            Solver::QuantumNaive => {
                solve_naive(&mut ip, &mut eq, cfg.naive_budget_for(eps), &mut rng)?
            }
            Solver::QuantumQsearch => solve_qsearch(&mut ip, &mut eq, &cfg.qsearch, &mut rng)?,
            Solver::Classical => {
                let params = derive_params(n, eps, cfg.delta_star)?;
                solve_classical(&mut ip, &mut eq, &params, &mut rng)?
            }
        };
        check_report(&report, &ip, &eq);
        if let Some(found) = &report.found {
            assert_eq!(found, &secret, "EQ accepted a wrong string");
        }
        Ok(ResultRow::from_report(
            n,
            eps,
            trial,
            cfg.solver.name(),
            &report,
        ))
    })
}

fn cell_permutations(cfg: &ExperimentConfig) -> Result<Vec<((usize, u64), Permutation)>> {
    cfg.cells()
        .into_iter()
        .map(|(n, eps)| {
            let f = make_toy_permutation(cfg.permutation, n, cell_seed(cfg, n, eps))?;
            Ok(((n, eps.to_bits()), f))
        })
        .collect()
}

fn lookup<T>(cells: &[((usize, u64), T)], n: usize, eps: f64) -> &T {
    &cells
        .iter()
        .find(|(key, _)| *key == (n, eps.to_bits()))
        .expect("every trial belongs to a cell")
        .1
}

/// Inverts `f(a)` for fresh uniform `a` with a synthetic `(δ, ε)` predictor
/// shared across the trials of a cell.
pub fn run_inversion_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells: Vec<((usize, u64), (Permutation, Predictor))> = cell_permutations(cfg)?
        .into_iter()
        .map(|((n, bits), f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg, n, f64::from_bits(bits)) ^ 1);
            let g = make_synthetic_predictor(&f, cfg.delta, f64::from_bits(bits), &mut rng)?;
            Ok(((n, bits), (f, g)))
        })
        .collect::<Result<_>>()?;
    let mode_for = |n: usize, eps: f64| -> Result<InversionMode> {
        Ok(match cfg.solver {
            Solver::Classical => InversionMode::Classical(derive_params(n, eps, cfg.delta_star)?),
            _ => InversionMode::Quantum(cfg.qsearch),
        })
    };
    run_trials(cfg, |n, eps, trial, seed| {
        let (f, g) = lookup(&cells, n, eps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = BitString::random(n, &mut rng)?;
        let b = f.apply(&a)?;
        let report = invert_with_predictor(f, g, &b, mode_for(n, eps)?, &mut rng)?;
        if let Some(found) = &report.found {
            assert_eq!(found, &a, "inverter returned a non-preimage");
        }
        Ok(ResultRow::from_report(
            n,
            eps,
            trial,
            cfg.solver.name(),
            &report,
        ))
    })
}

/// Commit to a random bit, open it, and audit binding exhaustively.
/// `rounds` is the number of accepted openings; `f_calls` includes the audit.
pub fn run_commit_demo(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = cell_permutations(cfg)?;
    run_trials(cfg, |n, eps, trial, seed| {
        let f = lookup(&cells, n, eps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = rng.gen::<bool>();
        let (com, open) = commit_bit(f, z, &mut rng)?;
        let opened = decommit_bit(f, &com, &open)?;
        let accepted = audit_binding(f, &com)?;
        Ok(ResultRow {
            n,
            epsilon: eps,
            trial,
            solver: "bit_commit".into(),
            success: (opened == Decommit::Accept(z) && accepted == 1) as u8,
            ip_fwd: 0,
            ip_inv: 0,
            eq: 0,
            f_calls: 2 + (1 << n),
            rounds: accepted,
            elapsed_ms: 0,
        })
    })
}

/// A uniformly random pure qubit, from two angles on the Bloch sphere.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> Result<StateVector> {
    let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let c = ((1.0 + cos_theta) / 2.0).sqrt();
    let s = ((1.0 - cos_theta) / 2.0).sqrt();
    StateVector::from_amplitudes(vec![c.into(), num_complex::Complex64::from_polar(s, phi)])
}

/// Commit to a random qubit and open it; success means fidelity 1 within
/// `1e-9`.
pub fn run_qubit_commit_demo(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = cell_permutations(cfg)?;
    run_trials(cfg, |n, eps, trial, seed| {
        let f = lookup(&cells, n, eps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_qubit(&mut rng)?;
        let (com, o1, o2) = commit_qubit(f, &psi, &mut rng)?;
        let ok = match decommit_qubit(f, &com, &o1, &o2)? {
            Decommit::Accept(back) => (fidelity(&psi, &back)? - 1.0).abs() < 1e-9,
            Decommit::Reject => false,
        };
        Ok(ResultRow {
            n,
            epsilon: eps,
            trial,
            solver: "qubit_commit".into(),
            success: ok as u8,
            ip_fwd: 0,
            ip_inv: 0,
            eq: 0,
            f_calls: 4,
            rounds: 0,
            elapsed_ms: 0,
        })
    })
}

/// Hiding audit of `|0⟩` at each `n`, with `max(trials, 10⁴)` commitments.
pub fn run_hiding_audits(cfg: &ExperimentConfig) -> Result<Vec<HidingReport>> {
    cfg.n
        .iter()
        .map(|&n| {
            let seed = cell_seed(cfg, n, 0.0);
            let f = make_toy_permutation(cfg.permutation, n, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
            audit_qubit_hiding(
                &f,
                &StateVector::zero_state(1)?,
                cfg.trials.max(10_000),
                &mut rng,
            )
        })
        .collect()
}

/// Dispatches on `cfg.subcommand`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.subcommand {
        Subcommand::QuantumGl | Subcommand::ClassicalGl | Subcommand::Scaling => {
            run_scaling_experiment(cfg)
        }
        Subcommand::Invert => run_inversion_experiment(cfg),
        Subcommand::CommitDemo => run_commit_demo(cfg),
        Subcommand::QubitCommitDemo => run_qubit_commit_demo(cfg),
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(ResultRow::COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes header plus rows to `path`.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_csv(rows, file).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io(source),
        other => Error::arg(format!("csv encoding failed: {other:?}")),
    })
}

pub fn to_csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(|e| Error::arg(e.to_string()))?;
    if header.iter().ne(ResultRow::COLUMNS) {
        return Err(Error::arg(format!("unexpected csv header {header:?}")));
    }
    r.deserialize()
        .collect::<csv::Result<Vec<ResultRow>>>()
        .map_err(|e| Error::arg(e.to_string()))
}

/// Aggregate of one `(n, ε, solver)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub epsilon: f64,
    pub solver: String,
    pub trials: u64,
    pub successes: u64,
    pub mean_total_queries: f64,
    pub mean_ip_queries: f64,
}

impl CellSummary {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Per-cell means, in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for row in rows {
        let idx = match out
            .iter()
            .position(|c| c.n == row.n && c.epsilon == row.epsilon && c.solver == row.solver)
        {
            Some(i) => i,
            None => {
                out.push(CellSummary {
                    n: row.n,
                    epsilon: row.epsilon,
                    solver: row.solver.clone(),
                    trials: 0,
                    successes: 0,
                    mean_total_queries: 0.0,
                    mean_ip_queries: 0.0,
                });
                out.len() - 1
            }
        };
        let c = &mut out[idx];
        c.trials += 1;
        c.successes += row.success as u64;
        c.mean_total_queries += row.total_queries() as f64;
        c.mean_ip_queries += (row.ip_fwd + row.ip_inv) as f64;
    }
    for c in &mut out {
        c.mean_total_queries /= c.trials as f64;
        c.mean_ip_queries /= c.trials as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        parse_config(json).unwrap()
    }

    fn config_error_field(json: &str) -> String {
        match parse_config(json) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = cfg(r#"{"n": [8], "epsilon": [0.25]}"#);
        assert_eq!(c.subcommand, Subcommand::Scaling);
        assert_eq!(c.trials, DEFAULT_TRIALS);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.solver, Solver::QuantumQsearch);
        assert_eq!(c.qsearch, QSearchParams::default());
        assert_eq!(c.family, None);
        assert!(!c.record_timing);
    }

    #[test]
    fn fractions_and_numbers() {
        let c = cfg(r#"{"n": [8], "epsilon": ["1/8", 0.25, "0.5"]}"#);
        assert_eq!(c.epsilon, vec![0.125, 0.25, 0.5]);
    }

    #[test]
    fn invalid_configs_name_their_field() {
        assert_eq!(
            config_error_field(r#"{"n": [8], "epsilon": [0.3]}"#),
            "epsilon"
        );
        assert_eq!(
            config_error_field(r#"{"n": [8], "epsilon": [0.25], "solver": "shor"}"#),
            "solver"
        );
        assert_eq!(
            config_error_field(r#"{"n": [8], "epsilon": [0.25], "trials": 0}"#),
            "trials"
        );
        assert_eq!(config_error_field(r#"{"n": [], "epsilon": [0.25]}"#), "n");
        assert_eq!(
            config_error_field(r#"{"n": [8], "epsilon": [0.25], "colour": 1}"#),
            "colour"
        );
        assert_eq!(
            config_error_field(r#"{"n": [8], "epsilon": ["x/2"]}"#),
            "epsilon"
        );
        assert_eq!(
            config_error_field(r#"{"n": [8], "epsilon": [0.25], "growth": 2.5}"#),
            "growth"
        );
        assert_eq!(
            config_error_field(
                r#"{"n": [8], "epsilon": [0.25], "family": "lazy", "solver": "quantum_naive"}"#
            ),
            "family"
        );
        assert_eq!(
            config_error_field(
                r#"{"subcommand": "classical-gl", "n": [8], "epsilon": [0.25], "solver": "quantum_naive"}"#
            ),
            "solver"
        );
        assert!(matches!(parse_config("{"), Err(Error::Config { .. })));
    }

    #[test]
    fn subcommand_from_caller() {
        let c =
            parse_config_as(r#"{"n": [8], "epsilon": [0.25]}"#, Subcommand::ClassicalGl).unwrap();
        assert_eq!(c.solver, Solver::Classical);
        let err = parse_config_as(
            r#"{"subcommand": "invert", "n": [8], "epsilon": [0.25]}"#,
            Subcommand::Scaling,
        );
        assert!(matches!(err, Err(Error::Config { field, .. }) if field == "subcommand"));
    }

    #[test]
    fn commit_demos_need_no_epsilon() {
        let c = cfg(r#"{"subcommand": "commit-demo", "n": [6]}"#);
        assert_eq!(c.cells(), vec![(6, 0.0)]);
        assert_eq!(
            config_error_field(r#"{"subcommand": "commit-demo", "n": [13]}"#),
            "n"
        );
    }

    #[test]
    fn resource_guard() {
        let c = cfg(r#"{"n": [23], "epsilon": [0.5], "trials": 1}"#);
        assert!(matches!(
            run_scaling_experiment(&c),
            Err(Error::ResourceGuard { qubits: 25, .. })
        ));
    }

    #[test]
    fn csv_header_only_and_round_trip() {
        assert_eq!(
            to_csv_string(&[]),
            format!("{}\n", ResultRow::COLUMNS.join(","))
        );
        let c = cfg(r#"{"n": [6], "epsilon": [0.25, 0.125], "trials": 3}"#);
        let rows = run_scaling_experiment(&c).unwrap();
        assert_eq!(rows.len(), 6);
        let text = to_csv_string(&rows);
        assert!(text.ends_with('\n'));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn rows_in_grid_order_and_deterministic() {
        let c = cfg(r#"{"n": [6, 8], "epsilon": [0.25, 0.125], "trials": 4, "seed": 99}"#);
        let rows = run_scaling_experiment(&c).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.epsilon, r.trial)).collect();
        assert_eq!(keys[0], (6, 0.25, 0));
        assert_eq!(keys[15], (8, 0.125, 3));
        assert_eq!(
            to_csv_string(&rows),
            to_csv_string(&run_scaling_experiment(&c).unwrap())
        );
    }

    #[test]
    fn classical_rows_have_exact_ip_counts() {
        let c = cfg(r#"{"subcommand": "classical-gl", "n": [10], "epsilon": [0.25], "trials": 5}"#);
        let rows = run_experiment(&c).unwrap();
        let k = derive_params(10, 0.25, 0.5).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.ip_fwd == k.ip_queries(10) && r.ip_inv == 0));
    }

    #[test]
    fn naive_solver_runs() {
        let c = cfg(
            r#"{"subcommand": "quantum-gl", "solver": "quantum_naive", "n": [6], "epsilon": [0.25], "trials": 5}"#,
        );
        let rows = run_experiment(&c).unwrap();
        assert!(rows.iter().all(|r| r.ip_fwd == r.ip_inv && r.ip_fwd >= 1));
    }

    #[test]
    fn demos_succeed() {
        for sub in ["commit-demo", "qubit-commit-demo"] {
            let c = cfg(&format!(
                r#"{{"subcommand": "{sub}", "n": [4, 6], "trials": 20}}"#
            ));
            let rows = run_experiment(&c).unwrap();
            assert_eq!(rows.len(), 40);
            assert!(rows.iter().all(|r| r.success == 1));
        }
        let c = cfg(r#"{"subcommand": "invert", "n": [6], "epsilon": [0.25], "trials": 10}"#);
        let rows = run_experiment(&c).unwrap();
        assert!(rows.iter().all(|r| r.f_calls == r.eq));
    }

    #[test]
    fn summary_means() {
        let first = ResultRow {
            n: 4,
            epsilon: 0.25,
            trial: 0,
            solver: "classical".into(),
            success: 1,
            ip_fwd: 10,
            ip_inv: 0,
            eq: 2,
            f_calls: 0,
            rounds: 2,
            elapsed_ms: 0,
        };
        let second = ResultRow {
            trial: 1,
            success: 0,
            ip_fwd: 20,
            eq: 4,
            ..first.clone()
        };
        let rows = vec![first, second];
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_total_queries, 18.0);
        assert_eq!(s[0].mean_ip_queries, 15.0);
        assert_eq!(s[0].success_rate(), 0.5);
    }
}
