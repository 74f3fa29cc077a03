//! Quantum solvers for the noisy inner-product problem.
//!
//! Circuit C runs on `n + m + 1` qubits laid out as `[input n][ancilla m][target 1]`:
//!
//! 1. `H` on every input qubit and `X` on the target,
//! 2. `U_IP` on the first `n + m` qubits,
//! 3. controlled-`Z` between the last ancilla qubit and the target,
//! 4. `U_IP†` on the first `n + m` qubits,
//! 5. `H` on every input qubit.
//!
//! The amplitude of `|a, 0^m, 1⟩` in `C|0…0⟩` equals `2⁻ⁿ Σₓ (αₓ² − βₓ²)`,
//! which is at least `2ε`. Measuring therefore yields `a` with probability at
//! least `4ε²`. [`solve_naive`] repeats C until an EQ query confirms the
//! answer. [`solve_qsearch`] instead amplifies the amplitude with the iterate
//! `−C U₀ C† U_EQ` under an exponentially growing, randomized schedule, for
//! `O(1/ε)` queries in expectation.

use num_complex::Complex64;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracles::{EqBlackBox, QueryTally, UnitaryIpOracle};
use crate::statevector::{Direction, Gate, StateVector, MAX_QUBITS};

/// Output of one execution of circuit C on `|0…0⟩`.
#[derive(Debug, Clone)]
pub struct CircuitCOutput {
    pub state: StateVector,
    pub oracle_n: usize,
    pub oracle_m: usize,
}

/// Parameters of the randomized amplitude-amplification schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSearchParams {
    /// Schedule growth factor, strictly between 1 and 2.
    pub growth: f64,
    pub max_rounds: u32,
}

impl Default for QSearchParams {
    fn default() -> Self {
        QSearchParams {
            growth: 6.0 / 5.0,
            max_rounds: 40,
        }
    }
}

impl QSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.growth > 1.0 && self.growth < 2.0) {
            return Err(Error::arg(format!(
                "growth factor must lie in (1, 2), got {}",
                self.growth
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::arg("max_rounds must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// The string confirmed by an EQ query, if any.
    pub found: Option<BitString>,
    /// Combined tallies of the IP and EQ boxes the solver used.
    pub tally: QueryTally,
    pub rounds: u64,
    /// IP forward + IP inverse + EQ queries.
    pub total_queries: u64,
    /// Logical gate applications outside the oracles (H, X, CZ, U₀).
    pub aux_gates: u64,
}

impl SolveReport {
    pub(crate) fn new(
        found: Option<BitString>,
        tally: QueryTally,
        rounds: u64,
        aux_gates: u64,
    ) -> Self {
        SolveReport {
            found,
            tally,
            rounds,
            total_queries: tally.total(),
            aux_gates,
        }
    }

    pub fn success(&self) -> bool {
        self.found.is_some()
    }
}

fn layout<O: UnitaryIpOracle + ?Sized>(oracle: &O) -> Result<(usize, usize, usize)> {
    let n = oracle.input_bits();
    let m = oracle.ancilla_bits();
    let q = n + m + 1;
    if q > MAX_QUBITS {
        return Err(Error::ResourceGuard {
            qubits: q,
            limit: MAX_QUBITS,
        });
    }
    if m == 0 {
        return Err(Error::arg("circuit C needs at least one ancilla qubit"));
    }
    Ok((n, m, q))
}

fn check_register<O: UnitaryIpOracle + ?Sized>(
    state: &StateVector,
    oracle: &O,
) -> Result<(usize, usize)> {
    let (n, m, q) = layout(oracle)?;
    if state.num_qubits() != q {
        return Err(Error::arg(format!(
            "circuit C expects {q} qubits, the state has {}",
            state.num_qubits()
        )));
    }
    Ok((n, m))
}

fn hadamard_inputs(state: &mut StateVector, n: usize) -> Result<()> {
    (0..n).try_for_each(|q| state.apply(&Gate::H(q)))
}

/// Gates applied by one C or C† outside the oracle calls.
fn circuit_c_gates(n: usize) -> u64 {
    2 * n as u64 + 2
}

/// Applies circuit C in place. Costs one forward and one inverse IP query.
pub fn apply_circuit_c<O>(state: &mut StateVector, oracle: &mut O) -> Result<()>
where
    O: UnitaryIpOracle + ?Sized,
{
    let (n, m) = check_register(state, oracle)?;
    state.apply(&Gate::X(n + m))?;
    hadamard_inputs(state, n)?;
    state.apply_ip_oracle(oracle, Direction::Forward)?;
    state.apply(&Gate::CZ(n + m - 1, n + m))?;
    state.apply_ip_oracle(oracle, Direction::Inverse)?;
    hadamard_inputs(state, n)
}

/// Applies C† in place. Also one forward and one inverse IP query.
pub fn apply_circuit_c_adjoint<O>(state: &mut StateVector, oracle: &mut O) -> Result<()>
where
    O: UnitaryIpOracle + ?Sized,
{
    let (n, m) = check_register(state, oracle)?;
    hadamard_inputs(state, n)?;
    state.apply_ip_oracle(oracle, Direction::Forward)?;
    state.apply(&Gate::CZ(n + m - 1, n + m))?;
    state.apply_ip_oracle(oracle, Direction::Inverse)?;
    hadamard_inputs(state, n)?;
    state.apply(&Gate::X(n + m))
}

/// `C|0ⁿ, 0^m, 0⟩`.
pub fn run_circuit_c<O>(oracle: &mut O) -> Result<CircuitCOutput>
where
    O: UnitaryIpOracle + ?Sized,
{
    let (n, m, q) = layout(oracle)?;
    let mut state = StateVector::zero_state(q)?;
    apply_circuit_c(&mut state, oracle)?;
    Ok(CircuitCOutput {
        state,
        oracle_n: n,
        oracle_m: m,
    })
}

impl CircuitCOutput {
    /// `⟨a, 0^m, 1| C |0ⁿ, 0^m, 0⟩` as a complex number.
    pub fn target_amplitude(&self, a: &BitString) -> Result<Complex64> {
        if a.len() != self.oracle_n {
            return Err(Error::LengthMismatch {
                expected: self.oracle_n,
                actual: a.len(),
            });
        }
        let index = (a.to_index()? << (self.oracle_m + 1)) | 1;
        Ok(self.state.amplitudes()[index as usize])
    }

    /// Real part of [`CircuitCOutput::target_amplitude`]. For the shipped
    /// oracle families the imaginary part vanishes.
    pub fn overlap_with_target(&self, a: &BitString) -> Result<f64> {
        let amp = self.target_amplitude(a)?;
        debug_assert!(amp.im.abs() < 1e-9, "imaginary overlap {amp}");
        Ok(amp.re)
    }

    /// Probability that the first `n` measured bits equal `a`.
    pub fn success_probability(&self, a: &BitString) -> Result<f64> {
        self.state.prefix_probability(a)
    }
}

/// One amplitude-amplification step `−C U₀ C† U_EQ`, in place. Costs one EQ
/// query and two forward plus two inverse IP queries.
pub fn grover_iterate<O, E>(state: &mut StateVector, ip: &mut O, eq: &mut E) -> Result<()>
where
    O: UnitaryIpOracle + ?Sized,
    E: EqBlackBox + ?Sized,
{
    check_register(state, ip)?;
    eq.reflect_marked(state)?;
    apply_circuit_c_adjoint(state, ip)?;
    state.apply(&Gate::ReflectZero)?;
    apply_circuit_c(state, ip)?;
    state.negate();
    Ok(())
}

fn measure_input<R: Rng + ?Sized>(state: &StateVector, n: usize, rng: &mut R) -> Result<BitString> {
    let outcome = state.sample_measurement(rng).to_index()?;
    BitString::from_index(n, outcome >> (state.num_qubits() - n))
}

/// Runs C, measures, and checks the first `n` bits with an EQ query, up to
/// `budget` times.
pub fn solve_naive<O, E, R>(ip: &mut O, eq: &mut E, budget: u64, rng: &mut R) -> Result<SolveReport>
where
    O: UnitaryIpOracle + ?Sized,
    E: EqBlackBox + ?Sized,
    R: Rng + ?Sized,
{
    if budget == 0 {
        return Err(Error::arg("budget must be at least 1"));
    }
    let (n, _, _) = layout(ip)?;
    let mut found = None;
    let mut rounds = 0;
    while rounds < budget {
        rounds += 1;
        let out = run_circuit_c(ip)?;
        let guess = measure_input(&out.state, n, rng)?;
        if eq.eq_query(&guess)? {
            found = Some(guess);
            break;
        }
    }
    let aux = rounds * circuit_c_gates(n);
    Ok(SolveReport::new(
        found,
        ip.tally() + eq.tally(),
        rounds,
        aux,
    ))
}

/// Number of iterates for round `round` (1-based): uniform among the
/// nonnegative integers smaller than `growth^(round-1)`.
pub fn schedule_draw<R: Rng + ?Sized>(params: &QSearchParams, round: u32, rng: &mut R) -> u64 {
    let bound = params.growth.powi(round as i32 - 1).ceil() as u64;
    rng.gen_range(0..bound.max(1))
}

/// Amplitude amplification with the randomized growing schedule. Each round
/// prepares a fresh `C|0…0⟩`, applies a random number of iterates, measures
/// and makes one EQ query.
pub fn solve_qsearch<O, E, R>(
    ip: &mut O,
    eq: &mut E,
    params: &QSearchParams,
    rng: &mut R,
) -> Result<SolveReport>
where
    O: UnitaryIpOracle + ?Sized,
    E: EqBlackBox + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    let (n, _, q) = layout(ip)?;
    let c_gates = circuit_c_gates(n);
    let mut found = None;
    let mut rounds = 0u64;
    let mut aux = 0u64;
    for round in 1..=params.max_rounds {
        rounds += 1;
        let k = schedule_draw(params, round, rng);
        let mut state = StateVector::zero_state(q)?;
        apply_circuit_c(&mut state, ip)?;
        for _ in 0..k {
            grover_iterate(&mut state, ip, eq)?;
        }
        aux += c_gates + k * (2 * c_gates + 1);
        let guess = measure_input(&state, n, rng)?;
        if eq.eq_query(&guess)? {
            found = Some(guess);
            break;
        }
    }
    Ok(SolveReport::new(
        found,
        ip.tally() + eq.tally(),
        rounds,
        aux,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{AngleRule, EqOracle, IpBlackBox, IpOracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn oracles(n: usize, eps: f64, seed: u64) -> (IpOracle, EqOracle) {
        let mut r = rng(seed);
        let a = BitString::random(n, &mut r).unwrap();
        (
            IpOracle::biased_set(n, eps, a.clone(), &mut r).unwrap(),
            EqOracle::new(a),
        )
    }

    #[test]
    fn exact_oracle_lands_on_target() {
        for n in [1, 3, 6, 9] {
            let (mut ip, _) = oracles(n, 0.5, n as u64);
            let a = ip.secret().clone();
            let out = run_circuit_c(&mut ip).unwrap();
            let mut label = a.to_string();
            label.push_str("01");
            let target = StateVector::basis_state(n + 2, &label.parse().unwrap()).unwrap();
            assert!(out.state.approx_eq(&target, 1e-9));
            assert!((out.overlap_with_target(&a).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tally_after_one_circuit() {
        let (mut ip, _) = oracles(5, 0.25, 1);
        run_circuit_c(&mut ip).unwrap();
        assert_eq!(ip.tally().ip_forward, 1);
        assert_eq!(ip.tally().ip_inverse, 1);
    }

    #[test]
    fn biased_set_overlap_is_two_epsilon() {
        let (mut ip, _) = oracles(8, 0.125, 2);
        let a = ip.secret().clone();
        let out = run_circuit_c(&mut ip).unwrap();
        assert!((out.overlap_with_target(&a).unwrap() - 0.25).abs() < 1e-9);
        assert!(out.success_probability(&a).unwrap() >= 0.0625 - 1e-9);
    }

    #[test]
    fn rotation_overlap_is_cos_two_theta() {
        let theta = 0.4;
        let mut r = rng(3);
        let a = BitString::random(6, &mut r).unwrap();
        let mut ip =
            IpOracle::rotation(6, 0.1, a.clone(), AngleRule::Constant(theta), &mut r).unwrap();
        let out = run_circuit_c(&mut ip).unwrap();
        let amp = out.target_amplitude(&a).unwrap();
        assert!(amp.im.abs() < 1e-12);
        assert!((amp.re - (2.0 * theta).cos()).abs() < 1e-9);
    }

    #[test]
    fn lazy_oracle_rejected() {
        let mut r = rng(4);
        let a = BitString::random(6, &mut r).unwrap();
        let mut ip = IpOracle::lazy(6, 0.25, a, &mut r).unwrap();
        assert!(matches!(
            run_circuit_c(&mut ip),
            Err(Error::UnsupportedMode(_))
        ));
    }

    #[test]
    fn circuit_adjoint_inverts_circuit() {
        let (mut ip, _) = oracles(5, 0.125, 5);
        let mut r = rng(50);
        let label = BitString::random(7, &mut r).unwrap();
        let start = StateVector::basis_state(7, &label).unwrap();
        let mut s = start.clone();
        apply_circuit_c(&mut s, &mut ip).unwrap();
        apply_circuit_c_adjoint(&mut s, &mut ip).unwrap();
        assert!(s.approx_eq(&start, 1e-9));
    }

    #[test]
    fn iterate_counts_and_norm() {
        let (mut ip, mut eq) = oracles(4, 0.5, 6);
        let a = ip.secret().clone();
        let mut s = run_circuit_c(&mut ip).unwrap().state;
        assert!((s.prefix_probability(&a).unwrap() - 1.0).abs() < 1e-9);
        grover_iterate(&mut s, &mut ip, &mut eq).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        assert_eq!(eq.tally().eq, 1);
        assert_eq!(ip.tally().ip_forward, 3);
        assert_eq!(ip.tally().ip_inverse, 3);
    }

    #[test]
    fn iterate_is_invertible() {
        let (mut ip, mut eq) = oracles(5, 0.125, 7);
        let start = run_circuit_c(&mut ip).unwrap().state;
        let mut s = start.clone();
        grover_iterate(&mut s, &mut ip, &mut eq).unwrap();
        // (−C U₀ C† U_EQ)⁻¹ = −U_EQ C U₀ C†
        s.negate();
        apply_circuit_c_adjoint(&mut s, &mut ip).unwrap();
        s.apply(&Gate::ReflectZero).unwrap();
        apply_circuit_c(&mut s, &mut ip).unwrap();
        eq.reflect_marked(&mut s).unwrap();
        assert!(s.approx_eq(&start, 1e-9));
    }

    #[test]
    fn optimal_iterates_amplify() {
        let eps: f64 = 0.125;
        let k = (std::f64::consts::PI / (4.0 * (2.0 * eps).asin())).floor() as usize;
        assert_eq!(k, 3);
        let (mut ip, mut eq) = oracles(8, eps, 8);
        let a = ip.secret().clone();
        let mut s = run_circuit_c(&mut ip).unwrap().state;
        for _ in 0..k {
            grover_iterate(&mut s, &mut ip, &mut eq).unwrap();
        }
        let p = s.prefix_probability(&a).unwrap();
        let theta = (2.0 * eps).asin();
        assert!((p - ((2 * k + 1) as f64 * theta).sin().powi(2)).abs() < 1e-9);
        assert!(p >= 0.9);
    }

    #[test]
    fn naive_exact_case_first_round() {
        let (mut ip, mut eq) = oracles(6, 0.5, 9);
        let report = solve_naive(&mut ip, &mut eq, 10, &mut rng(0)).unwrap();
        assert_eq!(report.rounds, 1);
        assert_eq!(report.found.as_ref(), Some(ip.secret()));
        assert_eq!(report.tally.eq, 1);
        assert!(solve_naive(&mut ip, &mut eq, 0, &mut rng(0)).is_err());
    }

    #[test]
    fn naive_budget_success_rate() {
        let eps: f64 = 0.125;
        let budget = (3.0 / (4.0 * eps * eps)).ceil() as u64;
        assert_eq!(budget, 48);
        let wins = (0..200)
            .filter(|&t| {
                let (mut ip, mut eq) = oracles(6, eps, 1000 + t);
                solve_naive(&mut ip, &mut eq, budget, &mut rng(t))
                    .unwrap()
                    .success()
            })
            .count();
        assert!(wins >= 100, "wins = {wins}");
    }

    #[test]
    fn qsearch_exact_case_is_cheap() {
        for seed in 0..20 {
            let (mut ip, mut eq) = oracles(7, 0.5, seed);
            let report =
                solve_qsearch(&mut ip, &mut eq, &QSearchParams::default(), &mut rng(seed)).unwrap();
            assert_eq!(report.found.as_ref(), Some(ip.secret()));
            assert!(report.tally.ip_total() <= 4);
            assert_eq!(report.total_queries, report.tally.total());
        }
    }

    #[test]
    fn qsearch_report_matches_tallies() {
        let (mut ip, mut eq) = oracles(8, 0.0625, 10);
        let report =
            solve_qsearch(&mut ip, &mut eq, &QSearchParams::default(), &mut rng(10)).unwrap();
        assert_eq!(report.tally, ip.tally() + eq.tally());
        assert_eq!(report.tally.ip_forward, report.tally.ip_inverse);
        if let Some(found) = &report.found {
            assert_eq!(found, ip.secret());
        }
    }

    #[test]
    fn schedule_first_round_is_zero() {
        let params = QSearchParams::default();
        let mut r = rng(0);
        assert!((0..100).all(|_| schedule_draw(&params, 1, &mut r) == 0));
        let draws: Vec<u64> = (0..1000)
            .map(|_| schedule_draw(&params, 2, &mut r))
            .collect();
        assert!(draws.iter().all(|&k| k <= 1));
        assert!(draws.contains(&1));
        // round 14: 1.2^13 ≈ 10.7, so k < 11
        assert!((0..1000).all(|_| schedule_draw(&params, 14, &mut r) <= 10));
    }

    #[test]
    fn params_validation() {
        assert!(QSearchParams {
            growth: 1.0,
            max_rounds: 5
        }
        .validate()
        .is_err());
        assert!(QSearchParams {
            growth: 2.0,
            max_rounds: 5
        }
        .validate()
        .is_err());
        assert!(QSearchParams {
            growth: 1.5,
            max_rounds: 0
        }
        .validate()
        .is_err());
        assert!(QSearchParams::default().validate().is_ok());
    }
}
