//! Planted-secret inner-product (IP) and equivalence (EQ) black boxes.
//!
//! An IP oracle answers `x ↦ a·x` correctly on a `½ + ε` fraction of inputs.
//! Three families are shipped:
//!
//! * **biased set**: a uniformly random set `S` of exactly `(½ + ε)·2ⁿ` inputs
//!   answers correctly, every other input answers wrongly. As a unitary it is
//!   the XOR oracle `|x, b⟩ ↦ |x, b ⊕ IP(x)⟩`.
//! * **rotation**: every input is coherently noisy. The unitary maps
//!   `|x, 0⟩ ↦ |x⟩(cos θₓ |a·x⟩ + sin θₓ |¬a·x⟩)`.
//! * **lazy**: the biased-set distribution, sampled on demand so that `n` can
//!   be far beyond what a `2ⁿ` table allows. Classical queries only.
//!
//! Every query is counted in a [`QueryTally`] owned by the oracle.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, AddAssign};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::statevector::{Direction, Gate, StateVector, MAX_QUBITS};

/// Largest `n` for which the table-backed families will materialize `2ⁿ` entries.
pub const MAX_TABLE_BITS: usize = MAX_QUBITS;

/// Query counts. Counters only ever grow; use [`QueryTally::reset`] to zero them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTally {
    pub ip_forward: u64,
    pub ip_inverse: u64,
    pub eq: u64,
    pub f_calls: u64,
}

impl QueryTally {
    /// IP forward + IP inverse + EQ.
    pub fn total(&self) -> u64 {
        self.ip_forward + self.ip_inverse + self.eq
    }

    pub fn ip_total(&self) -> u64 {
        self.ip_forward + self.ip_inverse
    }

    pub fn reset(&mut self) {
        *self = QueryTally::default();
    }

    pub(crate) fn record(&mut self, direction: Direction) {
        match direction {
            Direction::Forward => self.ip_forward += 1,
            Direction::Inverse => self.ip_inverse += 1,
        }
    }
}

impl Add for QueryTally {
    type Output = QueryTally;

    fn add(self, rhs: QueryTally) -> QueryTally {
        QueryTally {
            ip_forward: self.ip_forward + rhs.ip_forward,
            ip_inverse: self.ip_inverse + rhs.ip_inverse,
            eq: self.eq + rhs.eq,
            f_calls: self.f_calls + rhs.f_calls,
        }
    }
}

impl AddAssign for QueryTally {
    fn add_assign(&mut self, rhs: QueryTally) {
        *self = *self + rhs;
    }
}

/// A classical IP black box.
pub trait IpBlackBox {
    fn input_bits(&self) -> usize;
    fn ip_query(&mut self, x: &BitString) -> Result<bool>;
    fn tally(&self) -> QueryTally;
}

/// An IP black box that can also be applied as the unitary `U_IP` (or its
/// inverse) on `n + m` qubits.
///
/// The unitary preserves the first `n` qubits, so it is block diagonal:
/// `U = Σₓ |x⟩⟨x| ⊗ Mₓ` with each `Mₓ` acting on the `m` ancilla qubits.
pub trait UnitaryIpOracle: IpBlackBox {
    fn ancilla_bits(&self) -> usize;

    /// Writes `Mₓ` (or `Mₓ†`) in row-major order into `out`, which holds
    /// `4^m` entries. Does not count a query.
    fn write_block(&self, x: u64, direction: Direction, out: &mut [Complex64]) -> Result<()>;

    /// Counts one application of the unitary.
    fn record_application(&mut self, direction: Direction);
}

/// A classical EQ black box together with its quantum counterpart.
pub trait EqBlackBox {
    fn input_bits(&self) -> usize;
    fn eq_query(&mut self, x: &BitString) -> Result<bool>;

    /// Negates the amplitude of every basis state whose first `n` qubits are
    /// accepted by the box. Counts as one EQ query.
    fn reflect_marked(&mut self, state: &mut StateVector) -> Result<()>;

    fn tally(&self) -> QueryTally;
}

/// Oracle family tag, as written in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    BiasedSet,
    Rotation,
    Lazy,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::BiasedSet => "biased_set",
            FamilyKind::Rotation => "rotation",
            FamilyKind::Lazy => "lazy",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "biased_set" => Some(FamilyKind::BiasedSet),
            "rotation" => Some(FamilyKind::Rotation),
            "lazy" => Some(FamilyKind::Lazy),
            _ => None,
        }
    }
}

/// How a rotation oracle picks its per-input angles `θₓ ∈ [0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleRule {
    /// The same angle for every input.
    Constant(f64),
    /// One angle per input, indexed by the integer value of `x`.
    PerInput(Vec<f64>),
    /// Constant angle with `cos² θ = ½ + ε` exactly.
    MatchBias,
    /// Independent uniform draws from `[lo, hi]`; the mean bias is checked
    /// after drawing.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone)]
enum Family {
    BiasedSet { in_set: Vec<bool> },
    Rotation { angles: Vec<f64> },
    Lazy(LazyState),
}

#[derive(Debug, Clone)]
struct LazyState {
    committed: HashMap<BitString, bool>,
    set_size: u128,
    placed_in_set: u128,
}

#[derive(Debug, Clone)]
pub struct IpOracle {
    n: usize,
    secret: BitString,
    epsilon: f64,
    family: Family,
    rng: ChaCha8Rng,
    tally: QueryTally,
}

/// `ε·2ⁿ`, checked to be an integer with `0 < ε ≤ ½`.
pub fn bias_count(n: usize, epsilon: f64) -> Result<u128> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::arg(format!(
            "epsilon must lie in (0, 1/2], got {epsilon}"
        )));
    }
    if n > 100 {
        return Err(Error::arg(format!("n = {n} is too large")));
    }
    let scaled = epsilon * 2f64.powi(n as i32);
    if scaled.fract() != 0.0 {
        return Err(Error::arg(format!(
            "epsilon·2^n = {scaled} is not an integer (n = {n})"
        )));
    }
    Ok(scaled as u128)
}

fn check_secret(n: usize, secret: &BitString) -> Result<()> {
    if secret.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: secret.len(),
        });
    }
    Ok(())
}

fn check_table_size(n: usize) -> Result<()> {
    if n > MAX_TABLE_BITS {
        return Err(Error::ResourceGuard {
            qubits: n,
            limit: MAX_TABLE_BITS,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

impl IpOracle {
    /// The biased-set oracle: `S` is a uniformly random subset of size
    /// exactly `(½ + ε)·2ⁿ`.
    pub fn biased_set<R: Rng + ?Sized>(
        n: usize,
        epsilon: f64,
        secret: BitString,
        rng: &mut R,
    ) -> Result<Self> {
        check_secret(n, &secret)?;
        check_table_size(n)?;
        let size = 1usize << n;
        let in_count = size / 2 + bias_count(n, epsilon)? as usize;
        let mut in_set = vec![false; size];
        for idx in rand::seq::index::sample(rng, size, in_count) {
            in_set[idx] = true;
        }
        Ok(IpOracle {
            n,
            secret,
            epsilon,
            family: Family::BiasedSet { in_set },
            rng: ChaCha8Rng::seed_from_u64(rng.gen()),
            tally: QueryTally::default(),
        })
    }

    /// The rotation oracle. `epsilon` is the bias the oracle must certify:
    /// the mean of `cos² θₓ` has to reach `½ + ε` within `1e-9`.
    pub fn rotation<R: Rng + ?Sized>(
        n: usize,
        epsilon: f64,
        secret: BitString,
        rule: AngleRule,
        rng: &mut R,
    ) -> Result<Self> {
        check_secret(n, &secret)?;
        check_table_size(n)?;
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::arg(format!(
                "epsilon must lie in (0, 1/2], got {epsilon}"
            )));
        }
        let size = 1usize << n;
        let angles = match rule {
            AngleRule::Constant(theta) => vec![theta; size],
            AngleRule::PerInput(angles) => {
                if angles.len() != size {
                    return Err(Error::arg(format!(
                        "expected {size} angles, got {}",
                        angles.len()
                    )));
                }
                angles
            }
            AngleRule::MatchBias => vec![(0.5 + epsilon).sqrt().acos(); size],
            AngleRule::Uniform { lo, hi } => {
                if lo > hi {
                    return Err(Error::arg("uniform angle range is empty"));
                }
                (0..size).map(|_| rng.gen_range(lo..=hi)).collect()
            }
        };
        if let Some(bad) = angles.iter().find(|t| !(0.0..=FRAC_PI_2).contains(*t)) {
            return Err(Error::arg(format!("angle {bad} outside [0, π/2]")));
        }
        let mean = angles.iter().map(|t| t.cos().powi(2)).sum::<f64>() / size as f64;
        if mean < 0.5 + epsilon - 1e-9 {
            return Err(Error::arg(format!(
                "mean agreement {mean} is below 1/2 + epsilon = {}",
                0.5 + epsilon
            )));
        }
        Ok(IpOracle {
            n,
            secret,
            epsilon,
            family: Family::Rotation { angles },
            rng: ChaCha8Rng::seed_from_u64(rng.gen()),
            tally: QueryTally::default(),
        })
    }

    /// The biased-set distribution sampled lazily: the `i`-th distinct query
    /// lands in `S` with probability `((½+ε)2ⁿ − j) / (2ⁿ − (i−1))`, where `j`
    /// earlier queries are already in `S`. Answers are memoized.
    pub fn lazy<R: Rng + ?Sized>(
        n: usize,
        epsilon: f64,
        secret: BitString,
        rng: &mut R,
    ) -> Result<Self> {
        check_secret(n, &secret)?;
        if n > 64 {
            return Err(Error::arg(format!("lazy oracles support n <= 64, got {n}")));
        }
        let set_size = (1u128 << n) / 2 + bias_count(n, epsilon)?;
        Ok(IpOracle {
            n,
            secret,
            epsilon,
            family: Family::Lazy(LazyState {
                committed: HashMap::new(),
                set_size,
                placed_in_set: 0,
            }),
            rng: ChaCha8Rng::seed_from_u64(rng.gen()),
            tally: QueryTally::default(),
        })
    }

    pub fn secret(&self) -> &BitString {
        &self.secret
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn family(&self) -> FamilyKind {
        match self.family {
            Family::BiasedSet { .. } => FamilyKind::BiasedSet,
            Family::Rotation { .. } => FamilyKind::Rotation,
            Family::Lazy(_) => FamilyKind::Lazy,
        }
    }

    pub fn supports_unitary(&self) -> bool {
        !matches!(self.family, Family::Lazy(_))
    }

    /// Number of distinct inputs queried so far (lazy family only).
    pub fn distinct_queries(&self) -> Option<usize> {
        match &self.family {
            Family::Lazy(state) => Some(state.committed.len()),
            _ => None,
        }
    }

    /// Whether `x` belongs to the agreement set `S` (biased-set family only).
    pub fn in_agreement_set(&self, x: u64) -> Option<bool> {
        match &self.family {
            Family::BiasedSet { in_set } => in_set.get(x as usize).copied(),
            _ => None,
        }
    }

    /// `(αₓ, βₓ)` for every input, read off the family parameters rather
    /// than the unitary: `U|x,0⟩ = αₓ|x, a·x⟩ + βₓ|x, ¬a·x⟩`.
    pub fn amplitude_profile(&self) -> Result<Vec<(f64, f64)>> {
        match &self.family {
            Family::BiasedSet { in_set } => Ok(in_set
                .iter()
                .map(|&inside| if inside { (1.0, 0.0) } else { (0.0, 1.0) })
                .collect()),
            Family::Rotation { angles } => Ok(angles.iter().map(|t| (t.cos(), t.sin())).collect()),
            Family::Lazy(_) => Err(lazy_unitary_error()),
        }
    }

    /// The output superposition of `U_IP` on the basis input `label`
    /// (`n + 1` bits: input then ancilla). At most two terms.
    pub fn ip_unitary_action(&self, label: &BitString) -> Result<Vec<(BitString, Complex64)>> {
        if label.len() != self.n + 1 {
            return Err(Error::LengthMismatch {
                expected: self.n + 1,
                actual: label.len(),
            });
        }
        let idx = label.to_index()?;
        let (x, y) = (idx >> 1, (idx & 1) as usize);
        let mut block = [Complex64::new(0.0, 0.0); 4];
        self.write_block(x, Direction::Forward, &mut block)?;
        let mut out = Vec::with_capacity(2);
        for row in 0..2 {
            let amp = block[row * 2 + y];
            if amp != Complex64::new(0.0, 0.0) {
                out.push((
                    BitString::from_index(self.n + 1, (x << 1) | row as u64)?,
                    amp,
                ));
            }
        }
        Ok(out)
    }

    fn secret_index(&self) -> u64 {
        self.secret.to_index().expect("table families have n <= 24")
    }
}

fn lazy_unitary_error() -> Error {
    Error::UnsupportedMode("lazy oracles answer classical queries only".into())
}

impl IpBlackBox for IpOracle {
    fn input_bits(&self) -> usize {
        self.n
    }

    fn ip_query(&mut self, x: &BitString) -> Result<bool> {
        check_secret(self.n, x)?;
        let truth = self.secret.dot(x)?;
        let correct = match &mut self.family {
            Family::BiasedSet { in_set } => in_set[x.to_index()? as usize],
            Family::Rotation { angles } => {
                let theta = angles[x.to_index()? as usize];
                self.rng.gen::<f64>() < theta.cos().powi(2)
            }
            Family::Lazy(state) => match state.committed.get(x) {
                Some(&inside) => inside,
                None => {
                    let seen = state.committed.len() as u128;
                    let universe = 1u128 << self.n;
                    if seen >= universe {
                        return Err(Error::Exhausted(universe as u64));
                    }
                    let p =
                        (state.set_size - state.placed_in_set) as f64 / (universe - seen) as f64;
                    let inside = self.rng.gen::<f64>() < p;
                    if inside {
                        state.placed_in_set += 1;
                    }
                    state.committed.insert(x.clone(), inside);
                    inside
                }
            },
        };
        self.tally.ip_forward += 1;
        Ok(if correct { truth } else { !truth })
    }

    fn tally(&self) -> QueryTally {
        self.tally
    }
}

impl UnitaryIpOracle for IpOracle {
    fn ancilla_bits(&self) -> usize {
        1
    }

    fn write_block(&self, x: u64, direction: Direction, out: &mut [Complex64]) -> Result<()> {
        if out.len() != 4 {
            return Err(Error::arg("an m = 1 block has four entries"));
        }
        let truth = parity(self.secret_index() & x);
        let block: [f64; 4] = match &self.family {
            Family::BiasedSet { in_set } => {
                if truth ^ !in_set[x as usize] {
                    [0.0, 1.0, 1.0, 0.0]
                } else {
                    [1.0, 0.0, 0.0, 1.0]
                }
            }
            Family::Rotation { angles } => {
                let (s, c) = angles[x as usize].sin_cos();
                // X^{a·x} · R(θ) with R = [[c, -s], [s, c]]; the inverse is the transpose.
                match (truth, direction) {
                    (false, Direction::Forward) => [c, -s, s, c],
                    (false, Direction::Inverse) => [c, s, -s, c],
                    (true, _) => [s, c, c, -s],
                }
            }
            Family::Lazy(_) => return Err(lazy_unitary_error()),
        };
        for (o, v) in out.iter_mut().zip(block) {
            *o = Complex64::new(v, 0.0);
        }
        Ok(())
    }

    fn record_application(&mut self, direction: Direction) {
        self.tally.record(direction);
    }
}

/// Answers 1 exactly on the planted secret.
#[derive(Debug, Clone)]
pub struct EqOracle {
    secret: BitString,
    tally: QueryTally,
}

impl EqOracle {
    pub fn new(secret: BitString) -> Self {
        EqOracle {
            secret,
            tally: QueryTally::default(),
        }
    }
}

impl EqBlackBox for EqOracle {
    fn input_bits(&self) -> usize {
        self.secret.len()
    }

    fn eq_query(&mut self, x: &BitString) -> Result<bool> {
        check_secret(self.secret.len(), x)?;
        self.tally.eq += 1;
        Ok(*x == self.secret)
    }

    fn reflect_marked(&mut self, state: &mut StateVector) -> Result<()> {
        state.apply(&Gate::PhaseFlipPrefix(self.secret.clone()))?;
        self.tally.eq += 1;
        Ok(())
    }

    fn tally(&self) -> QueryTally {
        self.tally
    }
}

/// Reproducible description of an oracle pair, as stored in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub family: FamilyKind,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Hex-encoded secret; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
}

impl OracleSpec {
    /// Builds the IP oracle and the matching EQ oracle. Rotation oracles use
    /// [`AngleRule::MatchBias`].
    pub fn build(&self) -> Result<(IpOracle, EqOracle)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let secret = match &self.secret {
            Some(hex) => BitString::from_hex(self.n, hex)?,
            None => BitString::random(self.n, &mut rng)?,
        };
        let ip = match self.family {
            FamilyKind::BiasedSet => {
                IpOracle::biased_set(self.n, self.epsilon, secret.clone(), &mut rng)?
            }
            FamilyKind::Rotation => IpOracle::rotation(
                self.n,
                self.epsilon,
                secret.clone(),
                AngleRule::MatchBias,
                &mut rng,
            )?,
            FamilyKind::Lazy => IpOracle::lazy(self.n, self.epsilon, secret.clone(), &mut rng)?,
        };
        Ok((ip, EqOracle::new(secret)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn all_inputs(n: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << n).map(move |v| BitString::from_index(n, v).unwrap())
    }

    #[test]
    fn bias_count_gate() {
        assert_eq!(bias_count(8, 0.125).unwrap(), 32);
        assert!(bias_count(8, 0.3).is_err());
        assert!(bias_count(8, 0.0).is_err());
        assert!(bias_count(8, 0.75).is_err());
        assert!(bias_count(2, 0.125).is_err());
    }

    #[test]
    fn biased_set_size_and_agreement() {
        let a = bs("10110010");
        let mut o = IpOracle::biased_set(8, 0.125, a.clone(), &mut rng(1)).unwrap();
        let in_set = (0..256).filter(|&x| o.in_agreement_set(x).unwrap()).count();
        assert_eq!(in_set, 160);
        let agree = all_inputs(8)
            .filter(|x| o.ip_query(x).unwrap() == a.dot(x).unwrap())
            .count();
        assert_eq!(agree, 160);
        assert_eq!(o.tally().ip_forward, 256);
    }

    #[test]
    fn biased_set_wrong_outside_set() {
        let a = bs("0111");
        let mut o = IpOracle::biased_set(4, 0.25, a.clone(), &mut rng(2)).unwrap();
        for x in all_inputs(4) {
            let inside = o.in_agreement_set(x.to_index().unwrap()).unwrap();
            let expected = a.dot(&x).unwrap() ^ !inside;
            assert_eq!(o.ip_query(&x).unwrap(), expected);
        }
    }

    #[test]
    fn half_bias_is_exact() {
        let a = bs("110101");
        let mut o = IpOracle::biased_set(6, 0.5, a.clone(), &mut rng(3)).unwrap();
        for x in all_inputs(6) {
            assert_eq!(o.ip_query(&x).unwrap(), a.dot(&x).unwrap());
        }
    }

    #[test]
    fn biased_set_is_seed_deterministic() {
        let a = bs("1011");
        let o1 = IpOracle::biased_set(4, 0.125, a.clone(), &mut rng(9)).unwrap();
        let o2 = IpOracle::biased_set(4, 0.125, a, &mut rng(9)).unwrap();
        for x in 0..16 {
            assert_eq!(o1.in_agreement_set(x), o2.in_agreement_set(x));
        }
    }

    #[test]
    fn non_dyadic_epsilon_rejected() {
        assert!(IpOracle::biased_set(8, 0.3, bs("00000000"), &mut rng(0)).is_err());
        assert!(IpOracle::lazy(8, 0.3, bs("00000000"), &mut rng(0)).is_err());
        assert!(IpOracle::biased_set(3, 0.25, bs("00"), &mut rng(0)).is_err());
    }

    #[test]
    fn rotation_angle_rules() {
        let a = bs("101");
        // zero angle: exact oracle
        let o =
            IpOracle::rotation(3, 0.5, a.clone(), AngleRule::Constant(0.0), &mut rng(0)).unwrap();
        assert!(o
            .amplitude_profile()
            .unwrap()
            .iter()
            .all(|&(al, be)| al == 1.0 && be == 0.0));
        // balanced rotation carries no bias
        assert!(IpOracle::rotation(
            3,
            0.125,
            a.clone(),
            AngleRule::Constant(FRAC_PI_4),
            &mut rng(0)
        )
        .is_err());
        // π/6: agreement 3/4, fine up to ε = 1/4
        assert!(IpOracle::rotation(
            3,
            0.25,
            a.clone(),
            AngleRule::Constant(FRAC_PI_6),
            &mut rng(0)
        )
        .is_ok());
        assert!(IpOracle::rotation(
            3,
            0.26,
            a.clone(),
            AngleRule::Constant(FRAC_PI_6),
            &mut rng(0)
        )
        .is_err());
        assert!(
            IpOracle::rotation(3, 0.25, a.clone(), AngleRule::Constant(-0.1), &mut rng(0)).is_err()
        );
        assert!(IpOracle::rotation(
            3,
            0.25,
            a.clone(),
            AngleRule::PerInput(vec![0.0; 7]),
            &mut rng(0)
        )
        .is_err());
        let o = IpOracle::rotation(3, 0.125, a, AngleRule::MatchBias, &mut rng(0)).unwrap();
        let mean: f64 = o
            .amplitude_profile()
            .unwrap()
            .iter()
            .map(|p| p.0 * p.0)
            .sum::<f64>()
            / 8.0;
        assert!((mean - 0.625).abs() < 1e-12);
    }

    #[test]
    fn rotation_uniform_rule_checks_mean() {
        let a = bs("1010");
        let o = IpOracle::rotation(
            4,
            0.05,
            a.clone(),
            AngleRule::Uniform { lo: 0.0, hi: 0.6 },
            &mut rng(4),
        );
        assert!(o.is_ok());
        let o = IpOracle::rotation(
            4,
            0.4,
            a,
            AngleRule::Uniform { lo: 0.5, hi: 1.2 },
            &mut rng(4),
        );
        assert!(o.is_err());
    }

    #[test]
    fn rotation_classical_queries_sample_fresh() {
        let a = bs("11");
        let mut o = IpOracle::rotation(
            2,
            0.25,
            a.clone(),
            AngleRule::Constant(FRAC_PI_6),
            &mut rng(6),
        )
        .unwrap();
        let x = bs("10");
        let trials = 20_000;
        let agree = (0..trials)
            .filter(|_| o.ip_query(&x).unwrap() == a.dot(&x).unwrap())
            .count();
        let sigma = (trials as f64 * 0.75 * 0.25).sqrt();
        assert!((agree as f64 - 0.75 * trials as f64).abs() < 5.0 * sigma);
        assert_eq!(o.tally().ip_forward, trials as u64);
    }

    #[test]
    fn lazy_memoizes() {
        let a = bs("1100110011");
        let mut o = IpOracle::lazy(10, 0.125, a, &mut rng(5)).unwrap();
        let xs: Vec<_> = (0..50)
            .map(|v| BitString::from_index(10, v * 7).unwrap())
            .collect();
        let first: Vec<bool> = xs.iter().map(|x| o.ip_query(x).unwrap()).collect();
        let again: Vec<bool> = xs.iter().map(|x| o.ip_query(x).unwrap()).collect();
        assert_eq!(first, again);
        assert_eq!(o.distinct_queries(), Some(50));
        assert_eq!(o.tally().ip_forward, 100);
    }

    #[test]
    fn lazy_full_table_has_exact_bias() {
        let mut o = IpOracle::lazy(2, 0.25, bs("01"), &mut rng(0)).unwrap();
        for x in all_inputs(2) {
            o.ip_query(&x).unwrap();
        }
        // the full table is placed: exactly (1/2 + 1/4)·4 = 3 inputs in S
        assert!(o.ip_query(&bs("00")).is_ok());
        let agree = all_inputs(2)
            .filter(|x| o.ip_query(x).unwrap() == bs("01").dot(x).unwrap())
            .count();
        assert_eq!(agree, 3);
    }

    #[test]
    fn lazy_first_query_probability() {
        // the first placement happens with probability exactly 1/2 + ε
        let trials = 20_000;
        let eps = 0.125;
        let x = bs("000101");
        let a = bs("000100");
        let hits = (0..trials)
            .filter(|&s| {
                let mut o = IpOracle::lazy(6, eps, a.clone(), &mut rng(s)).unwrap();
                o.ip_query(&x).unwrap() == a.dot(&x).unwrap()
            })
            .count();
        let p = 0.5 + eps;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (hits as f64 - p * trials as f64).abs() < 5.0 * sigma,
            "hits = {hits}"
        );
    }

    #[test]
    fn lazy_never_supports_unitary_mode() {
        let o = IpOracle::lazy(4, 0.25, bs("0001"), &mut rng(0)).unwrap();
        assert!(!o.supports_unitary());
        assert!(matches!(
            o.ip_unitary_action(&bs("00010")),
            Err(Error::UnsupportedMode(_))
        ));
        assert!(o.amplitude_profile().is_err());
    }

    #[test]
    fn unitary_action_of_biased_set() {
        let a = bs("1101");
        let o = IpOracle::biased_set(4, 0.25, a.clone(), &mut rng(8)).unwrap();
        for x in 0..16u64 {
            let xs = BitString::from_index(4, x).unwrap();
            for y in 0..2u64 {
                let label = BitString::from_index(5, (x << 1) | y).unwrap();
                let terms = o.ip_unitary_action(&label).unwrap();
                assert_eq!(terms.len(), 1);
                let (out, amp) = &terms[0];
                assert_eq!(*amp, Complex64::new(1.0, 0.0));
                let ip = a.dot(&xs).unwrap() ^ !o.in_agreement_set(x).unwrap();
                assert_eq!(out.to_index().unwrap(), (x << 1) | (y ^ ip as u64));
            }
        }
    }

    #[test]
    fn unitary_action_of_rotation() {
        let a = bs("011");
        let theta = 0.3;
        let o =
            IpOracle::rotation(3, 0.1, a.clone(), AngleRule::Constant(theta), &mut rng(0)).unwrap();
        for x in 0..8u64 {
            let truth = a.dot(&BitString::from_index(3, x).unwrap()).unwrap() as u64;
            let terms = o
                .ip_unitary_action(&BitString::from_index(4, x << 1).unwrap())
                .unwrap();
            let amp_of = |y: u64| {
                terms
                    .iter()
                    .find(|(l, _)| l.to_index().unwrap() == (x << 1) | y)
                    .map(|t| t.1.re)
                    .unwrap()
            };
            assert!((amp_of(truth) - theta.cos()).abs() < 1e-15);
            assert!((amp_of(1 - truth) - theta.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn eq_oracle_sweep() {
        let a = bs("1001");
        let mut eq = EqOracle::new(a.clone());
        let ones = all_inputs(4)
            .filter(|x| *x != a)
            .filter(|x| eq.eq_query(x).unwrap())
            .count();
        assert_eq!(ones, 0);
        assert!(eq.eq_query(&a).unwrap());
        assert_eq!(eq.tally().eq, 16);
        assert!(eq.eq_query(&bs("100")).is_err());
    }

    #[test]
    fn spec_builds_reproducibly() {
        let spec = OracleSpec {
            family: FamilyKind::BiasedSet,
            n: 6,
            epsilon: 0.125,
            seed: 77,
            secret: None,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            json,
            r#"{"family":"biased_set","n":6,"epsilon":0.125,"seed":77}"#
        );
        let back: OracleSpec = serde_json::from_str(&json).unwrap();
        let (ip1, _) = spec.build().unwrap();
        let (ip2, eq2) = back.build().unwrap();
        assert_eq!(ip1.secret(), ip2.secret());
        assert_eq!(eq2.input_bits(), 6);
        let with_secret = OracleSpec {
            secret: Some("2a".into()),
            ..spec
        };
        assert_eq!(with_secret.build().unwrap().0.secret(), &bs("101010"));
    }

    #[test]
    fn tallies_add() {
        let t = QueryTally {
            ip_forward: 1,
            ip_inverse: 2,
            eq: 3,
            f_calls: 4,
        };
        let mut sum = t + t;
        assert_eq!(sum.total(), 12);
        assert_eq!(sum.f_calls, 8);
        sum.reset();
        assert_eq!(sum, QueryTally::default());
    }
}
