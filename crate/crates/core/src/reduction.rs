//! From predicting the hard predicate to inverting the permutation.
//!
//! For a permutation `f` on `n` bits, `f̃(y, x) = (f(y), x)` and the
//! predicate is `h(y, x) = y·x`. A predictor `G` receives `(f(y), x)` and
//! guesses `h(y, x)`. Given `b = f(a)`, the row `x ↦ G(b, x)` is a noisy IP
//! oracle for the secret `a`, and `x ↦ [f(x) = b]` is an exact EQ oracle, so
//! either GL solver recovers `a` using only `G` and `f`.
//!
//! The permutations here are toys: they are bijections with no hardness.

use std::cell::OnceCell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gl_classical::{solve_classical, DecoderParams};
use crate::gl_quantum::{solve_qsearch, QSearchParams, SolveReport};
use crate::oracles::{parity, EqBlackBox, IpBlackBox, QueryTally, UnitaryIpOracle};
use crate::seeds::splitmix64;
use crate::statevector::{Direction, Gate, StateVector};

/// Largest `n` for table permutations.
pub const MAX_TABLE_PERMUTATION_BITS: usize = 16;
/// Largest `n` for table predictors (`4ⁿ` bits of storage).
pub const MAX_TABLE_PREDICTOR_BITS: usize = 14;
/// Largest `n` for exhaustive profiling and binding audits.
pub const MAX_EXHAUSTIVE_BITS: usize = 12;

const FEISTEL_ROUNDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationKind {
    Table,
    OddMultiplier,
    FeistelRounds,
}

impl PermutationKind {
    pub const ALL: [PermutationKind; 3] = [
        PermutationKind::Table,
        PermutationKind::OddMultiplier,
        PermutationKind::FeistelRounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PermutationKind::Table => "table",
            PermutationKind::OddMultiplier => "odd_multiplier",
            PermutationKind::FeistelRounds => "feistel_rounds",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Inversion hardness a permutation is assumed to have. Recorded for
/// experiment metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardnessClaim {
    pub delta: f64,
    pub circuit_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSpec {
    pub kind: PermutationKind,
    pub n: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardness: Option<HardnessClaim>,
}

impl PermutationSpec {
    pub fn build(&self) -> Result<Permutation> {
        make_toy_permutation(self.kind, self.n, self.seed)
    }
}

type IndexRule = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

#[derive(Clone)]
enum Rule {
    Table {
        forward: Vec<u32>,
        inverse: Vec<u32>,
    },
    OddMultiplier {
        multiplier: u64,
        inverse: u64,
    },
    Feistel {
        keys: [u64; FEISTEL_ROUNDS],
    },
    Custom(IndexRule),
}

/// A bijection on `{0,1}ⁿ`, `n <= 64`.
#[derive(Clone)]
pub struct Permutation {
    n: usize,
    rule: Rule,
    spec: Option<PermutationSpec>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Permutation")
            .field("n", &self.n)
            .field("spec", &self.spec)
            .finish()
    }
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Inverse of an odd number modulo 2⁶⁴ by Newton iteration.
fn inverse_mod_2_64(odd: u64) -> u64 {
    let mut inv = odd;
    for _ in 0..6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(odd.wrapping_mul(inv)));
    }
    inv
}

/// Builds one of the shipped toy permutations, deterministically from `seed`.
pub fn make_toy_permutation(kind: PermutationKind, n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 || n > 64 {
        return Err(Error::arg(format!(
            "permutations need 1 <= n <= 64, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = match kind {
        PermutationKind::Table => {
            if n > MAX_TABLE_PERMUTATION_BITS {
                return Err(Error::arg(format!(
                    "table permutations need n <= {MAX_TABLE_PERMUTATION_BITS}, got {n}"
                )));
            }
            let mut forward: Vec<u32> = (0..1u32 << n).collect();
            rand::seq::SliceRandom::shuffle(forward.as_mut_slice(), &mut rng);
            Permutation::from_table(forward)?
        }
        PermutationKind::OddMultiplier => Permutation::odd_multiplier(n, rng.gen::<u64>() | 1)?,
        PermutationKind::FeistelRounds => Permutation {
            n,
            rule: Rule::Feistel { keys: rng.gen() },
            spec: None,
        },
    };
    perm.spec = Some(PermutationSpec {
        kind,
        n,
        seed,
        hardness: None,
    });
    if n <= MAX_TABLE_PERMUTATION_BITS {
        if !perm.is_bijective()? {
            return Err(Error::arg(format!(
                "{} permutation failed its bijectivity audit",
                kind.name()
            )));
        }
    } else {
        perm.spot_check_round_trips(&mut rng)?;
    }
    Ok(perm)
}

impl Permutation {
    pub fn identity(n: usize) -> Result<Self> {
        Self::odd_multiplier(n, 1)
    }

    /// `x ↦ multiplier·x mod 2ⁿ`. The multiplier must be odd.
    pub fn odd_multiplier(n: usize, multiplier: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::arg(format!(
                "permutations need 1 <= n <= 64, got {n}"
            )));
        }
        if multiplier.is_multiple_of(2) {
            return Err(Error::arg("multiplier must be odd"));
        }
        let multiplier = multiplier & mask(n);
        Ok(Permutation {
            n,
            rule: Rule::OddMultiplier {
                multiplier,
                inverse: inverse_mod_2_64(multiplier) & mask(n),
            },
            spec: None,
        })
    }

    /// Wraps an explicit table; `table[x]` is the image of `x`.
    pub fn from_table(forward: Vec<u32>) -> Result<Self> {
        if forward.len() < 2 || !forward.len().is_power_of_two() {
            return Err(Error::arg("table length must be a power of two >= 2"));
        }
        let n = forward.len().trailing_zeros() as usize;
        if n > MAX_TABLE_PERMUTATION_BITS {
            return Err(Error::arg(format!(
                "table permutations need n <= {MAX_TABLE_PERMUTATION_BITS}"
            )));
        }
        let mut inverse = vec![u32::MAX; forward.len()];
        for (x, &y) in forward.iter().enumerate() {
            let slot = inverse
                .get_mut(y as usize)
                .ok_or_else(|| Error::arg(format!("table value {y} out of range")))?;
            if *slot != u32::MAX {
                return Err(Error::arg(format!("table maps two inputs to {y}")));
            }
            *slot = x as u32;
        }
        Ok(Permutation {
            n,
            rule: Rule::Table { forward, inverse },
            spec: None,
        })
    }

    /// An arbitrary rule on `n`-bit indices, taken on trust. Use
    /// [`Permutation::is_bijective`] to audit it.
    pub fn from_rule_unchecked(
        n: usize,
        rule: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::arg(format!(
                "permutations need 1 <= n <= 64, got {n}"
            )));
        }
        let m = mask(n);
        Ok(Permutation {
            n,
            rule: Rule::Custom(Arc::new(move |x| rule(x) & m)),
            spec: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> Option<&PermutationSpec> {
        self.spec.as_ref()
    }

    pub fn apply_index(&self, x: u64) -> u64 {
        match &self.rule {
            Rule::Table { forward, .. } => forward[x as usize] as u64,
            Rule::OddMultiplier { multiplier, .. } => x.wrapping_mul(*multiplier) & mask(self.n),
            Rule::Feistel { keys } => self.feistel(x, keys, false),
            Rule::Custom(rule) => rule(x),
        }
    }

    /// Preimage of `y`, when the rule can be run backwards.
    pub fn invert_index(&self, y: u64) -> Option<u64> {
        match &self.rule {
            Rule::Table { inverse, .. } => Some(inverse[y as usize] as u64),
            Rule::OddMultiplier { inverse, .. } => Some(y.wrapping_mul(*inverse) & mask(self.n)),
            Rule::Feistel { keys } => Some(self.feistel(y, keys, true)),
            Rule::Custom(_) => None,
        }
    }

    pub fn apply(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        BitString::from_index(self.n, self.apply_index(x.to_index()?))
    }

    /// Exhaustive check that all `2ⁿ` images are distinct.
    pub fn is_bijective(&self) -> Result<bool> {
        if self.n > MAX_TABLE_PERMUTATION_BITS {
            return Err(Error::arg(format!(
                "exhaustive audit needs n <= {MAX_TABLE_PERMUTATION_BITS}, got {}",
                self.n
            )));
        }
        let mut seen = vec![false; 1 << self.n];
        for x in 0..1u64 << self.n {
            let y = self.apply_index(x) as usize;
            if std::mem::replace(&mut seen[y], true) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn spot_check_round_trips<R: Rng>(&self, rng: &mut R) -> Result<()> {
        for _ in 0..256 {
            let x = rng.gen::<u64>() & mask(self.n);
            if self.invert_index(self.apply_index(x)) != Some(x) {
                return Err(Error::arg("permutation failed a round-trip spot check"));
            }
        }
        Ok(())
    }

    /// Alternating Feistel rounds on a `⌈n/2⌉`-bit left half (high bits) and
    /// a `⌊n/2⌋`-bit right half. Each round XORs one half with a keyed hash
    /// of the other, so it is invertible for any split.
    fn feistel(&self, x: u64, keys: &[u64; FEISTEL_ROUNDS], backwards: bool) -> u64 {
        let right_bits = self.n / 2;
        let left_mask = mask(self.n - right_bits);
        let right_mask = if right_bits == 0 { 0 } else { mask(right_bits) };
        let mut left = x >> right_bits;
        let mut right = x & right_mask;
        let mut step = |round: usize| {
            if round.is_multiple_of(2) {
                left ^= splitmix64(keys[round] ^ right) & left_mask;
            } else {
                right ^= splitmix64(keys[round] ^ left) & right_mask;
            }
        };
        if backwards {
            (0..FEISTEL_ROUNDS).rev().for_each(&mut step);
        } else {
            (0..FEISTEL_ROUNDS).for_each(&mut step);
        }
        (left << right_bits) | right
    }
}

/// `f̃(y, x) = (f(y), x)`.
pub fn f_tilde(f: &Permutation, y: &BitString, x: &BitString) -> Result<(BitString, BitString)> {
    y.check_len(x)?;
    Ok((f.apply(y)?, x.clone()))
}

type PredictRule = Arc<dyn Fn(&BitString, &BitString) -> bool + Send + Sync>;

#[derive(Clone)]
enum PredictorRule {
    /// Row `b` holds `G(b, x)` for every `x`, packed little-endian by `x`.
    Table {
        words_per_row: usize,
        bits: Vec<u64>,
    },
    Custom(PredictRule),
}

/// How a synthetic predictor was built.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub delta: f64,
    pub epsilon: f64,
    /// Keys `y` whose rows agree with `h(y, ·)` on exactly `(½ + ε)·2ⁿ`
    /// inputs, ascending.
    pub good_keys: Vec<u64>,
}

/// A black box `G(b, x)` that tries to predict `h(f⁻¹(b), x)`.
#[derive(Clone)]
pub struct Predictor {
    n: usize,
    rule: PredictorRule,
    planted: Option<Planted>,
}

impl fmt::Debug for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Predictor")
            .field("n", &self.n)
            .field("table", &self.is_table())
            .field("planted", &self.planted)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub permutation: PermutationSpec,
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl PredictorSpec {
    pub fn build(&self) -> Result<(Permutation, Predictor)> {
        let f = self.permutation.build()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let g = make_synthetic_predictor(&f, self.delta, self.epsilon, &mut rng)?;
        Ok((f, g))
    }
}

fn check_table_predictor_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_TABLE_PREDICTOR_BITS {
        return Err(Error::arg(format!(
            "table predictors need 1 <= n <= {MAX_TABLE_PREDICTOR_BITS}, got {n}"
        )));
    }
    Ok(())
}

impl Predictor {
    fn empty_table(n: usize) -> Result<Self> {
        check_table_predictor_size(n)?;
        let words_per_row = (1usize << n).div_ceil(64);
        Ok(Predictor {
            n,
            rule: PredictorRule::Table {
                words_per_row,
                bits: vec![0; words_per_row << n],
            },
            planted: None,
        })
    }

    /// Materializes `rule(b, x)` for every `(b, x)` into a table predictor.
    pub fn tabulate(n: usize, rule: impl Fn(&BitString, &BitString) -> bool) -> Result<Self> {
        let mut g = Self::empty_table(n)?;
        let inputs: Vec<BitString> = (0..1u64 << n)
            .map(|v| BitString::from_index(n, v))
            .collect::<Result<_>>()?;
        for (b_index, b) in inputs.iter().enumerate() {
            for (x_index, x) in inputs.iter().enumerate() {
                if rule(b, x) {
                    g.set_table_bit(b_index as u64, x_index as u64);
                }
            }
        }
        Ok(g)
    }

    /// A predictor evaluated on demand. It cannot serve unitary queries.
    pub fn from_fn(
        n: usize,
        rule: impl Fn(&BitString, &BitString) -> bool + Send + Sync + 'static,
    ) -> Self {
        Predictor {
            n,
            rule: PredictorRule::Custom(Arc::new(rule)),
            planted: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_table(&self) -> bool {
        matches!(self.rule, PredictorRule::Table { .. })
    }

    /// Construction record of a synthetic predictor.
    pub fn planted(&self) -> Option<&Planted> {
        self.planted.as_ref()
    }

    pub fn predict(&self, b: &BitString, x: &BitString) -> Result<bool> {
        for s in [b, x] {
            if s.len() != self.n {
                return Err(Error::LengthMismatch {
                    expected: self.n,
                    actual: s.len(),
                });
            }
        }
        match &self.rule {
            PredictorRule::Table { .. } => Ok(self.table_bit(b.to_index()?, x.to_index()?)),
            PredictorRule::Custom(rule) => Ok(rule(b, x)),
        }
    }

    fn table_bit(&self, b: u64, x: u64) -> bool {
        match &self.rule {
            PredictorRule::Table {
                words_per_row,
                bits,
            } => {
                let word = bits[b as usize * words_per_row + (x as usize >> 6)];
                (word >> (x & 63)) & 1 == 1
            }
            PredictorRule::Custom(_) => unreachable!("table access on a custom predictor"),
        }
    }

    fn set_table_bit(&mut self, b: u64, x: u64) {
        if let PredictorRule::Table {
            words_per_row,
            bits,
        } = &mut self.rule
        {
            bits[b as usize * *words_per_row + (x as usize >> 6)] ^= 1 << (x & 63);
        }
    }
}

/// A table predictor with an exactly known profile: `⌈δ·2ⁿ⌉` uniformly chosen
/// keys `y` agree with `h(y, ·)` on exactly `(½ + ε)·2ⁿ` inputs; every other
/// row is uniformly random.
pub fn make_synthetic_predictor<R: Rng + ?Sized>(
    f: &Permutation,
    delta: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Predictor> {
    let n = f.n();
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::arg(format!("delta must lie in [0, 1], got {delta}")));
    }
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::arg(format!(
            "epsilon must lie in [0, 1/2], got {epsilon}"
        )));
    }
    let size = 1usize << n;
    let scaled = epsilon * size as f64;
    if scaled.fract() != 0.0 {
        return Err(Error::arg(format!(
            "epsilon·2^n = {scaled} is not an integer"
        )));
    }
    let mut g = Predictor::empty_table(n)?;
    let good_count = (delta * size as f64).ceil() as usize;
    let disagree = size / 2 - scaled as usize;
    let mut good = vec![false; size];
    let mut good_keys: Vec<u64> = rand::seq::index::sample(rng, size, good_count)
        .into_iter()
        .map(|y| {
            good[y] = true;
            y as u64
        })
        .collect();
    good_keys.sort_unstable();
    for (y, is_good) in good.into_iter().enumerate() {
        let b = f.apply_index(y as u64);
        if is_good {
            for x in 0..size as u64 {
                if parity(y as u64 & x) {
                    g.set_table_bit(b, x);
                }
            }
            for x in rand::seq::index::sample(rng, size, disagree) {
                g.set_table_bit(b, x as u64);
            }
        } else {
            for x in 0..size as u64 {
                if rng.gen::<bool>() {
                    g.set_table_bit(b, x);
                }
            }
        }
    }
    g.planted = Some(Planted {
        delta,
        epsilon,
        good_keys,
    });
    Ok(g)
}

/// Exact prediction statistics of `G` against `h` over all `(y, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionProfile {
    pub n: usize,
    /// `agreements[y] = #{x : G(f(y), x) = y·x}`.
    pub agreements: Vec<u64>,
    /// `Pr_{y,x}[G(f̃(y, x)) = h(y, x)]`.
    pub mean_agreement: f64,
    /// For each agreement level above one half, the fraction `δ` of keys
    /// reaching it and the bias `ε` it represents; best `ε` first.
    pub frontier: Vec<(f64, f64)>,
}

impl PredictionProfile {
    fn universe(&self) -> f64 {
        (1u64 << self.n) as f64
    }

    /// Whether at least a `δ` fraction of keys are `ε`-good.
    pub fn certifies(&self, delta: f64, epsilon: f64) -> bool {
        let size = self.universe();
        let threshold = (0.5 + epsilon) * size;
        let good = self
            .agreements
            .iter()
            .filter(|&&c| c as f64 >= threshold)
            .count();
        good as f64 >= delta * size
    }
}

pub fn profile_predictor(g: &Predictor, f: &Permutation) -> Result<PredictionProfile> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: g.n(),
        });
    }
    if n > MAX_EXHAUSTIVE_BITS {
        return Err(Error::arg(format!(
            "profiling needs n <= {MAX_EXHAUSTIVE_BITS}, got {n}"
        )));
    }
    let size = 1u64 << n;
    let mut agreements = Vec::with_capacity(size as usize);
    for y in 0..size {
        let b = f.apply_index(y);
        let count = match &g.rule {
            PredictorRule::Table { .. } => (0..size)
                .filter(|&x| g.table_bit(b, x) == parity(y & x))
                .count(),
            PredictorRule::Custom(rule) => {
                let b = BitString::from_index(n, b)?;
                let mut count = 0;
                for x in 0..size {
                    if rule(&b, &BitString::from_index(n, x)?) == parity(y & x) {
                        count += 1;
                    }
                }
                count
            }
        };
        agreements.push(count as u64);
    }
    let total: u64 = agreements.iter().sum();
    let mean_agreement = total as f64 / (size * size) as f64;

    let mut levels: Vec<u64> = agreements
        .iter()
        .copied()
        .filter(|&c| 2 * c > size)
        .collect();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    let frontier = levels
        .into_iter()
        .map(|level| {
            let reach = agreements.iter().filter(|&&c| c >= level).count();
            (reach as f64 / size as f64, level as f64 / size as f64 - 0.5)
        })
        .collect();
    Ok(PredictionProfile {
        n,
        agreements,
        mean_agreement,
        frontier,
    })
}

/// Whether the profile certifies `(ε/(1−ε), ε/2)`-prediction.
///
/// Compared without division: a key is `ε/2`-good when `2·count >= (1+ε)·2ⁿ`,
/// and the good keys suffice when `good·(1−ε) >= ε·2ⁿ`.
pub fn check_lemma1(profile: &PredictionProfile, epsilon: f64) -> bool {
    let size = profile.universe();
    let good = profile
        .agreements
        .iter()
        .filter(|&&c| 2.0 * c as f64 >= (1.0 + epsilon) * size)
        .count();
    good as f64 * (1.0 - epsilon) >= epsilon * size
}

/// The implication itself: overall agreement at least `½ + ε` forces the
/// `(ε/(1−ε), ε/2)` certificate. True whenever the premise fails.
pub fn lemma1_holds(profile: &PredictionProfile, epsilon: f64) -> bool {
    profile.mean_agreement < 0.5 + epsilon || check_lemma1(profile, epsilon)
}

/// The row `x ↦ G(b, x)` as an IP black box for the secret `f⁻¹(b)`.
/// Every query, classical or unitary, is one call to `G`.
#[derive(Debug)]
pub struct PredictorIpOracle<'a> {
    predictor: &'a Predictor,
    b: BitString,
    b_index: u64,
    tally: QueryTally,
}

pub fn predictor_ip_oracle<'a>(g: &'a Predictor, b: &BitString) -> Result<PredictorIpOracle<'a>> {
    if b.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            actual: b.len(),
        });
    }
    Ok(PredictorIpOracle {
        predictor: g,
        b: b.clone(),
        b_index: if b.len() <= 64 { b.to_index()? } else { 0 },
        tally: QueryTally::default(),
    })
}

impl PredictorIpOracle<'_> {
    /// Predictor calls made so far.
    pub fn g_calls(&self) -> u64 {
        self.tally.ip_total()
    }
}

impl IpBlackBox for PredictorIpOracle<'_> {
    fn input_bits(&self) -> usize {
        self.predictor.n()
    }

    fn ip_query(&mut self, x: &BitString) -> Result<bool> {
        let answer = self.predictor.predict(&self.b, x)?;
        self.tally.ip_forward += 1;
        Ok(answer)
    }

    fn tally(&self) -> QueryTally {
        self.tally
    }
}

impl UnitaryIpOracle for PredictorIpOracle<'_> {
    fn ancilla_bits(&self) -> usize {
        1
    }

    fn write_block(&self, x: u64, _direction: Direction, out: &mut [Complex64]) -> Result<()> {
        if !self.predictor.is_table() {
            return Err(Error::UnsupportedMode(
                "unitary queries need a table-backed predictor".into(),
            ));
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let block = if self.predictor.table_bit(self.b_index, x) {
            [zero, one, one, zero]
        } else {
            [one, zero, zero, one]
        };
        out.copy_from_slice(&block);
        Ok(())
    }

    fn record_application(&mut self, direction: Direction) {
        self.tally.record(direction);
    }
}

/// EQ simulated with one evaluation of `f`: accepts `x` iff `f(x) = b`.
#[derive(Debug)]
pub struct PermutationEqOracle<'a> {
    f: &'a Permutation,
    b: BitString,
    tally: QueryTally,
    marked: OnceCell<Option<u64>>,
}

pub fn permutation_eq_oracle<'a>(
    f: &'a Permutation,
    b: &BitString,
) -> Result<PermutationEqOracle<'a>> {
    if b.len() != f.n() {
        return Err(Error::LengthMismatch {
            expected: f.n(),
            actual: b.len(),
        });
    }
    Ok(PermutationEqOracle {
        f,
        b: b.clone(),
        tally: QueryTally::default(),
        marked: OnceCell::new(),
    })
}

impl EqBlackBox for PermutationEqOracle<'_> {
    fn input_bits(&self) -> usize {
        self.f.n()
    }

    fn eq_query(&mut self, x: &BitString) -> Result<bool> {
        let image = self.f.apply(x)?;
        self.tally.eq += 1;
        self.tally.f_calls += 1;
        Ok(image == self.b)
    }

    fn reflect_marked(&mut self, state: &mut StateVector) -> Result<()> {
        let n = self.f.n();
        let target = self.b.to_index()?;
        // Classical simulation of the phase oracle x ↦ (−1)^{[f(x) = b]}.
        let marked = *self
            .marked
            .get_or_init(|| (0..1u64 << n).find(|&x| self.f.apply_index(x) == target));
        if let Some(x) = marked {
            state.apply(&Gate::PhaseFlipPrefix(BitString::from_index(n, x)?))?;
        }
        self.tally.eq += 1;
        self.tally.f_calls += 1;
        Ok(())
    }

    fn tally(&self) -> QueryTally {
        self.tally
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InversionMode {
    Quantum(QSearchParams),
    Classical(DecoderParams),
}

/// Recovers `a` from `b = f(a)` with `G` as the IP source and `f` as the EQ
/// source. The report's tally counts `G` calls as IP queries and every EQ as
/// one `f` call.
pub fn invert_with_predictor<R: Rng + ?Sized>(
    f: &Permutation,
    g: &Predictor,
    b: &BitString,
    mode: InversionMode,
    rng: &mut R,
) -> Result<SolveReport> {
    let mut ip = predictor_ip_oracle(g, b)?;
    let mut eq = permutation_eq_oracle(f, b)?;
    let report = match mode {
        InversionMode::Quantum(params) => {
            if !g.is_table() {
                return Err(Error::UnsupportedMode(
                    "quantum inversion needs a table-backed predictor".into(),
                ));
            }
            if f.n() > MAX_TABLE_PREDICTOR_BITS {
                return Err(Error::arg(format!(
                    "quantum inversion needs n <= {MAX_TABLE_PREDICTOR_BITS}"
                )));
            }
            solve_qsearch(&mut ip, &mut eq, &params, rng)?
        }
        InversionMode::Classical(params) => solve_classical(&mut ip, &mut eq, &params, rng)?,
    };
    if let Some(a) = &report.found {
        assert_eq!(&f.apply(a)?, b, "EQ gate accepted a non-preimage");
    }
    Ok(report)
}
