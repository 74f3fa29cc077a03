//! Classical list decoder for the noisy inner-product problem.
//!
//! Draw `k` uniform seeds `s¹..sᵏ` and span them into the `2ᵏ − 1` pairwise
//! independent points `r^J = ⊕_{i∈J} sⁱ`. For every guess `σ` of the `k`
//! parities `a·sⁱ`, the parities of all `r^J` follow by linearity, and each
//! bit `a_j` is recovered by a majority vote over `IP(r^J ⊕ e_j) ⊕ σ_J`.
//! Candidates are confirmed with EQ queries in increasing order of `σ`.
//!
//! All `2ᵏ` vote tallies for a bit are one Walsh-Hadamard transform of the
//! `±1` answers, so decoding costs `O(n·k·2ᵏ)` rather than `O(n·4ᵏ)`.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gl_quantum::SolveReport;
use crate::oracles::{EqBlackBox, IpBlackBox};

const MAX_SEEDS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderParams {
    /// Number of seeds `k`.
    pub seeds: u32,
    /// Votes per bit, always `2ᵏ − 1`.
    pub votes: u64,
    /// How many seed-parity guesses to check with EQ, at most `2ᵏ`.
    pub candidate_budget: u64,
    /// Success probability the parameters were sized for.
    pub target_success: f64,
}

impl DecoderParams {
    pub fn new(seeds: u32, candidate_budget: u64, target_success: f64) -> Result<Self> {
        if seeds == 0 || seeds > MAX_SEEDS {
            return Err(Error::arg(format!(
                "seed count must lie in 1..={MAX_SEEDS}, got {seeds}"
            )));
        }
        if candidate_budget == 0 || candidate_budget > 1 << seeds {
            return Err(Error::arg(format!(
                "candidate budget must lie in 1..={}, got {candidate_budget}",
                1u64 << seeds
            )));
        }
        Ok(DecoderParams {
            seeds,
            votes: (1 << seeds) - 1,
            candidate_budget,
            target_success,
        })
    }

    /// IP queries one run makes: `n·(2ᵏ − 1)`.
    pub fn ip_queries(&self, n: usize) -> u64 {
        n as u64 * self.votes
    }
}

/// Smallest `k` whose vote count `2ᵏ − 1` reaches `n / (2(1 − δ*)ε²)`, so that
/// Chebyshev's bound on each bit plus a union bound over the `n` bits leaves
/// failure probability at most `1 − δ*`.
pub fn derive_params(n: usize, epsilon: f64, target_success: f64) -> Result<DecoderParams> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::arg(format!(
            "epsilon must lie in (0, 1/2], got {epsilon}"
        )));
    }
    if !(target_success > 0.0 && target_success < 1.0) {
        return Err(Error::arg(format!(
            "target success must lie in (0, 1), got {target_success}"
        )));
    }
    let needed = n as f64 / (2.0 * (1.0 - target_success) * epsilon * epsilon);
    let seeds = (1..=MAX_SEEDS)
        .find(|&k| ((1u64 << k) - 1) as f64 >= needed)
        .ok_or_else(|| Error::arg(format!("{needed} votes exceed the supported maximum")))?;
    DecoderParams::new(seeds, 1 << seeds, target_success)
}

/// In-place Walsh-Hadamard transform: `out[σ] = Σ_J in[J]·(−1)^{|σ ∧ J|}`.
fn walsh_hadamard(values: &mut [i64]) {
    let mut h = 1;
    while h < values.len() {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

/// Runs the list decoder. Makes exactly `n·(2ᵏ − 1)` IP queries and at most
/// `candidate_budget` EQ queries.
pub fn solve_classical<I, E, R>(
    ip: &mut I,
    eq: &mut E,
    params: &DecoderParams,
    rng: &mut R,
) -> Result<SolveReport>
where
    I: IpBlackBox + ?Sized,
    E: EqBlackBox + ?Sized,
    R: Rng + ?Sized,
{
    let n = ip.input_bits();
    if eq.input_bits() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: eq.input_bits(),
        });
    }
    let k = params.seeds as usize;
    let span = 1usize << k;
    let seeds: Vec<BitString> = (0..k)
        .map(|_| BitString::random(n, rng))
        .collect::<Result<_>>()?;

    // points[J] = ⊕ of the seeds selected by the bits of J
    let mut points = Vec::with_capacity(span);
    points.push(BitString::zeros(n)?);
    for j in 1..span {
        let low = j.trailing_zeros() as usize;
        let prev = points[j & (j - 1)].xor(&seeds[low])?;
        points.push(prev);
    }

    let mut spectra = Vec::with_capacity(n);
    for bit in 0..n {
        let mut signs = vec![0i64; span];
        for (sign, point) in signs.iter_mut().zip(&points).skip(1) {
            let mut query = point.clone();
            query.flip(bit)?;
            *sign = if ip.ip_query(&query)? { -1 } else { 1 };
        }
        walsh_hadamard(&mut signs);
        spectra.push(signs);
    }

    let mut found = None;
    let mut checked = 0u64;
    for guess in 0..params.candidate_budget.min(span as u64) as usize {
        let mut candidate = BitString::zeros(n)?;
        for (bit, spectrum) in spectra.iter().enumerate() {
            // negative sum: more votes for 1; ties go to 0
            if spectrum[guess] < 0 {
                candidate.set(bit, true)?;
            }
        }
        checked += 1;
        if eq.eq_query(&candidate)? {
            found = Some(candidate);
            break;
        }
    }
    Ok(SolveReport::new(found, ip.tally() + eq.tally(), checked, 0))
}
