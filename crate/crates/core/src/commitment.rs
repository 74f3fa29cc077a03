//! Bit and qubit commitment built from a permutation `f`.
//!
//! To commit to `z`, Alice draws `a, x`, and sends `(b, x, c) = (f(a), x, z ⊕ a·x)`.
//! Opening reveals `a`. Since `f` is a bijection, only one `a` matches `b`, so
//! the scheme is perfectly binding. Predicting `z` from `(b, x, c)` amounts to
//! predicting `a·x` from `(f(a), x)`, which the reduction turns into an
//! inverter for `f`.
//!
//! A qubit `ψ` is committed by masking it with `X^{h₁} Z^{h₂}`, where each
//! `hᵢ = aᵢ·xᵢ` is bit-committed. Over uniform keys the masked qubit is
//! within `2⁻ⁿ` of the maximally mixed state.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::reduction::{Permutation, Predictor, MAX_EXHAUSTIVE_BITS};
use crate::statevector::{Gate, StateVector};

/// What Bob receives at commit time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitCommitment {
    pub b: BitString,
    pub x: BitString,
    pub c: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub a: BitString,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitCommitment {
    pub masked_state: StateVector,
    pub b1: BitString,
    pub b2: BitString,
    pub x1: BitString,
    pub x2: BitString,
}

/// Bob's verdict on an opening.
#[derive(Debug, Clone, PartialEq)]
pub enum Decommit<T> {
    Accept(T),
    Reject,
}

impl<T> Decommit<T> {
    pub fn accepted(self) -> Option<T> {
        match self {
            Decommit::Accept(v) => Some(v),
            Decommit::Reject => None,
        }
    }
}

fn check_n(f: &Permutation, s: &BitString) -> Result<()> {
    if s.len() != f.n() {
        return Err(Error::LengthMismatch {
            expected: f.n(),
            actual: s.len(),
        });
    }
    Ok(())
}

pub fn commit_bit<R: Rng + ?Sized>(
    f: &Permutation,
    z: bool,
    rng: &mut R,
) -> Result<(BitCommitment, Opening)> {
    let a = BitString::random(f.n(), rng)?;
    let x = BitString::random(f.n(), rng)?;
    commit_bit_with(f, z, a, x)
}

/// [`commit_bit`] with Alice's randomness supplied by the caller.
pub fn commit_bit_with(
    f: &Permutation,
    z: bool,
    a: BitString,
    x: BitString,
) -> Result<(BitCommitment, Opening)> {
    check_n(f, &a)?;
    check_n(f, &x)?;
    let c = z ^ a.dot(&x)?;
    Ok((
        BitCommitment {
            b: f.apply(&a)?,
            x,
            c,
        },
        Opening { a },
    ))
}

pub fn decommit_bit(
    f: &Permutation,
    com: &BitCommitment,
    open: &Opening,
) -> Result<Decommit<bool>> {
    check_n(f, &open.a)?;
    if f.apply(&open.a)? != com.b {
        return Ok(Decommit::Reject);
    }
    Ok(Decommit::Accept(com.c ^ open.a.dot(&com.x)?))
}

/// Number of openings `a′` that Bob would accept for `com`.
pub fn audit_binding(f: &Permutation, com: &BitCommitment) -> Result<u64> {
    let n = f.n();
    if n > MAX_EXHAUSTIVE_BITS {
        return Err(Error::arg(format!(
            "binding audit needs n <= {MAX_EXHAUSTIVE_BITS}, got {n}"
        )));
    }
    check_n(f, &com.b)?;
    let b = com.b.to_index()?;
    Ok((0..1u64 << n).filter(|&a| f.apply_index(a) == b).count() as u64)
}

fn check_single_qubit(psi: &StateVector) -> Result<()> {
    if psi.num_qubits() != 1 {
        return Err(Error::arg(format!(
            "qubit commitment takes one qubit, got {}",
            psi.num_qubits()
        )));
    }
    Ok(())
}

fn mask(psi: &StateVector, h1: bool, h2: bool) -> Result<StateVector> {
    let mut out = psi.clone();
    if h2 {
        out.apply(&Gate::Z(0))?;
    }
    if h1 {
        out.apply(&Gate::X(0))?;
    }
    Ok(out)
}

fn unmask(masked: &StateVector, h1: bool, h2: bool) -> Result<StateVector> {
    let mut out = masked.clone();
    if h1 {
        out.apply(&Gate::X(0))?;
    }
    if h2 {
        out.apply(&Gate::Z(0))?;
    }
    Ok(out)
}

pub fn commit_qubit<R: Rng + ?Sized>(
    f: &Permutation,
    psi: &StateVector,
    rng: &mut R,
) -> Result<(QubitCommitment, Opening, Opening)> {
    let n = f.n();
    let a1 = BitString::random(n, rng)?;
    let x1 = BitString::random(n, rng)?;
    let a2 = BitString::random(n, rng)?;
    let x2 = BitString::random(n, rng)?;
    commit_qubit_with(f, psi, (a1, x1), (a2, x2))
}

/// [`commit_qubit`] with keys `(a₁, x₁)` and `(a₂, x₂)` supplied.
pub fn commit_qubit_with(
    f: &Permutation,
    psi: &StateVector,
    (a1, x1): (BitString, BitString),
    (a2, x2): (BitString, BitString),
) -> Result<(QubitCommitment, Opening, Opening)> {
    check_single_qubit(psi)?;
    for s in [&a1, &x1, &a2, &x2] {
        check_n(f, s)?;
    }
    let masked_state = mask(psi, a1.dot(&x1)?, a2.dot(&x2)?)?;
    let com = QubitCommitment {
        masked_state,
        b1: f.apply(&a1)?,
        b2: f.apply(&a2)?,
        x1,
        x2,
    };
    Ok((com, Opening { a: a1 }, Opening { a: a2 }))
}

pub fn decommit_qubit(
    f: &Permutation,
    com: &QubitCommitment,
    open1: &Opening,
    open2: &Opening,
) -> Result<Decommit<StateVector>> {
    check_n(f, &open1.a)?;
    check_n(f, &open2.a)?;
    if f.apply(&open1.a)? != com.b1 || f.apply(&open2.a)? != com.b2 {
        return Ok(Decommit::Reject);
    }
    let h1 = open1.a.dot(&com.x1)?;
    let h2 = open2.a.dot(&com.x2)?;
    Ok(Decommit::Accept(unmask(&com.masked_state, h1, h2)?))
}

/// `|⟨φ|ψ⟩|`.
pub fn fidelity(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(phi.overlap(psi)?.norm())
}

/// A 2×2 density matrix, row-major.
pub type Density = [[Complex64; 2]; 2];

/// `Pr[a·x = 1]` for uniform `a, x ∈ {0,1}ⁿ`, which is `½(1 − 2⁻ⁿ)`.
pub fn mask_bias(n: usize) -> f64 {
    0.5 * (1.0 - (-(n as f64)).exp2())
}

fn outer(psi: &StateVector) -> Density {
    let v = psi.amplitudes();
    [
        [v[0] * v[0].conj(), v[0] * v[1].conj()],
        [v[1] * v[0].conj(), v[1] * v[1].conj()],
    ]
}

fn add_scaled(acc: &mut Density, rho: &Density, w: f64) {
    for (row, src) in acc.iter_mut().zip(rho) {
        for (a, s) in row.iter_mut().zip(src) {
            *a += s * w;
        }
    }
}

/// Key-averaged density matrix of the masked qubit: the four Pauli masks
/// weighted by independent `Pr[hᵢ = 1] = ½(1 − 2⁻ⁿ)`.
pub fn exact_masked_density(n: usize, psi: &StateVector) -> Result<Density> {
    check_single_qubit(psi)?;
    let p = mask_bias(n);
    let mut rho = [[Complex64::default(); 2]; 2];
    for (h1, w1) in [(false, 1.0 - p), (true, p)] {
        for (h2, w2) in [(false, 1.0 - p), (true, p)] {
            add_scaled(&mut rho, &outer(&mask(psi, h1, h2)?), w1 * w2);
        }
    }
    Ok(rho)
}

/// `½‖ρ − I/2‖₁`. For a unit-trace Hermitian `ρ` the difference is
/// `[[d, e], [e*, −d]]`, whose eigenvalues are `±√(d² + |e|²)`.
pub fn trace_distance_from_mixed(rho: &Density) -> f64 {
    let d = 0.5 * (rho[0][0].re - rho[1][1].re);
    let e = 0.5 * (rho[0][1] + rho[1][0].conj());
    (d * d + e.norm_sqr()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HidingReport {
    pub n: usize,
    pub trials: u64,
    pub exact: Density,
    pub empirical: Density,
    pub exact_trace_distance: f64,
    pub empirical_trace_distance: f64,
    /// `2·2⁻ⁿ`.
    pub bound: f64,
    /// Standardized errors of `ρ₀₀`, `Re ρ₀₁`, `Im ρ₀₁`. A component whose
    /// samples never vary reports 0 if it equals the exact value and
    /// infinity otherwise.
    pub z_scores: [f64; 3],
}

impl HidingReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

pub const MIN_HIDING_TRIALS: u64 = 1000;

/// Monte Carlo estimate of the masked qubit's density matrix over fresh
/// commitments, compared with [`exact_masked_density`].
pub fn audit_qubit_hiding<R: Rng + ?Sized>(
    f: &Permutation,
    psi: &StateVector,
    trials: u64,
    rng: &mut R,
) -> Result<HidingReport> {
    if trials < MIN_HIDING_TRIALS {
        return Err(Error::arg(format!(
            "hiding audit needs at least {MIN_HIDING_TRIALS} trials, got {trials}"
        )));
    }
    let exact = exact_masked_density(f.n(), psi)?;
    let mut sums = [0.0f64; 3];
    let mut squares = [0.0f64; 3];
    for _ in 0..trials {
        let (com, _, _) = commit_qubit(f, psi, rng)?;
        let rho = outer(&com.masked_state);
        for (k, v) in [rho[0][0].re, rho[0][1].re, rho[0][1].im]
            .into_iter()
            .enumerate()
        {
            sums[k] += v;
            squares[k] += v * v;
        }
    }
    let t = trials as f64;
    let means = sums.map(|s| s / t);
    let targets = [exact[0][0].re, exact[0][1].re, exact[0][1].im];
    let mut z_scores = [0.0; 3];
    for k in 0..3 {
        let var = (squares[k] / t - means[k] * means[k]).max(0.0) * t / (t - 1.0);
        let diff = means[k] - targets[k];
        z_scores[k] = if var > 1e-24 {
            diff / (var / t).sqrt()
        } else if diff.abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let off = Complex64::new(means[1], means[2]);
    let empirical = [
        [Complex64::new(means[0], 0.0), off],
        [off.conj(), Complex64::new(1.0 - means[0], 0.0)],
    ];
    Ok(HidingReport {
        n: f.n(),
        trials,
        exact,
        empirical,
        exact_trace_distance: trace_distance_from_mixed(&exact),
        empirical_trace_distance: trace_distance_from_mixed(&empirical),
        bound: 2.0 * (-(f.n() as f64)).exp2(),
        z_scores,
    })
}

/// Turns an attack on the bit commitment into a predictor for `a·x`.
///
/// `breaker` sees a commitment `(b, x, c)` and guesses the committed bit.
/// Feeding it `c = 0` makes its guess a guess of `a·x` itself, so the
/// tabulated predictor is `G(b, x) = breaker(b, x, 0)`.
pub fn predictor_from_breaker(
    n: usize,
    breaker: impl Fn(&BitCommitment) -> bool,
) -> Result<Predictor> {
    Predictor::tabulate(n, |b, x| {
        breaker(&BitCommitment {
            b: b.clone(),
            x: x.clone(),
            c: false,
        })
    })
}

/// One message of a commitment session, tagged by protocol phase. Bit
/// strings are hex, most significant symbol first, with `n` giving the
/// length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum TranscriptMessage {
    Commit {
        n: usize,
        b: String,
        x: String,
        c: u8,
    },
    Open {
        n: usize,
        a: String,
    },
    QubitCommit {
        n: usize,
        b1: String,
        b2: String,
        x1: String,
        x2: String,
        /// `[[re, im], [re, im]]` for `|0⟩` and `|1⟩`.
        amplitudes: [[f64; 2]; 2],
    },
    QubitOpen {
        n: usize,
        a1: String,
        a2: String,
    },
}

fn wrong_phase(expected: &str) -> Error {
    Error::arg(format!("expected a {expected} message"))
}

impl BitCommitment {
    pub fn to_message(&self) -> TranscriptMessage {
        TranscriptMessage::Commit {
            n: self.b.len(),
            b: self.b.to_hex(),
            x: self.x.to_hex(),
            c: self.c as u8,
        }
    }

    pub fn from_message(msg: &TranscriptMessage) -> Result<Self> {
        match msg {
            TranscriptMessage::Commit { n, b, x, c } => Ok(BitCommitment {
                b: BitString::from_hex(*n, b)?,
                x: BitString::from_hex(*n, x)?,
                c: match c {
                    0 => false,
                    1 => true,
                    _ => {
                        return Err(Error::arg(format!(
                            "commitment bit must be 0 or 1, got {c}"
                        )))
                    }
                },
            }),
            _ => Err(wrong_phase("commit")),
        }
    }
}

impl Opening {
    pub fn to_message(&self) -> TranscriptMessage {
        TranscriptMessage::Open {
            n: self.a.len(),
            a: self.a.to_hex(),
        }
    }

    pub fn from_message(msg: &TranscriptMessage) -> Result<Self> {
        match msg {
            TranscriptMessage::Open { n, a } => Ok(Opening {
                a: BitString::from_hex(*n, a)?,
            }),
            _ => Err(wrong_phase("open")),
        }
    }

    pub fn pair_to_message(first: &Opening, second: &Opening) -> TranscriptMessage {
        TranscriptMessage::QubitOpen {
            n: first.a.len(),
            a1: first.a.to_hex(),
            a2: second.a.to_hex(),
        }
    }

    pub fn pair_from_message(msg: &TranscriptMessage) -> Result<(Opening, Opening)> {
        match msg {
            TranscriptMessage::QubitOpen { n, a1, a2 } => Ok((
                Opening {
                    a: BitString::from_hex(*n, a1)?,
                },
                Opening {
                    a: BitString::from_hex(*n, a2)?,
                },
            )),
            _ => Err(wrong_phase("qubit_open")),
        }
    }
}

impl QubitCommitment {
    pub fn to_message(&self) -> TranscriptMessage {
        let v = self.masked_state.amplitudes();
        TranscriptMessage::QubitCommit {
            n: self.b1.len(),
            b1: self.b1.to_hex(),
            b2: self.b2.to_hex(),
            x1: self.x1.to_hex(),
            x2: self.x2.to_hex(),
            amplitudes: [[v[0].re, v[0].im], [v[1].re, v[1].im]],
        }
    }

    pub fn from_message(msg: &TranscriptMessage) -> Result<Self> {
        match msg {
            TranscriptMessage::QubitCommit {
                n,
                b1,
                b2,
                x1,
                x2,
                amplitudes,
            } => Ok(QubitCommitment {
                masked_state: StateVector::from_amplitudes(
                    amplitudes
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect(),
                )?,
                b1: BitString::from_hex(*n, b1)?,
                b2: BitString::from_hex(*n, b2)?,
                x1: BitString::from_hex(*n, x1)?,
                x2: BitString::from_hex(*n, x2)?,
            }),
            _ => Err(wrong_phase("qubit_commit")),
        }
    }
}
