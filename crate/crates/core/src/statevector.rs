//! Dense pure-state simulation.
//!
//! A register of `q` qubits is stored as `2^q` complex amplitudes. Qubit 0 is
//! the leftmost symbol of a ket and the most significant bit of the array
//! index, so `|10⟩` lives at index 2 and the first `n` qubits of a basis state
//! are the top `n` bits of its index.

use num_complex::Complex64;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracles::UnitaryIpOracle;

/// Largest register the simulator will allocate (`2^24` amplitudes).
pub const MAX_QUBITS: usize = 24;

/// Tolerance used for state equality and norm checks.
pub const STATE_TOL: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Which way a query unitary is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// The gate set needed by circuit C, amplitude amplification and the qubit
/// commitment protocol. Every gate here is an involution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    /// Controlled-Z; symmetric in its two qubits.
    CZ(usize, usize),
    /// `I - 2|0…0⟩⟨0…0|` over the whole register.
    ReflectZero,
    /// Negates every basis state whose leading qubits spell out the prefix.
    PhaseFlipPrefix(BitString),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|label⟩` on `num_qubits` qubits.
    pub fn basis_state(num_qubits: usize, label: &BitString) -> Result<Self> {
        if label.len() != num_qubits {
            return Err(Error::LengthMismatch {
                expected: num_qubits,
                actual: label.len(),
            });
        }
        check_register(num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[label.to_index()? as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, &BitString::zeros(num_qubits)?)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the vector
    /// normalized within [`STATE_TOL`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::arg(format!(
                "amplitude count {} is not a power of two >= 2",
                amps.len()
            )));
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        check_register(num_qubits)?;
        let state = StateVector { num_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::arg(format!(
                "state is not normalized (norm² = {norm})"
            )));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, label: &BitString) -> Result<Complex64> {
        if label.len() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                actual: label.len(),
            });
        }
        Ok(self.amps[label.to_index()? as usize])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::H(t) => {
                let mask = self.mask(*t)?;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | mask] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::X(t) => {
                let mask = self.mask(*t)?;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        self.amps.swap(i, i | mask);
                    }
                }
            }
            Gate::Z(t) => {
                let mask = self.mask(*t)?;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::CZ(c, t) => {
                if c == t {
                    return Err(Error::arg(format!(
                        "controlled-Z needs distinct qubits, got {c} twice"
                    )));
                }
                let both = self.mask(*c)? | self.mask(*t)?;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
            Gate::ReflectZero => self.amps[0] = -self.amps[0],
            Gate::PhaseFlipPrefix(prefix) => {
                let p = prefix.len();
                if p > self.num_qubits {
                    return Err(Error::arg(format!(
                        "prefix of {p} bits on a {}-qubit register",
                        self.num_qubits
                    )));
                }
                let shift = self.num_qubits - p;
                let block = (prefix.to_index()? as usize) << shift;
                for a in &mut self.amps[block..block + (1 << shift)] {
                    *a = -*a;
                }
            }
        }
        Ok(())
    }

    /// Multiplies the whole state by −1.
    pub fn negate(&mut self) {
        for a in &mut self.amps {
            *a = -*a;
        }
    }

    /// Value-semantics form of [`StateVector::apply`].
    pub fn applied(mut self, gate: &Gate) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    /// Applies `U_IP` or `U_IP†` to the leading `n + m` qubits. Any further
    /// qubits are untouched workspace. Counts one query on the oracle.
    pub fn apply_ip_oracle<O>(&mut self, oracle: &mut O, direction: Direction) -> Result<()>
    where
        O: UnitaryIpOracle + ?Sized,
    {
        let n = oracle.input_bits();
        let m = oracle.ancilla_bits();
        if n + m > self.num_qubits {
            return Err(Error::arg(format!(
                "oracle acts on {} qubits but the register has {}",
                n + m,
                self.num_qubits
            )));
        }
        let trailing = self.num_qubits - n - m;
        let dim = 1usize << m;
        let mut block = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut column = vec![Complex64::new(0.0, 0.0); dim];
        for x in 0..(1u64 << n) {
            oracle.write_block(x, direction, &mut block)?;
            let base = (x as usize) << (m + trailing);
            for rest in 0..(1usize << trailing) {
                for (y, c) in column.iter_mut().enumerate() {
                    *c = self.amps[base | (y << trailing) | rest];
                }
                for row in 0..dim {
                    let acc = (0..dim)
                        .map(|col| block[row * dim + col] * column[col])
                        .sum();
                    self.amps[base | (row << trailing) | rest] = acc;
                }
            }
        }
        oracle.record_application(direction);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability that measuring the leading `prefix.len()` qubits yields `prefix`.
    pub fn prefix_probability(&self, prefix: &BitString) -> Result<f64> {
        let p = prefix.len();
        if p > self.num_qubits {
            return Err(Error::arg(format!(
                "prefix of {p} bits on a {}-qubit register",
                self.num_qubits
            )));
        }
        let shift = self.num_qubits - p;
        let block = (prefix.to_index()? as usize) << shift;
        Ok(self.amps[block..block + (1 << shift)]
            .iter()
            .map(|a| a.norm_sqr())
            .sum())
    }

    /// Measures every qubit in the computational basis without collapsing
    /// `self`.
    pub fn sample_measurement<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let target: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        let mut chosen = self.amps.len() - 1;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if target < acc {
                chosen = i;
                break;
            }
        }
        BitString::from_index(self.num_qubits, chosen as u64).expect("index fits register")
    }

    /// Componentwise distance check within `tol`.
    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self
                .amps
                .iter()
                .zip(&other.amps)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                len: self.num_qubits,
            });
        }
        Ok(1 << (self.num_qubits - 1 - qubit))
    }
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::ResourceGuard {
            qubits: num_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}
