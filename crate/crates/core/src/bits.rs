//! Fixed-length packed bit strings.
//!
//! Bit `0` is the leftmost symbol when a string is written out (`"100"` has
//! bit 0 set). When a string is converted to an integer, bit 0 is the most
//! significant bit, which is the same convention the state vector uses for
//! qubit 0.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    /// The all-zero string of `len` bits.
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::arg("bit strings must have at least one bit"));
        }
        Ok(BitString {
            len,
            words: vec![0; len.div_ceil(WORD)],
        })
    }

    /// The unit vector `e_j`: a single one at position `j`.
    pub fn unit(len: usize, j: usize) -> Result<Self> {
        let mut s = Self::zeros(len)?;
        s.set(j, true)?;
        Ok(s)
    }

    /// Builds the `len`-bit string whose integer value (bit 0 most
    /// significant) is `value`. Requires `len <= 64` and `value < 2^len`.
    pub fn from_index(len: usize, value: u64) -> Result<Self> {
        if len > 64 {
            return Err(Error::arg(format!(
                "from_index supports at most 64 bits, got {len}"
            )));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::arg(format!(
                "value {value} does not fit in {len} bits"
            )));
        }
        let mut s = Self::zeros(len)?;
        for i in 0..len {
            if (value >> (len - 1 - i)) & 1 == 1 {
                s.set_unchecked(i, true);
            }
        }
        Ok(s)
    }

    /// Integer value with bit 0 as the most significant bit.
    pub fn to_index(&self) -> Result<u64> {
        if self.len > 64 {
            return Err(Error::arg(format!(
                "to_index supports at most 64 bits, got {}",
                self.len
            )));
        }
        Ok((0..self.len).fold(0u64, |acc, i| (acc << 1) | self.bit(i) as u64))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        let mut s = Self::zeros(len)?;
        for w in s.words.iter_mut() {
            *w = rng.gen();
        }
        s.clear_tail();
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; bit strings have at least one bit.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> Result<bool> {
        self.check_index(i)?;
        Ok(self.bit(i))
    }

    pub fn set(&mut self, i: usize, value: bool) -> Result<()> {
        self.check_index(i)?;
        self.set_unchecked(i, value);
        Ok(())
    }

    pub fn flip(&mut self, i: usize) -> Result<()> {
        self.check_index(i)?;
        self.words[i / WORD] ^= 1 << (i % WORD);
        Ok(())
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitString {
            len: self.len,
            words,
        })
    }

    /// Inner product modulo two.
    pub fn dot(&self, other: &BitString) -> Result<bool> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones & 1 == 1)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Hex encoding of the integer value, most significant digit first,
    /// `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            // nibble d covers integer bit positions 4d..4d+3, i.e. string
            // positions len-1-4d down to len-4-4d
            let mut nibble = 0u32;
            for k in 0..4 {
                let pos = 4 * d + k;
                if pos < self.len && self.bit(self.len - 1 - pos) {
                    nibble |= 1 << k;
                }
            }
            out.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        out
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        let mut s = Self::zeros(len)?;
        let digits: Vec<u32> = hex
            .chars()
            .map(|c| {
                c.to_digit(16)
                    .ok_or_else(|| Error::arg(format!("invalid hex digit `{c}`")))
            })
            .collect::<Result<_>>()?;
        if digits.len() != len.div_ceil(4) {
            return Err(Error::arg(format!(
                "expected {} hex digits for {len} bits, got {}",
                len.div_ceil(4),
                digits.len()
            )));
        }
        for (d, nibble) in digits.iter().rev().enumerate() {
            for k in 0..4 {
                if nibble >> k & 1 == 1 {
                    let pos = 4 * d + k;
                    if pos >= len {
                        return Err(Error::arg(format!("hex value overflows {len} bits")));
                    }
                    s.set_unchecked(len - 1 - pos, true);
                }
            }
        }
        Ok(s)
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    fn set_unchecked(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    fn clear_tail(&mut self) {
        let used = self.len % WORD;
        if used != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << used) - 1;
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::zeros(s.len())?;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set_unchecked(i, true),
                _ => return Err(Error::arg(format!("invalid bit character `{c}`"))),
            }
        }
        Ok(out)
    }
}

/// Inner product modulo two of two equal-length strings.
pub fn dot(a: &BitString, x: &BitString) -> Result<bool> {
    a.dot(x)
}
