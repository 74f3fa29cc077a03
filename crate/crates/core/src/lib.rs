//! Goldreich-Levin solvers over simulated black boxes.
//!
//! The crate recovers a hidden string `a ∈ {0,1}ⁿ` from a noisy inner-product
//! oracle (agreeing with `a·x` on a `½ + ε` fraction of inputs) and an
//! equality oracle, using either a dense state-vector simulation of the
//! quantum algorithm (`O(1/ε)` queries) or the classical list decoder
//! (`Θ(n/ε²)` queries). On top of the solvers sit the reduction from
//! predicting `y·x` to inverting a permutation, and the bit and qubit
//! commitment protocols built from that predicate.
//!
//! ```
//! use qgl::{gl_quantum, oracles::{EqOracle, IpOracle}, BitString};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let a: BitString = "10110010".parse()?;
//! let mut ip = IpOracle::biased_set(8, 0.125, a.clone(), &mut rng)?;
//! let mut eq = EqOracle::new(a.clone());
//! let report = gl_quantum::solve_qsearch(&mut ip, &mut eq, &Default::default(), &mut rng)?;
//! assert_eq!(report.found, Some(a));
//! # Ok::<(), qgl::Error>(())
//! ```

pub mod bench;
pub mod bits;
pub mod commitment;
pub mod error;
pub mod gl_classical;
pub mod gl_quantum;
pub mod oracles;
pub mod reduction;
pub mod seeds;
pub mod statevector;

pub use bits::{dot, BitString};
pub use error::{Error, Result};
pub use oracles::{EqBlackBox, IpBlackBox, QueryTally, UnitaryIpOracle};
pub use statevector::{Gate, StateVector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/bits-and-states.md")]
    struct BitsAndStates;
    #[doc = include_str!("../../../book/src/oracles.md")]
    struct Oracles;
    #[doc = include_str!("../../../book/src/quantum-solver.md")]
    struct QuantumSolver;
    #[doc = include_str!("../../../book/src/classical-decoder.md")]
    struct ClassicalDecoder;
    #[doc = include_str!("../../../book/src/reduction.md")]
    struct Reduction;
    #[doc = include_str!("../../../book/src/commitments.md")]
    struct Commitments;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
