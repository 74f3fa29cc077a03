//! Per-trial seed derivation.
//!
//! Every trial gets its own 64-bit seed, mixed from the experiment's base
//! seed and the trial coordinates with the SplitMix64 finalizer:
//!
//! ```text
//! s0 = splitmix64(base)
//! s1 = splitmix64(s0 ^ n)
//! s2 = splitmix64(s1 ^ eps_numerator)     // eps_numerator = ε·2ⁿ
//! seed = splitmix64(s2 ^ trial)
//! ```
//!
//! where `splitmix64(z)` adds `0x9e3779b97f4a7c15` and then applies the
//! standard xor-shift-multiply finalizer. A trial's RNG is
//! `ChaCha8Rng::seed_from_u64(seed)`.

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one `(n, ε, trial)` cell of an experiment.
pub fn trial_seed(base: u64, n: u64, eps_numerator: u64, trial: u64) -> u64 {
    let s0 = splitmix64(base);
    let s1 = splitmix64(s0 ^ n);
    let s2 = splitmix64(s1 ^ eps_numerator);
    splitmix64(s2 ^ trial)
}
