//! Seeded sample points for exact and floating-point checks.
//!
//! Trial `i` of a run with master seed `s` draws from a ChaCha8 stream seeded
//! with `splitmix64(s + i * GOLDEN)`. The derivation is documented in
//! `docs/seeds.md` and is part of the reproducibility contract.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symbolic::Rational;

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed used for the internal exact rank checks; fixed so that analysis is
/// reproducible without user input.
pub const RANK_SEED: u64 = 0x005E_ED0F_AB1E;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master.wrapping_add(trial.wrapping_mul(GOLDEN)))
}

pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial))
}

/// Uniform point in `[lo, hi]^dim`.
pub fn box_point(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Rational point with coordinates `k/997`, `|k| ≤ 2·997`. The odd prime
/// denominator keeps the samples away from small special loci such as `x = 0`
/// or `x = 1` with high probability.
pub fn rational_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Rational> {
    (0..dim)
        .map(|_| {
            let k: i64 = rng.gen_range(-1994..=1994);
            Rational::new(BigInt::from(k), BigInt::from(997))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = trial_seed(42, 0);
        let b = trial_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, trial_seed(42, 0));
        let mut r1 = trial_rng(7, 3);
        let mut r2 = trial_rng(7, 3);
        assert_eq!(box_point(&mut r1, 4, -2.0, 2.0), box_point(&mut r2, 4, -2.0, 2.0));
    }
}
