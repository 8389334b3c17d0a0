//! Seed derivation.
//!
//! Every random quantity in the crate is a pure function of a 64-bit master
//! seed and integer coordinates, mixed with the SplitMix64 finalizer:
//!
//! ```text
//! splitmix64(z) : z += 0x9E3779B97F4A7C15
//!                 z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                 z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                 z ^ (z >> 31)
//! mix2(a, b)     = splitmix64(a ^ splitmix64(b))
//! mix3(a, b, c)  = splitmix64(mix2(a, b) ^ splitmix64(c ^ 0xD1B54A32D192ED03))
//! ```
//!
//! Per-trial generators are ChaCha8 streams seeded with
//! `mix2(master ^ stream, trial)`, so results never depend on the order in
//! which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const THIRD_KEY: u64 = 0xD1B5_4A32_D192_ED03;

/// Stream tags keep independent uses of one master seed apart.
pub mod stream {
    pub const POINTS: u64 = 0x5054_5300_0000_0001;
    pub const IID: u64 = 0x4949_4400_0000_0002;
    pub const HOEFFDING: u64 = 0x484F_4546_0000_0003;
    pub const COVER: u64 = 0x434F_5652_0000_0004;
    pub const SHIFT_SYMBOLS: u64 = 0x5348_4946_0000_0005;
    pub const OBSERVABLES: u64 = 0x4F42_5300_0000_0006;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn mix2(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

#[inline]
pub fn mix3(a: u64, b: u64, c: u64) -> u64 {
    splitmix64(mix2(a, b) ^ splitmix64(c ^ THIRD_KEY))
}

/// Top 53 bits of `h` as a uniform double in `[0, 1)`.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n` by multiply-shift (bias below `n / 2^64`).
#[inline]
pub fn index_below(h: u64, n: u64) -> u64 {
    ((h as u128 * n as u128) >> 64) as u64
}

pub fn trial_rng(master: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix2(master ^ stream, trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(GOLDEN_GAMMA), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn unit_is_half_open() {
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
    }

    #[test]
    fn index_below_stays_in_range() {
        for h in [0, 1, u64::MAX / 3, u64::MAX] {
            assert!(index_below(h, 7) < 7);
        }
        assert_eq!(index_below(u64::MAX, 1), 0);
    }
}
