//! Philox4x32-10 counter-based generator.
//!
//! Every random variate is a pure function of `(seed, counter)`, so entries
//! can be generated in any order or in parallel. Streams used here:
//!
//! * filtered Wigner field `Y_kℓ`: counter `[k', ℓ', trial_lo, trial_hi]`,
//!   with `(k', ℓ') = (min, max)` of the two indices offset by `2³¹`;
//! * colored Gaussian model: counter `[i, j, trial_lo, trial_hi | 1<<31]`
//!   for the unordered color pair `i ≤ j`.
//!
//! Gaussians use Box–Muller on the two 53-bit uniforms of one block (cosine
//! branch only). Rademacher signs use the top bit of the first word.

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with 10 rounds.
#[inline]
pub fn philox4x32(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

pub fn seed_key(seed: u64) -> [u32; 2] {
    [seed as u32, (seed >> 32) as u32]
}

/// Uniform in `(0, 1]` from two words.
#[inline]
fn unit(hi: u32, lo: u32) -> f64 {
    let bits = ((hi as u64) << 21) ^ (lo as u64 >> 11);
    ((bits & ((1 << 53) - 1)) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Standard Gaussian from one block.
#[inline]
pub fn gaussian(block: [u32; 4]) -> f64 {
    let u1 = unit(block[0], block[1]);
    let u2 = unit(block[2], block[3]);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[inline]
pub fn rademacher(block: [u32; 4]) -> f64 {
    if block[0] >> 31 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_answer_vectors() {
        assert_eq!(
            philox4x32([0; 4], [0; 2]),
            [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]
        );
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32(
                [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344],
                [0xa4093822, 0x299f31d0]
            ),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn gaussian_moments() {
        let n = 200_000u32;
        let xs: Vec<f64> = (0..n).map(|i| gaussian(philox4x32([i, 0, 0, 0], [7, 0]))).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
        assert!((m4 - 3.0).abs() < 0.06);
    }

    #[test]
    fn unit_interval_bounds() {
        assert!(unit(0, 0) > 0.0);
        assert!(unit(u32::MAX, u32::MAX) <= 1.0);
    }
}
