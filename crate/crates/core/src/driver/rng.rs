//! Counter-addressable random streams.
//!
//! A stream is a ChaCha8 keystream keyed by `(seed, domain)` with the ChaCha
//! stream id set to a caller index (path index, sample index, ...). Gaussian
//! variate `i` of a stream is produced by Box–Muller from the 64-bit words
//! `2⌊i/2⌋` and `2⌊i/2⌋ + 1`, so any variate can be regenerated directly from
//! `(seed, domain, stream, i)` without replaying the stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const DOMAIN_BROWNIAN: u64 = 1;
pub const DOMAIN_INITIAL: u64 = 2;
pub const DOMAIN_SELECTION: u64 = 3;
pub const DOMAIN_SAMPLING: u64 = 4;
pub const DOMAIN_ANCHORS: u64 = 5;
pub const DOMAIN_CONVOLUTION: u64 = 6;

/// Keystream for `(seed, domain, stream)`, positioned at its start.
pub fn keyed(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(b"sdinc-v1");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Uniform on `(0, 1]` from the top 53 bits.
pub fn open_unit(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `[0, 1)`.
pub fn unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals from two words of `rng`.
pub fn standard_normal_pair(rng: &mut impl RngCore) -> (f64, f64) {
    let u1 = open_unit(rng.next_u64());
    let u2 = unit(rng.next_u64());
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Sequential reader of Gaussian variates that stays aligned with
/// [`gaussian_at`].
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, domain: u64, stream: u64) -> Self {
        Self {
            rng: keyed(seed, domain, stream),
            spare: None,
        }
    }

    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (a, b) = standard_normal_pair(&mut self.rng);
        self.spare = Some(b);
        a
    }

    pub fn next_word(&mut self) -> u64 {
        self.spare = None;
        self.rng.next_u64()
    }
}

/// Gaussian variate number `index` of the `(seed, domain, stream)` stream.
pub fn gaussian_at(seed: u64, domain: u64, stream: u64, index: u64) -> f64 {
    let mut rng = keyed(seed, domain, stream);
    // Each pair consumes two u64 = four 32-bit words.
    rng.set_word_pos(u128::from(index / 2) * 4);
    let (a, b) = standard_normal_pair(&mut rng);
    if index.is_multiple_of(2) {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let mut s = GaussianStream::new(7, DOMAIN_BROWNIAN, 3);
        let seq: Vec<f64> = (0..9).map(|_| s.next_gaussian()).collect();
        for (i, z) in seq.iter().enumerate() {
            assert_eq!(*z, gaussian_at(7, DOMAIN_BROWNIAN, 3, i as u64));
        }
    }

    #[test]
    fn streams_and_domains_differ() {
        let a = gaussian_at(1, DOMAIN_BROWNIAN, 0, 0);
        assert_ne!(a, gaussian_at(1, DOMAIN_BROWNIAN, 1, 0));
        assert_ne!(a, gaussian_at(1, DOMAIN_INITIAL, 0, 0));
        assert_ne!(a, gaussian_at(2, DOMAIN_BROWNIAN, 0, 0));
    }

    #[test]
    fn normal_moments() {
        let mut s = GaussianStream::new(11, DOMAIN_SAMPLING, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.next_gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
        assert!((m4 - 3.0).abs() < 0.1);
    }
}
