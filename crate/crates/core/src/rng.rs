//! Seeded random source used by experiments and test instance generators.
//!
//! The stream is SplitMix64 (a counter-based generator: the i-th output is a
//! fixed bijective mix of `seed + i * 0x9E3779B97F4A7C15`). Derived values:
//!
//! * uniform in `[0, 1)`: `(next_u64() >> 11) * 2^-53`
//! * standard normal: Box–Muller on two consecutive uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2π u2)` (the sine branch is discarded)
//!
//! This is enough to reproduce every generated instance from another
//! language without depending on a particular library's sampling code.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi);
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// Uniform direction on the unit sphere.
    pub fn unit_sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v = self.normal_vec(n);
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.0 {
                return v.into_iter().map(|x| x / nrm).collect();
            }
        }
    }
}
