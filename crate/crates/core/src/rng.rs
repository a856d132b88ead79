//! Counter-based random number stream.
//!
//! Each draw is a pure function of `(key, counter)`, so a stream can be
//! split into independent child streams without any shared mutable state:
//! the S noise draws of one gradient estimate can be produced by S child
//! streams in any order, on any number of threads, with identical results.
//! Identical seeds produce identical sequences on every platform.

use crate::math;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const CHILD_SALT: u64 = 0xA0761D6478BD642F;

#[inline(always)]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable, counter-based generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            key: finalize(seed ^ GAMMA),
            counter: 0,
        }
    }

    /// Derives an independent child stream. Does not consume state from
    /// the parent, so `child(i)` is stable no matter how much the parent
    /// has been used.
    pub fn child(&self, id: u64) -> Self {
        RngStream {
            key: finalize(self.key ^ finalize(id.wrapping_mul(GAMMA) ^ CHILD_SALT)),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let z = self
            .key
            .wrapping_add(GAMMA.wrapping_mul(self.counter.wrapping_add(1)));
        self.counter = self.counter.wrapping_add(1);
        finalize(z)
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1): the zero draw is clamped to 1e-300 and the upper
    /// end is open by construction.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        let u = self.uniform();
        if u < 1e-300 {
            1e-300
        } else {
            u
        }
    }

    /// Uniform integer in [0, n) by rejection, so every value is exactly
    /// equally likely.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Standard normal via Box-Muller; consumes two draws per value.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }

    /// Standard Gumbel: -ln(-ln(u)) with u clamped away from {0, 1}.
    #[inline]
    pub fn gumbel(&mut self) -> f64 {
        -math::ln(-math::ln(self.uniform_open()))
    }
}
