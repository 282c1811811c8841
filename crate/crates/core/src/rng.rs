//! Counter-based random numbers with a Box–Muller normal transform.
//!
//! Output `i` of a stream is a pure function of `(key, i)`, so any slice of a
//! stream can be generated independently and in any order. Streams are split
//! by hashing a stream id into the key.

use std::f64::consts::TAU;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix(seed) }
    }

    /// Independent child stream.
    pub fn split(&self, stream: u64) -> Self {
        CounterRng {
            key: mix(self.key ^ mix(stream.wrapping_add(1).wrapping_mul(GAMMA))),
        }
    }

    pub fn u64_at(&self, counter: u64) -> u64 {
        mix(self
            .key
            .wrapping_add(counter.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn unit_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals from counters `2k` and `2k + 1`.
    pub fn normal_pair(&self, k: u64) -> (f64, f64) {
        // (0, 1] so the log is finite
        let u1 = 1.0 - self.unit_at(2 * k);
        let u2 = self.unit_at(2 * k + 1);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Standard normal number `i` of the stream.
    pub fn normal_at(&self, i: u64) -> f64 {
        let (z0, z1) = self.normal_pair(i / 2);
        if i.is_multiple_of(2) {
            z0
        } else {
            z1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_split() {
        let a = CounterRng::new(42);
        let b = CounterRng::new(42);
        assert_eq!(a.u64_at(17), b.u64_at(17));
        assert_ne!(a.u64_at(17), a.u64_at(18));
        assert_ne!(a.split(0).u64_at(0), a.split(1).u64_at(0));
        assert_ne!(a.split(0).u64_at(0), a.u64_at(0));
        assert_ne!(CounterRng::new(43).u64_at(0), a.u64_at(0));
    }

    #[test]
    fn uniform_moments() {
        let r = CounterRng::new(7);
        let n = 100_000;
        let mean = (0..n).map(|i| r.unit_at(i)).sum::<f64>() / n as f64;
        // standard error of the mean is 1/sqrt(12 n) ~ 0.0009
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
        assert!((0..n).all(|i| (0.0..1.0).contains(&r.unit_at(i))));
    }
}
