//! Deterministic, stream-addressable random sources.
//!
//! A [`RandomSource`] is a ChaCha8 generator keyed by the master seed and
//! positioned on its own ChaCha stream, so `(seed, stream_id)` pairs never
//! collide and a trial's draws do not depend on which worker ran it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomSource {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

/// Returns the source for stream `stream_id` of `master_seed`.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> RandomSource {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    RandomSource {
        master_seed,
        stream_id,
        rng,
    }
}

impl RandomSource {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`: `(k + 1/2) / 2^52`, which keeps
    /// both endpoints exactly representable away from 0 and 1.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        let k = self.rng.next_u64() >> 12;
        (k as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn same_key_same_draws() {
        let mut a = derive_stream(42, 0);
        let mut b = derive_stream(42, 0);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = derive_stream(42, 0);
        let mut b = derive_stream(42, 1);
        assert_ne!(a.uniform(), b.uniform());
        let mut c = derive_stream(43, 0);
        let mut d = derive_stream(42, 0);
        assert_ne!(c.uniform(), d.uniform());
    }

    #[test]
    fn open_uniform_extremes_are_interior() {
        let top = ((1u64 << 52) - 1) as f64 + 0.5;
        assert!(top * (1.0 / (1u64 << 52) as f64) < 1.0);
        assert!(0.5 * (1.0 / (1u64 << 52) as f64) > 0.0);
    }

    #[test]
    fn open_uniform_never_hits_endpoints() {
        let mut r = derive_stream(7, 3);
        for _ in 0..10_000 {
            let u = r.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn pooled_streams_pass_chi_square() {
        // 1000 streams x 100 draws into 50 equiprobable cells.
        let bins = 50usize;
        let mut counts = vec![0u64; bins];
        let mut total = 0u64;
        for k in 0..1000 {
            let mut r = derive_stream(42, k);
            for _ in 0..100 {
                let u = r.uniform();
                counts[(u * bins as f64) as usize] += 1;
                total += 1;
            }
        }
        let expected = total as f64 / bins as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "chi2 = {stat}, critical = {crit}");
    }
}
