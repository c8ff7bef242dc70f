//! Seeded random streams.
//!
//! A stream is ChaCha8 keyed by the 64-bit seed expanded to 256 bits with
//! SplitMix64, with the ChaCha stream word set to the stream id. Bounded
//! integers use Lemire's multiply-and-reject method on 64-bit outputs.
//! Together these fix the output sequence for a given `(seed, stream)`
//! independently of the `rand` front-end crate.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        RngStream { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`. `bound` must be positive.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut m = (self.next_u64() as u128) * (bound as u128);
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = (self.next_u64() as u128) * (bound as u128);
            }
        }
        (m >> 64) as u64
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased Fisher-Yates shuffle.
    #[inline]
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(7, 0);
        let mut b = RngStream::new(7, 1);
        let mut c = RngStream::new(8, 0);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_ne!(xs, ys);
        assert_ne!(xs, zs);
    }

    // frozen output; a change here means sampled sequences changed across releases
    #[test]
    fn output_is_stable() {
        let mut r = RngStream::new(1, 0);
        assert_eq!(r.next_u64(), 0xef72_eaf4_48a8_b558);
        let mut r = RngStream::new(1, 0);
        let got: Vec<u64> = (0..3).map(|_| r.below(1000)).collect();
        assert_eq!(got, vec![935, 539, 47]);
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut r = RngStream::new(42, 0);
        let mut counts = [0u32; 6];
        let draws = 600_000;
        for _ in 0..draws {
            counts[r.below(6) as usize] += 1;
        }
        let expected = draws as f64 / 6.0;
        let sd = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn unit_interval() {
        let mut r = RngStream::new(5, 5);
        for _ in 0..1000 {
            let u = r.unit_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
