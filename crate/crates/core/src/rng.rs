//! Deterministic seeded randomness with named, independent substreams.
//!
//! Every random decision in the pipeline draws from a ChaCha12 stream derived
//! from `(seed, domain, index)`. Derivation is stateless: a consumer that knows
//! the seed and its position can rebuild its stream exactly, which is what
//! makes checkpoint resume bit-for-bit reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Fixed substream domains. The numeric value is part of the on-disk contract
/// (checkpoints record `(seed, domain, index)` triples), so variants must not
/// be reordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Parameter initialization.
    Init = 0,
    /// Data order shuffling (one stream per epoch).
    Data = 1,
    /// Per-step timestep and noise draws.
    Noise = 2,
    /// Sampling / benchmark generation.
    Sample = 3,
    /// Recognizer pretraining corpus and batches.
    Recognizer = 4,
    /// Codec pretraining.
    Codec = 5,
}

/// A ChaCha12 stream for `(seed, domain, index)`. Identical arguments yield
/// bit-identical draw sequences; distinct domains or indices are independent.
pub fn seeded_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) ^ index);
    rng
}

/// Standard-normal draws into a flat buffer.
pub fn fill_gaussian(rng: &mut ChaCha12Rng, out: &mut [f64]) {
    use rand_distr::{Distribution, StandardNormal};
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

/// Fisher-Yates shuffle of `0..n` driven by the given stream.
pub fn shuffled_indices(rng: &mut ChaCha12Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = seeded_rng(0, StreamDomain::Noise, 7);
        let mut b = seeded_rng(0, StreamDomain::Noise, 7);
        let xs: Vec<u64> = (0..100).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..100).map(|_| b.random()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn different_seed_differs() {
        let mut a = seeded_rng(0, StreamDomain::Noise, 0);
        let mut b = seeded_rng(1, StreamDomain::Noise, 0);
        let xs: Vec<u64> = (0..16).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.random()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn substreams_are_independent_and_deterministic() {
        let mut data = seeded_rng(3, StreamDomain::Data, 0);
        let mut noise = seeded_rng(3, StreamDomain::Noise, 0);
        let xs: Vec<u64> = (0..32).map(|_| data.random()).collect();
        let ys: Vec<u64> = (0..32).map(|_| noise.random()).collect();
        assert_ne!(xs, ys);
        // Re-derived stream reproduces the data stream regardless of what the
        // noise stream consumed.
        let mut data2 = seeded_rng(3, StreamDomain::Data, 0);
        let xs2: Vec<u64> = (0..32).map(|_| data2.random()).collect();
        assert_eq!(xs, xs2);
    }

    #[test]
    fn gaussian_fill_is_deterministic() {
        let mut a = seeded_rng(9, StreamDomain::Sample, 1);
        let mut b = seeded_rng(9, StreamDomain::Sample, 1);
        let mut xs = [0.0; 64];
        let mut ys = [0.0; 64];
        fill_gaussian(&mut a, &mut xs);
        fill_gaussian(&mut b, &mut ys);
        assert_eq!(xs.map(f64::to_bits), ys.map(f64::to_bits));
    }
}
