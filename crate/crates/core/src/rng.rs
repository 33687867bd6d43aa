//! Seeded randomness. Every stochastic routine in the crate takes an explicit
//! 64-bit seed and builds its generator through here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DetRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for one member of a family (a tree, a worker, a
/// pipeline stage), keyed by `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> DetRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a master seed with a stage tag into a new seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `k` distinct indices out of `0..n`, uniformly, in ascending order.
pub fn sample_indices(seed: u64, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    let mut idx = rand::seq::index::sample(&mut seeded(seed), n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Uniform draw in `[0, 1)`.
pub fn unit(rng: &mut DetRng) -> f64 {
    use rand::Rng;
    rng.random::<f64>()
}
