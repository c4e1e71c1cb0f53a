use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{Sampler, SourceKey};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Index of the alternative that `u` in [0,1) falls into.
pub fn pick(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let target = u * total;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc && w > 0.0 {
            return i;
        }
    }
    // Rounding at the top end: last alternative with positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Counter-based sampler: each draw depends only on (seed, cycle, source),
/// so runs are reproducible regardless of evaluation order.
#[derive(Debug, Clone, Copy)]
pub struct CounterSampler {
    pub seed: u64,
}

impl CounterSampler {
    pub fn new(seed: u64) -> Self {
        CounterSampler { seed }
    }

    pub fn uniform(&self, cycle: u64, key: &SourceKey) -> f64 {
        let k = splitmix(splitmix(self.seed ^ splitmix(cycle)) ^ fnv1a(key.label().as_bytes()));
        ChaCha8Rng::seed_from_u64(k).random::<f64>()
    }
}

impl Sampler for CounterSampler {
    fn choose(&mut self, cycle: u64, key: &SourceKey, weights: &[f64]) -> usize {
        pick(weights, self.uniform(cycle, key))
    }
}

/// Sequential sampler over one RNG stream.
pub struct StreamSampler<R: Rng>(pub R);

impl<R: Rng> Sampler for StreamSampler<R> {
    fn choose(&mut self, _cycle: u64, _key: &SourceKey, weights: &[f64]) -> usize {
        pick(weights, self.0.random::<f64>())
    }
}

/// Seed of episode `i` derived from a base seed.
pub fn episode_seed(seed: u64, i: u64) -> u64 {
    splitmix(seed ^ splitmix(i.wrapping_add(0x5851_f42d_4c95_7f2d)))
}
