//! Fixtures shared by the benchmarks.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stlmon_core::trace::{Series, Trace};

/// A single real channel `x` of `n` uniform samples in `[-100, 100)`.
pub fn noise_trace(n: usize, seed: u64) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut channels = IndexMap::new();
    channels.insert("x".to_string(), Series::Real((0..n).map(|_| rng.random_range(-100.0..100.0)).collect()));
    Trace::new("noise", (0..n).map(|i| i as f64).collect(), channels).expect("uniform trace")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixture_is_deterministic() {
        assert_eq!(super::noise_trace(100, 1), super::noise_trace(100, 1));
        assert_eq!(super::noise_trace(100, 1).len(), 100);
    }
}
