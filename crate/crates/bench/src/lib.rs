//! Deterministic inputs shared by the benchmarks.

use ggm_core::model::sample;
use ggm_core::GgmParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x6767_6d31;

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

/// Parameter triples with log-uniform scales in `[0.05, 30]` and shapes in
/// `[0.5, 3]`, plus one integer residual drawn from each.
pub fn residual_stream(n: usize, stream: u64) -> (Vec<GgmParams>, Vec<i64>) {
    let mut rng = rng(stream);
    let mut params = Vec::with_capacity(n);
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        let alpha = rng.random_range(0.05f64.ln()..30f64.ln()).exp();
        let beta = rng.random_range(0.5..3.0);
        let p = GgmParams::new(0.0, alpha, beta).expect("parameters inside the domain");
        symbols.push(sample(&p, 1, &mut rng)[0].round() as i64);
        params.push(p);
    }
    (params, symbols)
}

/// Real-valued samples from one distribution.
pub fn real_samples(params: &GgmParams, n: usize, stream: u64) -> Vec<f64> {
    sample(params, n, &mut rng(stream))
}

/// Integer samples from one distribution, rounded to the nearest integer.
pub fn integer_samples(params: &GgmParams, n: usize, stream: u64) -> Vec<i64> {
    real_samples(params, n, stream).iter().map(|v| v.round() as i64).collect()
}
