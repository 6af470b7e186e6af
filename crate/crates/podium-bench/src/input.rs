//! Deterministic input generation.
//!
//! Seeding contract: record `i` draws from a ChaCha8 stream keyed by the
//! root seed with stream id `i`, so a run is reproducible byte for byte no
//! matter how records are partitioned across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::InputDist;

pub fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Beta(2,2) on `[0, 1]` as the median of three uniforms (the second order
/// statistic of three); no special-function dependency.
pub fn beta22<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let a: f64 = rng.gen();
    let b: f64 = rng.gen();
    let c: f64 = rng.gen();
    a + b + c - a.max(b).max(c) - a.min(b).min(c)
}

/// Draw one centered input in `[-delta/2, delta/2]`.
pub fn draw_input<R: Rng + ?Sized>(dist: InputDist, delta: f64, rng: &mut R) -> f64 {
    match dist {
        InputDist::Beta22 => delta * (beta22(rng) - 0.5),
        InputDist::Uniform => delta * (rng.gen::<f64>() - 0.5),
        InputDist::Fixed(v) => v,
    }
}
