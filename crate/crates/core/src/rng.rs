//! Seeded per-station random streams.
//!
//! Every station owns a ChaCha8 generator (`rand_chacha` 0.3). The 256-bit key
//! comes from `ChaCha8Rng::seed_from_u64(seed)` and the 64-bit stream id is
//! `(domain << 32) | station`. Streams never overlap, and the draws a station
//! sees do not depend on how many other stations exist or in which order they
//! are polled. Bernoulli trials compare `gen::<f64>()` against the probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StationRng = ChaCha8Rng;

/// Name recorded in run metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.3); key = seed_from_u64(seed), stream = (domain << 32) | station";

/// Which phase of an experiment a stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// The main simulation run.
    Run = 0,
    /// The station-count estimation pre-phase.
    Estimator = 1,
}

pub fn station_rng(seed: u64, domain: StreamDomain, station: u32) -> StationRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 32) | u64::from(station));
    rng
}

/// One Bernoulli(`p`) draw.
#[inline]
pub fn bernoulli(rng: &mut StationRng, p: f64) -> bool {
    rng.gen::<f64>() < p
}
