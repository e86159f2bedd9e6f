//! Framed slotted ALOHA: one uniformly chosen slot per frame, one attempt.

use super::{check_dims, check_probability, pow};
use crate::error::Result;

/// Throughput-maximising attempt probability `min(D / N, 1)`.
pub fn framed_optimal_p(delay: u32, stations: u32) -> Result<f64> {
    check_dims(delay, stations)?;
    Ok((f64::from(delay) / f64::from(stations)).min(1.0))
}

/// Timely throughput of framed ALOHA with attempt probability `p`.
///
/// Every slot of the frame is equally likely to be picked, so the throughput
/// equals the success probability of one slot: `N p (1-p)^(N-1)` for `D = 1`
/// and `p N / (D - p) * ((D - p) / D)^N` otherwise.
pub fn framed_throughput(delay: u32, stations: u32, p: f64) -> Result<f64> {
    check_dims(delay, stations)?;
    check_probability("probability", p)?;
    let n = f64::from(stations);
    if delay == 1 {
        return Ok(n * p * pow(1.0 - p, u64::from(stations - 1)));
    }
    let d = f64::from(delay);
    Ok(p * n / (d - p) * pow((d - p) / d, u64::from(stations)))
}

/// Closed-form maximum throughput at `p = min(D / N, 1)`.
///
/// `(1 - 1/N)^(N-1)` when `N > D`, otherwise `N / (D-1) * ((D-1)/D)^N`, with
/// `N = D = 1` giving 1.
pub fn framed_optimal_max_throughput(delay: u32, stations: u32) -> Result<f64> {
    check_dims(delay, stations)?;
    let n = f64::from(stations);
    if stations > delay {
        return Ok(pow(1.0 - 1.0 / n, u64::from(stations - 1)));
    }
    if delay == 1 {
        return Ok(1.0);
    }
    let d = f64::from(delay);
    Ok(n / (d - 1.0) * pow((d - 1.0) / d, u64::from(stations)))
}
