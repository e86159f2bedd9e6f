//! Throughput along increasing station counts, for limit checks.

use super::{
    framed_optimal_max_throughput, framed_optimal_p, optimize_constant_p, throughput_constant, throughput_dynamic,
    DynamicPolicy,
};
use crate::error::{Error, Result};

/// Which throughput to evaluate at each `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    /// p-constant at the numerically optimal `p*(D, N)`.
    ConstantOptimal { resolution: f64 },
    /// p-constant at `p = delta / N`; `delta = 1` is the `1/N` probe.
    ConstantScaled { delta: f64 },
    /// p-dynamic under the optimal policy `n -> 1/n`.
    DynamicOptimal,
    /// Framed ALOHA at `p = min(D / N, 1)`.
    FramedOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPoint {
    pub stations: u32,
    pub throughput: f64,
    /// Probability in use with all `N` stations active.
    pub probability: f64,
}

impl AsymptoticPoint {
    /// `N * p`, the offered load at the start of a frame.
    pub fn load(&self) -> f64 {
        f64::from(self.stations) * self.probability
    }
}

/// Evaluates `probe` at each entry of `stations`, which must strictly increase.
pub fn asymptotic_series(delay: u32, probe: Probe, stations: &[u32]) -> Result<Vec<AsymptoticPoint>> {
    if stations.is_empty() {
        return Err(Error::InvalidParams("empty station schedule".into()));
    }
    if stations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("station schedule must be strictly increasing".into()));
    }
    stations.iter().map(|&n| point(delay, probe, n)).collect()
}

fn point(delay: u32, probe: Probe, stations: u32) -> Result<AsymptoticPoint> {
    let (throughput, probability) = match probe {
        Probe::ConstantOptimal { resolution } => {
            let opt = optimize_constant_p(delay, stations, resolution)?;
            (opt.throughput, opt.p)
        }
        Probe::ConstantScaled { delta } => {
            let p = delta / f64::from(stations);
            (throughput_constant(delay, stations, p)?.throughput, p)
        }
        Probe::DynamicOptimal => {
            let policy = DynamicPolicy::inverse(stations)?;
            (throughput_dynamic(delay, stations, &policy)?.throughput, policy.get(stations))
        }
        Probe::FramedOptimal => (framed_optimal_max_throughput(delay, stations)?, framed_optimal_p(delay, stations)?),
    };
    Ok(AsymptoticPoint { stations, throughput, probability })
}
