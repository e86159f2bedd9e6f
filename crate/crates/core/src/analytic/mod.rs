//! Exact timely throughput of delay-constrained slotted ALOHA.
//!
//! Under frame-synchronized traffic every frame is statistically identical, so
//! the long-run throughput equals the expected number of deliveries in the
//! first frame divided by its length `D`. The number of finished stations
//! `M_t` evolves as a Markov chain on `{0, ..., min(t-1, N)}`: in each slot the
//! `N - M_t` active stations contend and at most one of them succeeds. Pushing
//! the distribution of `M_t` through that chain for `D` slots costs
//! `O(min(D, N) * D)`.

mod asymptotic;
mod framed;
mod optimize;

use std::sync::Arc;

use crate::error::{Error, Result};

pub use asymptotic::{asymptotic_series, AsymptoticPoint, Probe};
pub use framed::{framed_optimal_max_throughput, framed_optimal_p, framed_throughput};
pub use optimize::{golden_section_max, optimize_constant_p, ConstantOptimum, DEFAULT_RESOLUTION};

/// Tolerance on the total mass of a [`FinishedCountDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Powers above this exponent go through `exp(k * ln(base))`.
const DIRECT_POWER_LIMIT: u64 = 1_000_000;

/// A retransmission probability in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        check_probability("probability", value)?;
        Ok(Self(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

pub(crate) fn check_dims(delay: u32, stations: u32) -> Result<()> {
    if delay == 0 {
        return Err(Error::InvalidParams("hard delay D must be at least 1".into()));
    }
    if stations == 0 {
        return Err(Error::InvalidParams("station count N must be at least 1".into()));
    }
    Ok(())
}

/// `base^exp` for probabilities.
pub(crate) fn pow(base: f64, exp: u64) -> f64 {
    if exp > DIRECT_POWER_LIMIT {
        (exp as f64 * base.ln()).exp()
    } else {
        base.powi(exp as i32)
    }
}

/// Retransmission probability as a function of the number of active stations.
///
/// Entry `n - 1` holds the probability used when `n` stations are active.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicPolicy {
    by_active: Arc<[f64]>,
    alpha: Option<f64>,
}

impl DynamicPolicy {
    /// Builds a policy from explicit per-`n` probabilities, `n = 1..=len`.
    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParams("dynamic policy needs at least one entry".into()));
        }
        for &p in &probs {
            check_probability("dynamic policy entry", p)?;
        }
        Ok(Self { by_active: probs.into(), alpha: None })
    }

    /// The optimal policy `n -> 1/n`.
    pub fn inverse(stations: u32) -> Result<Self> {
        Self::scaled(1.0, stations)
    }

    /// `n -> min(alpha / n, 1)` for `n = 1..=stations`.
    pub fn scaled(alpha: f64, stations: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        check_dims(1, stations)?;
        let probs = (1..=stations).map(|n| (alpha / f64::from(n)).min(1.0)).collect::<Vec<_>>();
        Ok(Self { by_active: probs.into(), alpha: Some(alpha) })
    }

    /// Probability used when `active` stations hold a packet.
    ///
    /// Panics if `active` is zero or beyond the defined range.
    pub fn get(&self, active: u32) -> f64 {
        self.by_active[active as usize - 1]
    }

    /// Largest active count the policy is defined for.
    pub fn max_active(&self) -> u32 {
        self.by_active.len() as u32
    }

    /// Scale factor when built by [`DynamicPolicy::scaled`].
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }
}

/// The optimal p-dynamic policy `n -> 1/n`.
pub fn optimal_dynamic_policy(stations: u32) -> Result<DynamicPolicy> {
    DynamicPolicy::inverse(stations)
}

/// How stations pick their transmit probability.
#[derive(Debug, Clone, PartialEq)]
pub enum RetransmissionSpec {
    Constant(Probability),
    Dynamic(DynamicPolicy),
    Framed(Probability),
}

/// One experiment point: hard delay `D`, station count `N` and the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub delay: u32,
    pub stations: u32,
    pub spec: RetransmissionSpec,
}

impl SchemeParams {
    pub fn new(delay: u32, stations: u32, spec: RetransmissionSpec) -> Result<Self> {
        let params = Self { delay, stations, spec };
        params.validate()?;
        Ok(params)
    }

    pub fn constant(delay: u32, stations: u32, p: f64) -> Result<Self> {
        Self::new(delay, stations, RetransmissionSpec::Constant(Probability::new(p)?))
    }

    pub fn dynamic(delay: u32, stations: u32, policy: DynamicPolicy) -> Result<Self> {
        Self::new(delay, stations, RetransmissionSpec::Dynamic(policy))
    }

    pub fn framed(delay: u32, stations: u32, p: f64) -> Result<Self> {
        Self::new(delay, stations, RetransmissionSpec::Framed(Probability::new(p)?))
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.delay, self.stations)?;
        match &self.spec {
            RetransmissionSpec::Constant(p) | RetransmissionSpec::Framed(p) => {
                check_probability("probability", p.get())
            }
            RetransmissionSpec::Dynamic(policy) => {
                if policy.max_active() < self.stations {
                    Err(Error::InvalidParams(format!(
                        "dynamic policy covers n <= {} but N = {}",
                        policy.max_active(),
                        self.stations
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Per-slot transmit probability rule driving the finished-count chain.
#[derive(Debug, Clone, Copy)]
pub enum TransmitRule<'a> {
    Constant(f64),
    Dynamic(&'a DynamicPolicy),
}

impl TransmitRule<'_> {
    fn prob(&self, active: u32) -> f64 {
        match self {
            TransmitRule::Constant(p) => *p,
            TransmitRule::Dynamic(policy) => policy.get(active),
        }
    }

    fn validate(&self, stations: u32) -> Result<()> {
        match self {
            TransmitRule::Constant(p) => check_probability("probability", *p),
            TransmitRule::Dynamic(policy) if policy.max_active() < stations => {
                Err(Error::InvalidParams(format!("dynamic policy does not cover n = {stations}")))
            }
            TransmitRule::Dynamic(_) => Ok(()),
        }
    }
}

/// Probability that exactly one of the `N - m` active stations transmits.
pub fn success_prob_given_finished(stations: u32, finished: u32, p: f64) -> Result<f64> {
    check_probability("probability", p)?;
    if finished > stations {
        return Err(Error::InvalidParams(format!("finished count {finished} exceeds station count {stations}")));
    }
    Ok(success_prob(stations - finished, p))
}

/// `n p (1-p)^(n-1)`, zero when nobody is active.
fn success_prob(active: u32, p: f64) -> f64 {
    if active == 0 {
        0.0
    } else {
        f64::from(active) * p * pow(1.0 - p, u64::from(active - 1))
    }
}

/// Distribution of the number of finished stations at the start of slot `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinishedCountDistribution {
    slot: u32,
    probs: Vec<f64>,
}

impl FinishedCountDistribution {
    /// `M_1 = 0` with certainty.
    pub fn initial() -> Self {
        Self { slot: 1, probs: vec![1.0] }
    }

    /// Wraps an explicit distribution; checked against `stations` when advanced.
    pub fn from_parts(slot: u32, probs: Vec<f64>) -> Self {
        Self { slot, probs }
    }

    pub fn slot(&self) -> u32 {
        self.slot
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Checks length, sign and total mass for an `N`-station system.
    pub fn validate(&self, stations: u32) -> Result<()> {
        if self.slot == 0 {
            return Err(Error::MalformedDistribution("slot index starts at 1".into()));
        }
        let expected = (self.slot - 1).min(stations) as usize + 1;
        if self.probs.len() != expected {
            return Err(Error::MalformedDistribution(format!(
                "slot {} with N = {stations} needs {expected} entries, got {}",
                self.slot,
                self.probs.len()
            )));
        }
        if let Some(bad) = self.probs.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::MalformedDistribution(format!("entry {bad} outside [0, 1]")));
        }
        let mass: f64 = self.probs.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MalformedDistribution(format!("total mass {mass} != 1")));
        }
        Ok(())
    }

    /// Success probability of the current slot, `sum_m P(S_t = 1 | M_t = m) P(M_t = m)`.
    pub fn slot_success(&self, stations: u32, rule: TransmitRule<'_>) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(m, &mass)| {
                let active = stations - m as u32;
                if active == 0 {
                    0.0
                } else {
                    mass * success_prob(active, rule.prob(active))
                }
            })
            .sum()
    }

    // One slot of the stay/advance kernel; state N is absorbing.
    fn step(&self, stations: u32, rule: TransmitRule<'_>) -> Self {
        let len = self.slot.min(stations) as usize + 1;
        let mut next = vec![0.0; len];
        for (m, &mass) in self.probs.iter().enumerate() {
            let active = stations - m as u32;
            if active == 0 {
                next[m] += mass;
                continue;
            }
            let advance = success_prob(active, rule.prob(active));
            next[m] += (1.0 - advance) * mass;
            next[m + 1] += advance * mass;
        }
        Self { slot: self.slot + 1, probs: next }
    }
}

/// Pushes `P(M_t = .)` one slot forward.
pub fn advance_distribution(
    dist: &FinishedCountDistribution,
    stations: u32,
    rule: TransmitRule<'_>,
) -> Result<FinishedCountDistribution> {
    check_dims(1, stations)?;
    rule.validate(stations)?;
    dist.validate(stations)?;
    Ok(dist.step(stations, rule))
}

/// Per-slot success probabilities over one frame and their average.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub params: SchemeParams,
    pub per_slot_success: Vec<f64>,
    pub throughput: f64,
}

fn run_frame(params: SchemeParams, rule: TransmitRule<'_>) -> ThroughputReport {
    let mut dist = FinishedCountDistribution::initial();
    let mut per_slot_success = Vec::with_capacity(params.delay as usize);
    for t in 1..=params.delay {
        per_slot_success.push(dist.slot_success(params.stations, rule));
        if t < params.delay {
            dist = dist.step(params.stations, rule);
        }
    }
    let throughput = per_slot_success.iter().sum::<f64>() / f64::from(params.delay);
    ThroughputReport { params, per_slot_success, throughput }
}

/// Timely throughput `R(D, N, p)` of p-constant slotted ALOHA.
pub fn throughput_constant(delay: u32, stations: u32, p: f64) -> Result<ThroughputReport> {
    let params = SchemeParams::constant(delay, stations, p)?;
    Ok(run_frame(params, TransmitRule::Constant(p)))
}

/// Timely throughput of p-dynamic slotted ALOHA under `policy`.
pub fn throughput_dynamic(delay: u32, stations: u32, policy: &DynamicPolicy) -> Result<ThroughputReport> {
    let params = SchemeParams::dynamic(delay, stations, policy.clone())?;
    Ok(run_frame(params, TransmitRule::Dynamic(policy)))
}

/// Analytic throughput of any scheme; framed ALOHA goes through its closed form.
pub fn throughput(params: &SchemeParams) -> Result<f64> {
    params.validate()?;
    match &params.spec {
        RetransmissionSpec::Constant(p) => Ok(throughput_constant(params.delay, params.stations, p.get())?.throughput),
        RetransmissionSpec::Dynamic(policy) => {
            Ok(throughput_dynamic(params.delay, params.stations, policy)?.throughput)
        }
        RetransmissionSpec::Framed(p) => framed_throughput(params.delay, params.stations, p.get()),
    }
}
