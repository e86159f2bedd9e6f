//! Station policies for p-constant, p-dynamic and framed slotted ALOHA.

use crate::analytic::{DynamicPolicy, RetransmissionSpec};
use crate::error::{Error, Result};
use crate::rng::{bernoulli, StationRng};
use crate::sim::{StationPolicy, StationView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolicyDecision {
    pub transmit: bool,
}

impl PolicyDecision {
    pub const SILENT: Self = Self { transmit: false };

    pub fn transmit_if(transmit: bool) -> Self {
        Self { transmit }
    }
}

/// Transmit with a fixed probability in every slot while holding a packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPolicy {
    p: f64,
}

impl ConstantPolicy {
    pub fn new(p: f64) -> Self {
        Self { p }
    }
}

impl StationPolicy for ConstantPolicy {
    fn decide(&mut self, view: &StationView, rng: &mut StationRng) -> Result<PolicyDecision> {
        if view.lead_time == 0 {
            return Ok(PolicyDecision::SILENT);
        }
        Ok(PolicyDecision::transmit_if(bernoulli(rng, self.p)))
    }
}

/// Transmit with a probability that depends on the number of active stations.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicStationPolicy {
    policy: DynamicPolicy,
}

impl DynamicStationPolicy {
    pub fn new(policy: DynamicPolicy) -> Self {
        Self { policy }
    }
}

impl StationPolicy for DynamicStationPolicy {
    fn wants_active_count(&self) -> bool {
        true
    }

    fn decide(&mut self, view: &StationView, rng: &mut StationRng) -> Result<PolicyDecision> {
        if view.lead_time == 0 {
            return Ok(PolicyDecision::SILENT);
        }
        match view.active_count {
            Some(n) if n >= 1 && n <= self.policy.max_active() => {
                Ok(PolicyDecision::transmit_if(bernoulli(rng, self.policy.get(n))))
            }
            Some(0) => Err(Error::Internal("active station saw an active count of zero")),
            Some(_) => Err(Error::Internal("active count beyond the dynamic policy's range")),
            None => Err(Error::Internal("dynamic policy was not given the active count")),
        }
    }
}

/// Pick one slot of the frame uniformly, then attempt it with probability `p`.
///
/// Both draws happen at frame start. Feedback is never consulted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramedPolicy {
    p: f64,
    chosen_slot: u32,
    armed: bool,
}

impl FramedPolicy {
    pub fn new(p: f64) -> Self {
        Self { p, chosen_slot: 0, armed: false }
    }

    /// Slot picked for the current frame and whether the attempt is on.
    pub fn plan(&self) -> (u32, bool) {
        (self.chosen_slot, self.armed)
    }
}

impl StationPolicy for FramedPolicy {
    fn frame_start(&mut self, delay: u32, rng: &mut StationRng) {
        use rand::Rng;
        self.chosen_slot = rng.gen_range(1..=delay);
        self.armed = bernoulli(rng, self.p);
    }

    fn decide(&mut self, view: &StationView, _rng: &mut StationRng) -> Result<PolicyDecision> {
        let transmit = view.lead_time >= 1 && self.armed && view.slot_in_frame == self.chosen_slot;
        Ok(PolicyDecision::transmit_if(transmit))
    }
}

/// The three ALOHA variants behind one type, so a run stays monomorphic.
#[derive(Debug, Clone, PartialEq)]
pub enum AlohaPolicy {
    Constant(ConstantPolicy),
    Dynamic(DynamicStationPolicy),
    Framed(FramedPolicy),
}

impl AlohaPolicy {
    pub fn from_spec(spec: &RetransmissionSpec) -> Self {
        match spec {
            RetransmissionSpec::Constant(p) => AlohaPolicy::Constant(ConstantPolicy::new(p.get())),
            RetransmissionSpec::Dynamic(policy) => AlohaPolicy::Dynamic(DynamicStationPolicy::new(policy.clone())),
            RetransmissionSpec::Framed(p) => AlohaPolicy::Framed(FramedPolicy::new(p.get())),
        }
    }
}

impl StationPolicy for AlohaPolicy {
    fn wants_active_count(&self) -> bool {
        matches!(self, AlohaPolicy::Dynamic(_))
    }

    fn frame_start(&mut self, delay: u32, rng: &mut StationRng) {
        if let AlohaPolicy::Framed(f) = self {
            f.frame_start(delay, rng);
        }
    }

    fn decide(&mut self, view: &StationView, rng: &mut StationRng) -> Result<PolicyDecision> {
        match self {
            AlohaPolicy::Constant(c) => c.decide(view, rng),
            AlohaPolicy::Dynamic(d) => d.decide(view, rng),
            AlohaPolicy::Framed(f) => f.decide(view, rng),
        }
    }
}
