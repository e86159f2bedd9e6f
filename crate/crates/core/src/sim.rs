//! Slot-level simulation of the collision channel under frame-synchronized
//! traffic.
//!
//! Every station receives a packet at slots `1, D+1, 2D+1, ...`. A packet that
//! is not delivered by the end of its frame expires. Each slot the engine asks
//! every station's [`StationPolicy`] for a decision, resolves the channel,
//! broadcasts the feedback and updates lead times. Stations without a packet
//! are always silent, whatever their policy returns.

use std::fmt::Write as _;

use crate::analytic::{RetransmissionSpec, SchemeParams};
use crate::channel::{derive_observation, step_channel, ChannelOutcome, StationState};
use crate::error::{Error, Result};
use crate::record::{RunRecord, SchemeKind};
use crate::rng::{station_rng, StationRng, StreamDomain};
use crate::schemes::{AlohaPolicy, PolicyDecision};
use crate::Observation;

/// What a station knows when it decides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationView {
    /// Global slot index, starting at 1.
    pub slot: u64,
    /// Position inside the current frame, `1..=D`.
    pub slot_in_frame: u32,
    pub lead_time: u32,
    pub observation: Observation,
    /// Number of active stations; only filled for policies that ask for it.
    pub active_count: Option<u32>,
}

impl StationView {
    pub fn state(&self) -> StationState {
        StationState { lead_time: self.lead_time, observation: self.observation }
    }
}

/// Station-side protocol logic.
pub trait StationPolicy {
    /// Whether [`StationView::active_count`] should be filled in.
    fn wants_active_count(&self) -> bool {
        false
    }

    /// Called when a new frame begins, before its first decision.
    fn frame_start(&mut self, _delay: u32, _rng: &mut StationRng) {}

    fn decide(&mut self, view: &StationView, rng: &mut StationRng) -> Result<PolicyDecision>;

    /// Called after the slot resolves with the view the station will hold at
    /// the start of the next slot.
    fn observe(&mut self, _next: &StationView) {}
}

/// Everything that happened in one slot, handed to observers.
#[derive(Debug)]
pub struct SlotEvent<'a> {
    pub slot: u64,
    /// Station states at the start of the slot.
    pub states: &'a [StationState],
    /// Physical transmissions after coercion.
    pub decisions: &'a [bool],
    pub outcome: &'a ChannelOutcome,
}

/// Line-oriented slot trace, one `slot,tx_count,feedback` row per slot.
#[derive(Debug, Default, Clone)]
pub struct TraceLog {
    text: String,
}

impl TraceLog {
    pub fn record(&mut self, event: &SlotEvent<'_>) {
        let _ = writeln!(self.text, "{},{},{}", event.slot, event.outcome.transmit_count, event.outcome.feedback);
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Delivery counters accumulated by an [`Engine`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub slots: u64,
    pub delivered: u64,
    pub expired: u64,
    /// Deliveries after the warm-up window.
    pub settled_delivered: u64,
    pub settled_slots: u64,
}

/// The simulated world: station states, their policies and random streams.
pub struct Engine<P> {
    delay: u32,
    states: Vec<StationState>,
    policies: Vec<P>,
    rngs: Vec<StationRng>,
    decisions: Vec<bool>,
    active: u32,
    slot: u64,
    totals: Totals,
}

impl<P: StationPolicy> Engine<P> {
    pub fn new(delay: u32, policies: Vec<P>, seed: u64, domain: StreamDomain) -> Result<Self> {
        if delay == 0 {
            return Err(Error::InvalidParams("hard delay D must be at least 1".into()));
        }
        if policies.is_empty() {
            return Err(Error::InvalidParams("simulation needs at least one station".into()));
        }
        let n = policies.len();
        let rngs = (0..n as u32).map(|i| station_rng(seed, domain, i)).collect();
        Ok(Self {
            delay,
            states: vec![StationState::fresh(delay); n],
            policies,
            rngs,
            decisions: vec![false; n],
            active: n as u32,
            slot: 0,
            totals: Totals::default(),
        })
    }

    pub fn stations(&self) -> &[StationState] {
        &self.states
    }

    pub fn policies(&self) -> &[P] {
        &self.policies
    }

    pub fn into_policies(self) -> Vec<P> {
        self.policies
    }

    pub fn totals(&self) -> Totals {
        self.totals
    }

    /// Index of the next slot to run.
    pub fn next_slot(&self) -> u64 {
        self.slot + 1
    }

    fn view(&self, i: usize, slot: u64) -> StationView {
        let s = self.states[i];
        StationView {
            slot,
            slot_in_frame: ((slot - 1) % u64::from(self.delay)) as u32 + 1,
            lead_time: s.lead_time,
            observation: s.observation,
            active_count: self.policies[i].wants_active_count().then_some(self.active),
        }
    }

    /// Runs `slots` more slots. Deliveries in slots with global index above
    /// `warmup` also count towards the settled totals.
    pub fn run(&mut self, slots: u64, warmup: u64, observer: &mut dyn FnMut(&SlotEvent<'_>)) -> Result<()> {
        for _ in 0..slots {
            self.step(warmup, observer)?;
        }
        Ok(())
    }

    fn step(&mut self, warmup: u64, observer: &mut dyn FnMut(&SlotEvent<'_>)) -> Result<()> {
        let t = self.slot + 1;
        if t == 1 {
            for (policy, rng) in self.policies.iter_mut().zip(&mut self.rngs) {
                policy.frame_start(self.delay, rng);
            }
        }

        for i in 0..self.states.len() {
            let view = self.view(i, t);
            let decision = self.policies[i].decide(&view, &mut self.rngs[i])?;
            self.decisions[i] = decision.transmit && self.states[i].is_active();
        }
        let outcome = step_channel(&self.decisions);
        observer(&SlotEvent { slot: t, states: &self.states, decisions: &self.decisions, outcome: &outcome });

        for (i, state) in self.states.iter_mut().enumerate() {
            state.observation = derive_observation(self.decisions[i], outcome.feedback)?;
            if outcome.winner == Some(i) {
                state.lead_time = 0;
                self.active -= 1;
            } else if state.lead_time > 0 {
                state.lead_time -= 1;
                if state.lead_time == 0 {
                    self.totals.expired += 1;
                    self.active -= 1;
                }
            }
        }
        self.totals.slots += 1;
        if outcome.winner.is_some() {
            self.totals.delivered += 1;
            if t > warmup {
                self.totals.settled_delivered += 1;
            }
        }
        if t > warmup {
            self.totals.settled_slots += 1;
        }

        if t.is_multiple_of(u64::from(self.delay)) {
            for state in &mut self.states {
                state.lead_time = self.delay;
            }
            self.active = self.states.len() as u32;
            for (policy, rng) in self.policies.iter_mut().zip(&mut self.rngs) {
                policy.frame_start(self.delay, rng);
            }
        }

        self.slot = t;
        for i in 0..self.states.len() {
            let next = self.view(i, t + 1);
            self.policies[i].observe(&next);
        }
        Ok(())
    }
}

/// Slots excluded from the settled throughput: the first 10% of the run.
pub fn warmup_slots(slots: u64) -> u64 {
    slots / 10
}

pub(crate) fn check_whole_frames(delay: u32, slots: u64) -> Result<()> {
    if slots == 0 {
        return Err(Error::TooFewSlots { slots, min: u64::from(delay) });
    }
    if !slots.is_multiple_of(u64::from(delay)) {
        return Err(Error::PartialFrame { slots, delay });
    }
    Ok(())
}

pub(crate) fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Simulates one of the three ALOHA schemes for `slots` slots.
pub fn run_simulation(params: &SchemeParams, seed: u64, slots: u64) -> Result<RunRecord> {
    run_simulation_observed(params, seed, slots, &mut |_| {})
}

/// [`run_simulation`] with a per-slot observer, e.g. [`TraceLog::record`].
pub fn run_simulation_observed(
    params: &SchemeParams,
    seed: u64,
    slots: u64,
    observer: &mut dyn FnMut(&SlotEvent<'_>),
) -> Result<RunRecord> {
    params.validate()?;
    check_whole_frames(params.delay, slots)?;
    let policies = (0..params.stations).map(|_| AlohaPolicy::from_spec(&params.spec)).collect();
    let mut engine = Engine::new(params.delay, policies, seed, StreamDomain::Run)?;
    let warmup = warmup_slots(slots);
    engine.run(slots, warmup, observer)?;
    let totals = engine.totals();

    let (scheme, param) = match &params.spec {
        RetransmissionSpec::Constant(p) => (SchemeKind::Constant, Some(p.get())),
        RetransmissionSpec::Dynamic(policy) => (SchemeKind::Dynamic, policy.alpha()),
        RetransmissionSpec::Framed(p) => (SchemeKind::Framed, Some(p.get())),
    };
    Ok(RunRecord {
        scheme,
        delay: params.delay,
        stations: params.stations,
        param,
        seed,
        slots,
        delivered: totals.delivered,
        expired: totals.expired,
        throughput: ratio(totals.delivered, totals.slots),
        settled_throughput: ratio(totals.settled_delivered, totals.settled_slots),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DynamicPolicy;

    #[test]
    fn certain_collision_delivers_nothing() {
        let params = SchemeParams::constant(3, 2, 1.0).unwrap();
        let rec = run_simulation(&params, 99, 300).unwrap();
        assert_eq!(rec.delivered, 0);
        assert_eq!(rec.expired, 200);
        assert_eq!(rec.throughput, 0.0);
    }

    #[test]
    fn lone_station_delivers_once_per_frame() {
        let params = SchemeParams::dynamic(5, 1, DynamicPolicy::inverse(1).unwrap()).unwrap();
        let rec = run_simulation(&params, 1, 500).unwrap();
        assert_eq!(rec.delivered, 100);
        assert_eq!(rec.throughput, 0.2);
    }

    #[test]
    fn rejects_partial_frames_and_empty_runs() {
        let params = SchemeParams::constant(3, 2, 0.5).unwrap();
        assert_eq!(run_simulation(&params, 0, 10), Err(Error::PartialFrame { slots: 10, delay: 3 }));
        assert!(matches!(run_simulation(&params, 0, 0), Err(Error::TooFewSlots { .. })));
        let empty: Vec<AlohaPolicy> = Vec::new();
        assert!(Engine::new(3, empty, 0, StreamDomain::Run).is_err());
    }

    #[test]
    fn trace_lines_match_outcomes() {
        let params = SchemeParams::constant(2, 2, 1.0).unwrap();
        let mut log = TraceLog::default();
        run_simulation_observed(&params, 5, 4, &mut |e| log.record(e)).unwrap();
        assert_eq!(log.as_str(), "1,2,NACK\n2,2,NACK\n3,2,NACK\n4,2,NACK\n");
    }
}
