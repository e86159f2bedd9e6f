//! RLRA-DC: tabular R-learning random access for delay-constrained traffic.
//!
//! Each station keeps relative values `Q(s, a)` over states `s = (lead time,
//! observation)` and actions `{TRANSMIT, WAIT}`, plus an average-reward
//! estimate `rho`. The reward is shared by all stations: 1 when the slot just
//! finished carried a successful delivery (the station then observes `BUSY` or
//! `SUCCESSFUL`), 0 otherwise.
//!
//! For the first `4D` slots every station runs p-constant ALOHA at
//! `1/(2N)` to seed heterogeneous tables. After that it acts greedily on `Q`,
//! breaking ties towards `WAIT`, and keeps learning every slot.
//!
//! When `N` is unknown, [`estimate_station_count`] sweeps the transmit
//! probability `0.1 / k` for `k = 1..=100` in 100-slot blocks and takes
//! `N = 10 k*` for the block with the best throughput.

use std::fmt;
use std::fmt::Write as _;

use crate::channel::{Observation, StationState};
use crate::error::{Error, Result};
use crate::record::{RunRecord, SchemeKind};
use crate::rng::{bernoulli, StationRng, StreamDomain};
use crate::schemes::PolicyDecision;
use crate::sim::{ratio, warmup_slots, Engine, SlotEvent, StationPolicy, StationView};

/// Learning rate for `Q`.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Learning rate for `rho`.
pub const DEFAULT_BETA: f64 = 0.01;
/// Length of the random initialisation phase, in frames.
pub const INIT_FRAMES: u64 = 4;

/// Base probability of the estimator sweep.
pub const ESTIMATOR_BASE_P: f64 = 0.1;
pub const ESTIMATOR_BLOCKS: u32 = 100;
pub const ESTIMATOR_BLOCK_LEN: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Transmit,
    Wait,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Transmit, Action::Wait];

    fn index(self) -> usize {
        match self {
            Action::Transmit => 0,
            Action::Wait => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Transmit => "TRANSMIT",
            Action::Wait => "WAIT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type AgentState = StationState;

/// `1` when the observation reports a delivery in the previous slot.
pub fn reward(state: &AgentState) -> f64 {
    match state.observation {
        Observation::Busy | Observation::Successful => 1.0,
        Observation::Idle | Observation::Failed => 0.0,
    }
}

/// Relative values and average-reward estimate of one station.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTable {
    delay: u32,
    q: Vec<f64>,
    rho: f64,
    alpha: f64,
    beta: f64,
}

impl AgentTable {
    pub fn new(delay: u32) -> Result<Self> {
        Self::with_rates(delay, DEFAULT_ALPHA, DEFAULT_BETA)
    }

    pub fn with_rates(delay: u32, alpha: f64, beta: f64) -> Result<Self> {
        if delay == 0 {
            return Err(Error::InvalidParams("hard delay D must be at least 1".into()));
        }
        for (name, rate) in [("alpha", alpha), ("beta", beta)] {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::InvalidParams(format!("{name} must lie in (0, 1], got {rate}")));
            }
        }
        Ok(Self { delay, q: vec![0.0; 2 * state_count(delay)], rho: 0.0, alpha, beta })
    }

    pub fn delay(&self) -> u32 {
        self.delay
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of `(state, action)` entries.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    // With D = 1 the lead time is 1 whenever a decision is taken, so only
    // the observation indexes the table.
    fn slot(&self, state: &AgentState, action: Action) -> usize {
        let s = if self.delay == 1 {
            state.observation.index()
        } else {
            debug_assert!(state.lead_time <= self.delay);
            state.lead_time as usize * 4 + state.observation.index()
        };
        2 * s + action.index()
    }

    pub fn q(&self, state: &AgentState, action: Action) -> f64 {
        self.q[self.slot(state, action)]
    }

    pub fn set_q(&mut self, state: &AgentState, action: Action, value: f64) {
        let i = self.slot(state, action);
        self.q[i] = value;
    }

    pub fn set_rho(&mut self, rho: f64) {
        self.rho = rho;
    }

    pub fn max_q(&self, state: &AgentState) -> f64 {
        let i = self.slot(state, Action::Transmit);
        self.q[i].max(self.q[i + 1])
    }

    /// Greedy action; ties go to `WAIT`.
    pub fn greedy(&self, state: &AgentState) -> Action {
        let i = self.slot(state, Action::Transmit);
        if self.q[i] > self.q[i + 1] {
            Action::Transmit
        } else {
            Action::Wait
        }
    }

    /// One R-learning step. Both updates use the same temporal difference,
    /// computed from the values before either update.
    pub fn update(&mut self, state: &AgentState, action: Action, reward: f64, next: &AgentState) {
        let i = self.slot(state, action);
        let delta = reward + self.max_q(next) - self.q[i] - self.rho;
        self.q[i] += self.alpha * delta;
        self.rho += self.beta * delta;
    }

    /// Every state the table covers.
    pub fn states(&self) -> Vec<AgentState> {
        let leads: Vec<u32> = if self.delay == 1 { vec![1] } else { (0..=self.delay).collect() };
        leads
            .into_iter()
            .flat_map(|l| Observation::ALL.map(|o| StationState { lead_time: l, observation: o }))
            .collect()
    }

    /// Flat text dump: a header line, a `rho` line, then one
    /// `lead observation action q` row per entry.
    pub fn to_text(&self) -> String {
        let mut out =
            format!("agent-table delay={} alpha={} beta={}\nrho {}\n", self.delay, self.alpha, self.beta, self.rho);
        for s in self.states() {
            for a in Action::ALL {
                let _ = writeln!(out, "{} {} {} {}", s.lead_time, s.observation, a, self.q(&s, a));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParams(format!("agent table text: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("agent-table") {
            return Err(bad("missing header"));
        }
        let mut get = |key: &str| -> Result<String> {
            let field = fields.next().ok_or_else(|| bad("short header"))?;
            field
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| bad("unexpected header field"))
        };
        let delay: u32 = get("delay")?.parse().map_err(|_| bad("delay"))?;
        let alpha: f64 = get("alpha")?.parse().map_err(|_| bad("alpha"))?;
        let beta: f64 = get("beta")?.parse().map_err(|_| bad("beta"))?;
        let mut table = Self::with_rates(delay, alpha, beta)?;

        let rho_line = lines.next().ok_or_else(|| bad("missing rho line"))?;
        table.rho = rho_line.strip_prefix("rho ").and_then(|v| v.parse().ok()).ok_or_else(|| bad("rho line"))?;

        let mut seen = vec![false; table.len()];
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [lead, obs, action, value] = parts[..] else {
                return Err(bad("row needs four fields"));
            };
            let state = StationState {
                lead_time: lead.parse().map_err(|_| bad("lead time"))?,
                observation: Observation::parse(obs).ok_or_else(|| bad("observation"))?,
            };
            if state.lead_time > delay || (delay == 1 && state.lead_time != 1) {
                return Err(bad("lead time out of range"));
            }
            let action = Action::parse(action).ok_or_else(|| bad("action"))?;
            let i = table.slot(&state, action);
            if std::mem::replace(&mut seen[i], true) {
                return Err(bad("duplicate row"));
            }
            table.q[i] = value.parse().map_err(|_| bad("q value"))?;
        }
        if seen.contains(&false) {
            return Err(bad("row count does not match the state space"));
        }
        Ok(table)
    }
}

/// `|S|`: 4 observations times the possible lead times.
pub fn state_count(delay: u32) -> usize {
    if delay == 1 {
        4
    } else {
        4 * (delay as usize + 1)
    }
}

/// Action for slot `t`: Bernoulli(`1/(2N)`) during the first `4D` slots,
/// greedy afterwards.
pub fn select_action(
    table: &AgentTable,
    state: &AgentState,
    slot: u64,
    delay: u32,
    stations: u32,
    rng: &mut StationRng,
) -> Action {
    if slot <= INIT_FRAMES * u64::from(delay) {
        let p = 1.0 / (2.0 * f64::from(stations));
        if bernoulli(rng, p) {
            Action::Transmit
        } else {
            Action::Wait
        }
    } else {
        table.greedy(state)
    }
}

/// One RLRA-DC station.
#[derive(Debug, Clone)]
pub struct RlraAgent {
    table: AgentTable,
    assumed_stations: u32,
    state: AgentState,
    selected: Action,
    coerced: u64,
}

impl RlraAgent {
    /// `assumed_stations` is the `N` used for the initialisation probability.
    pub fn new(delay: u32, assumed_stations: u32) -> Result<Self> {
        if assumed_stations == 0 {
            return Err(Error::InvalidParams("assumed station count must be at least 1".into()));
        }
        Ok(Self {
            table: AgentTable::new(delay)?,
            assumed_stations,
            state: StationState::fresh(delay),
            selected: Action::Wait,
            coerced: 0,
        })
    }

    pub fn table(&self) -> &AgentTable {
        &self.table
    }

    pub fn into_table(self) -> AgentTable {
        self.table
    }

    /// Slots in which `TRANSMIT` was selected without a packet to send.
    pub fn coerced_transmits(&self) -> u64 {
        self.coerced
    }
}

impl StationPolicy for RlraAgent {
    fn decide(&mut self, view: &StationView, rng: &mut StationRng) -> Result<PolicyDecision> {
        self.state = view.state();
        let delay = self.table.delay;
        self.selected = select_action(&self.table, &self.state, view.slot, delay, self.assumed_stations, rng);
        let transmit = self.selected == Action::Transmit;
        if transmit && view.lead_time == 0 {
            self.coerced += 1;
        }
        Ok(PolicyDecision::transmit_if(transmit && view.lead_time >= 1))
    }

    // The next state's observation carries the outcome of the slot just
    // played, which is the reward for the action taken in it.
    fn observe(&mut self, next: &StationView) {
        let next_state = next.state();
        self.table.update(&self.state, self.selected, reward(&next_state), &next_state);
    }
}

/// Result of an RLRA-DC run.
#[derive(Debug, Clone)]
pub struct RlraOutcome {
    pub record: RunRecord,
    pub tables: Vec<AgentTable>,
    /// Total slots in which some agent selected `TRANSMIT` without a packet.
    pub coerced_transmits: u64,
}

/// Runs RLRA-DC with `N` known to every station.
pub fn run_rlra_dc(delay: u32, stations: u32, seed: u64, slots: u64) -> Result<RlraOutcome> {
    run_rlra_dc_observed(delay, stations, stations, seed, slots, &mut |_| {})
}

/// Runs RLRA-DC with `assumed_stations` in place of `N` for the
/// initialisation probability, reporting each slot to `observer`.
pub fn run_rlra_dc_observed(
    delay: u32,
    stations: u32,
    assumed_stations: u32,
    seed: u64,
    slots: u64,
    observer: &mut dyn FnMut(&SlotEvent<'_>),
) -> Result<RlraOutcome> {
    let min = INIT_FRAMES * u64::from(delay);
    if slots < min {
        return Err(Error::TooFewSlots { slots, min });
    }
    if stations == 0 {
        return Err(Error::InvalidParams("station count N must be at least 1".into()));
    }
    let agents = (0..stations).map(|_| RlraAgent::new(delay, assumed_stations)).collect::<Result<Vec<_>>>()?;
    let mut engine = Engine::new(delay, agents, seed, StreamDomain::Run)?;
    engine.run(slots, warmup_slots(slots), observer)?;
    let totals = engine.totals();
    let agents = engine.into_policies();
    let coerced_transmits = agents.iter().map(RlraAgent::coerced_transmits).sum();
    Ok(RlraOutcome {
        record: RunRecord {
            scheme: SchemeKind::RlraDc,
            delay,
            stations,
            param: None,
            seed,
            slots,
            delivered: totals.delivered,
            expired: totals.expired,
            throughput: ratio(totals.delivered, totals.slots),
            settled_throughput: ratio(totals.settled_delivered, totals.settled_slots),
        },
        tables: agents.into_iter().map(RlraAgent::into_table).collect(),
        coerced_transmits,
    })
}

/// Estimates `N` first, then runs RLRA-DC with the estimate. The record's
/// `param` holds the estimate.
pub fn run_rlra_dc_estimated(delay: u32, stations: u32, seed: u64, slots: u64) -> Result<RlraOutcome> {
    let estimate = estimate_station_count(delay, stations, seed)?;
    let mut outcome = run_rlra_dc_observed(delay, stations, estimate.stations, seed, slots, &mut |_| {})?;
    outcome.record.param = Some(f64::from(estimate.stations));
    Ok(outcome)
}

/// Stations transmit with probability `0.1 / k` during block `k`.
#[derive(Debug, Clone, Copy, Default)]
struct SweepPolicy;

impl StationPolicy for SweepPolicy {
    fn decide(&mut self, view: &StationView, rng: &mut StationRng) -> Result<PolicyDecision> {
        if view.lead_time == 0 {
            return Ok(PolicyDecision::SILENT);
        }
        let block = (view.slot - 1) / ESTIMATOR_BLOCK_LEN + 1;
        let p = ESTIMATOR_BASE_P / block as f64;
        Ok(PolicyDecision::transmit_if(bernoulli(rng, p)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationEstimate {
    /// Estimated station count, `10 k*`.
    pub stations: u32,
    /// Empirical throughput of each 100-slot block.
    pub block_throughput: Vec<f64>,
}

/// Runs the probability sweep on a system of `stations` stations.
///
/// All stations hear the same feedback, so they all arrive at the same
/// estimate. Ties between blocks go to the smallest `k`.
pub fn estimate_station_count(delay: u32, stations: u32, seed: u64) -> Result<StationEstimate> {
    if stations == 0 {
        return Err(Error::InvalidParams("station count N must be at least 1".into()));
    }
    let mut engine = Engine::new(delay, vec![SweepPolicy; stations as usize], seed, StreamDomain::Estimator)?;
    let mut successes = vec![0_u64; ESTIMATOR_BLOCKS as usize];
    let slots = u64::from(ESTIMATOR_BLOCKS) * ESTIMATOR_BLOCK_LEN;
    engine.run(slots, slots, &mut |e| {
        if e.outcome.winner.is_some() {
            successes[((e.slot - 1) / ESTIMATOR_BLOCK_LEN) as usize] += 1;
        }
    })?;
    let block_throughput: Vec<f64> = successes.iter().map(|&s| s as f64 / ESTIMATOR_BLOCK_LEN as f64).collect();
    let mut best = 0;
    for (k, &r) in block_throughput.iter().enumerate() {
        if r > block_throughput[best] {
            best = k;
        }
    }
    let k_star = best as f64 + 1.0;
    Ok(StationEstimate { stations: (k_star / ESTIMATOR_BASE_P).round() as u32, block_throughput })
}
