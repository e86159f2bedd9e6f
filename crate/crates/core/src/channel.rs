//! Collision channel, AP feedback and per-station observations.

use std::fmt;

use crate::error::{Error, Result};

/// What the access point broadcasts at the end of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feedback {
    /// Exactly one packet was decoded.
    Ack,
    /// Two or more packets collided.
    Nack,
    /// Nobody transmitted; the AP stays quiet.
    Silence,
}

impl Feedback {
    pub fn as_str(self) -> &'static str {
        match self {
            Feedback::Ack => "ACK",
            Feedback::Nack => "NACK",
            Feedback::Silence => "SILENCE",
        }
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelOutcome {
    pub transmit_count: usize,
    pub feedback: Feedback,
    /// Index of the sole transmitter when `feedback` is `Ack`.
    pub winner: Option<usize>,
}

/// Resolves one slot of the collision channel.
pub fn step_channel(decisions: &[bool]) -> ChannelOutcome {
    let mut transmit_count = 0;
    let mut last = None;
    for (i, _) in decisions.iter().enumerate().filter(|(_, &tx)| tx) {
        transmit_count += 1;
        last = Some(i);
    }
    let (feedback, winner) = match transmit_count {
        0 => (Feedback::Silence, None),
        1 => (Feedback::Ack, last),
        _ => (Feedback::Nack, None),
    };
    ChannelOutcome { transmit_count, feedback, winner }
}

/// A station's reading of the previous slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    /// Someone else was acknowledged.
    Busy,
    /// This station was acknowledged.
    Successful,
    /// Nothing was heard.
    Idle,
    /// A NACK was broadcast.
    Failed,
}

impl Observation {
    pub const ALL: [Observation; 4] =
        [Observation::Busy, Observation::Successful, Observation::Idle, Observation::Failed];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Observation::Busy => "BUSY",
            Observation::Successful => "SUCCESSFUL",
            Observation::Idle => "IDLE",
            Observation::Failed => "FAILED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.as_str() == s)
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Combines a station's own transmit decision with the broadcast feedback.
pub fn derive_observation(did_transmit: bool, feedback: Feedback) -> Result<Observation> {
    match (did_transmit, feedback) {
        (false, Feedback::Ack) => Ok(Observation::Busy),
        (true, Feedback::Ack) => Ok(Observation::Successful),
        (false, Feedback::Silence) => Ok(Observation::Idle),
        (true, Feedback::Silence) => Err(Error::Internal("transmitting station heard silence")),
        (_, Feedback::Nack) => Ok(Observation::Failed),
    }
}

/// Lead time of the pending packet (0 when none) and the last observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationState {
    pub lead_time: u32,
    pub observation: Observation,
}

impl StationState {
    /// State at slot 1: a fresh packet and the `IDLE` convention.
    pub fn fresh(delay: u32) -> Self {
        Self { lead_time: delay, observation: Observation::Idle }
    }

    pub fn is_active(&self) -> bool {
        self.lead_time >= 1
    }
}

/// Number of stations still holding an undelivered packet.
pub fn active_count_oracle(states: &[StationState]) -> usize {
    states.iter().filter(|s| s.is_active()).count()
}
