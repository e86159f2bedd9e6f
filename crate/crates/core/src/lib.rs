//! Delay-constrained random access over a slotted collision channel.
//!
//! The crate has three layers:
//!
//! * [`analytic`] computes exact timely throughput for p-constant, p-dynamic
//!   and framed slotted ALOHA under frame-synchronized traffic, together with
//!   the optimal retransmission probabilities.
//! * [`sim`] is a seeded slot-level simulator of the same channel. Station
//!   behaviour is pluggable through [`sim::StationPolicy`]; the ALOHA variants
//!   live in [`schemes`].
//! * [`rl`] implements the R-learning random access protocol (RLRA-DC) and the
//!   station-count estimator that feeds it.
//!
//! Every random draw comes from [`rng::station_rng`], so a `(config, seed)`
//! pair always reproduces the same run.

pub mod analytic;
pub mod channel;
mod error;
pub mod record;
pub mod rl;
pub mod rng;
pub mod schemes;
pub mod sim;

pub use analytic::{
    DynamicPolicy, FinishedCountDistribution, Probability, RetransmissionSpec, SchemeParams, ThroughputReport,
};
pub use channel::{ChannelOutcome, Feedback, Observation, StationState};
pub use error::{Error, Result};
pub use record::{RunRecord, SchemeKind};
