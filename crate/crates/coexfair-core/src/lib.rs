//! Core models for Wi-Fi beacon delivery under a duty-cycled LTE-U interferer.
//!
//! The crate answers one question two independent ways: when an interferer
//! occupies the channel on a fixed ON/OFF schedule, how often are 802.11
//! beacons lost and how late do they arrive?
//!
//! - [`analytic`] evaluates the closed-form drop probability and expected
//!   delivery time for a beacon transmitted with CSMA/CA against the schedule.
//! - [`sim`] runs a discrete-event Monte Carlo of the same procedure (DIFS
//!   sensing, uniform backoff with freeze/resume, post-hoc overlap drop) so
//!   the closed forms can be cross-validated.
//! - [`trace`] computes the matching statistics from timestamped beacon
//!   observations, e.g. capture-tool exports, including sequence-ID loss
//!   matching and the grid-based mean-delay estimator.
//!
//! All times are integer microseconds. The crate is `no_std` (with `alloc`);
//! file formats and the CLI live in the companion `coexfair` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytic;
pub mod cdf;
pub mod mac;
pub mod schedule;
pub mod sim;
pub mod trace;

pub use analytic::{AnalyticError, AnalyticReport, ModelInputs};
pub use cdf::{CdfPoint, CdfSeries};
pub use mac::{MacError, MacViolation, OverlapPolicy, PolicyError, WifiMacParams};
pub use schedule::{
    ChannelState, ConfigError, DutyCycleConfig, Phase, ScheduleError, Strictness, Violation,
};
pub use sim::{
    BeaconCase, BeaconRecord, CaseCounts, CompareError, ComparisonRecord, GridOffset, IntervalKind,
    ReplicationRun, SimConfig, SimError, SimResult,
};
pub use trace::{BeaconTrace, MatchReport, TraceEntry, TraceError};
