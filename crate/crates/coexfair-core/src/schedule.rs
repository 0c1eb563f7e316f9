//! Interferer ON/OFF schedule arithmetic and configuration validation.
//!
//! The schedule is a fixed period of `t_on_us` busy followed by `t_off_us`
//! idle, repeating from `phase_origin_us`. Intervals are half-open: the
//! instant of an OFF-to-ON edge belongs to ON and the instant of an
//! ON-to-OFF edge belongs to OFF, so every instant has exactly one state.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// LTE-U Forum bounds applied by [`Strictness::Strict`] validation, in µs.
pub const STRICT_MIN_ON_US: u64 = 4_000;
pub const STRICT_MAX_ON_US: u64 = 20_000;
pub const STRICT_MIN_OFF_US: u64 = 1_000;

/// Duty-cycled interferer schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DutyCycleConfig {
    /// Length of the ON (busy) period in µs.
    pub t_on_us: u64,
    /// Length of the OFF (idle) period in µs.
    pub t_off_us: u64,
    /// Absolute time at which the first ON period begins.
    #[serde(default)]
    pub phase_origin_us: u64,
}

impl DutyCycleConfig {
    pub const fn new(t_on_us: u64, t_off_us: u64) -> Self {
        Self {
            t_on_us,
            t_off_us,
            phase_origin_us: 0,
        }
    }

    pub const fn with_phase_origin(mut self, phase_origin_us: u64) -> Self {
        self.phase_origin_us = phase_origin_us;
        self
    }

    pub const fn period_us(&self) -> u64 {
        self.t_on_us + self.t_off_us
    }

    /// Fraction of time the interferer is ON, `t_on / (t_on + t_off)`.
    pub fn duty_cycle(&self) -> f64 {
        let period = self.period_us();
        if period == 0 {
            return 0.0;
        }
        self.t_on_us as f64 / period as f64
    }

    /// Check the schedule against structural invariants and, in strict mode,
    /// the LTE-U Forum bounds. Returns every violation found.
    ///
    /// `t_on_us == 0` means "interferer absent" and passes strict mode: the
    /// Forum bounds constrain an active transmitter, not its absence.
    pub fn validate(&self, strictness: Strictness) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        if self.period_us() == 0 {
            violations.push(Violation::NonpositivePeriod);
            return Err(ConfigError::Invalid(violations));
        }
        if self.t_off_us == 0 {
            violations.push(Violation::OffTooShort);
        }
        if strictness == Strictness::Strict && self.t_on_us > 0 {
            if self.t_on_us < STRICT_MIN_ON_US {
                violations.push(Violation::OnTooShort);
            }
            if self.t_on_us > STRICT_MAX_ON_US {
                violations.push(Violation::OnTooLong);
            }
            if self.t_off_us < STRICT_MIN_OFF_US && self.t_off_us > 0 {
                violations.push(Violation::OffTooShort);
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(violations))
        }
    }

    /// Channel state at absolute time `t`, with the exact time to the next
    /// edge and the 0-based index of the containing cycle.
    pub fn phase_at(&self, t: u64) -> Result<Phase, ScheduleError> {
        if t < self.phase_origin_us {
            return Err(ScheduleError::BeforeOrigin {
                t_us: t,
                origin_us: self.phase_origin_us,
            });
        }
        let period = self.period_us();
        if period == 0 {
            return Err(ScheduleError::ZeroPeriod);
        }
        let rel = t - self.phase_origin_us;
        let cycle_index = rel / period;
        let pos = rel % period;
        let phase = if pos < self.t_on_us {
            Phase {
                state: ChannelState::On,
                time_to_next_edge_us: self.t_on_us - pos,
                cycle_index,
            }
        } else {
            Phase {
                state: ChannelState::Off,
                time_to_next_edge_us: period - pos,
                cycle_index,
            }
        };
        Ok(phase)
    }

    /// True iff the channel is busy at `t`. Requires `t >= phase_origin_us`
    /// and a positive period.
    pub fn is_on_at(&self, t: u64) -> bool {
        debug_assert!(t >= self.phase_origin_us && self.period_us() > 0);
        if self.t_on_us == 0 {
            return false;
        }
        (t - self.phase_origin_us) % self.period_us() < self.t_on_us
    }

    /// Earliest instant `s >= t` with the channel OFF.
    pub fn next_off_start(&self, t: u64) -> u64 {
        debug_assert!(t >= self.phase_origin_us && self.period_us() > 0);
        if self.t_on_us == 0 {
            return t;
        }
        let pos = (t - self.phase_origin_us) % self.period_us();
        if pos < self.t_on_us {
            t + (self.t_on_us - pos)
        } else {
            t
        }
    }

    /// Earliest instant `s >= t` with the channel ON, or `None` when the
    /// interferer never transmits (`t_on_us == 0`).
    pub fn next_on_start(&self, t: u64) -> Option<u64> {
        debug_assert!(t >= self.phase_origin_us && self.period_us() > 0);
        if self.t_on_us == 0 {
            return None;
        }
        let period = self.period_us();
        let pos = (t - self.phase_origin_us) % period;
        if pos < self.t_on_us {
            Some(t)
        } else {
            Some(t + (period - pos))
        }
    }

    /// Total ON time inside `[start, end)`, exact in integer µs.
    pub fn on_overlap_us(&self, start: u64, end: u64) -> u64 {
        debug_assert!(start <= end && start >= self.phase_origin_us);
        self.on_measure_to(end) - self.on_measure_to(start)
    }

    /// ON measure of `[phase_origin, t)`.
    fn on_measure_to(&self, t: u64) -> u64 {
        let period = self.period_us();
        debug_assert!(t >= self.phase_origin_us && period > 0);
        let rel = t - self.phase_origin_us;
        (rel / period) * self.t_on_us + (rel % period).min(self.t_on_us)
    }
}

/// Validation level for [`DutyCycleConfig::validate`].
///
/// The library defaults to loose so degenerate and hypothetical schedules
/// stay simulatable; the CLI applies strict unless told otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Loose,
    Strict,
}

/// Channel state seen by the Wi-Fi MAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChannelState {
    On,
    Off,
}

/// Result of [`DutyCycleConfig::phase_at`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub state: ChannelState,
    pub time_to_next_edge_us: u64,
    pub cycle_index: u64,
}

/// A named schedule-validation violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Violation {
    OnTooLong,
    OnTooShort,
    OffTooShort,
    NonpositivePeriod,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::OnTooLong => "ON_TOO_LONG",
            Violation::OnTooShort => "ON_TOO_SHORT",
            Violation::OffTooShort => "OFF_TOO_SHORT",
            Violation::NonpositivePeriod => "NONPOSITIVE_PERIOD",
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid duty-cycle config: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
        }
    }
}

fn format_violations(violations: &[Violation]) -> alloc::string::String {
    use core::fmt::Write;
    let mut out = alloc::string::String::new();
    for (i, v) in violations.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{v}");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("time {t_us} µs precedes the schedule origin {origin_us} µs")]
    BeforeOrigin { t_us: u64, origin_us: u64 },
    #[error("schedule period is zero")]
    ZeroPeriod,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duty_cycle_max_forum_config() {
        let cfg = DutyCycleConfig::new(20_000, 1_000);
        assert!((cfg.duty_cycle() - 20.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn duty_cycle_no_on_time() {
        assert_eq!(DutyCycleConfig::new(0, 7_000).duty_cycle(), 0.0);
    }

    #[test]
    fn duty_cycle_symmetric() {
        assert_eq!(DutyCycleConfig::new(5_000, 5_000).duty_cycle(), 0.5);
    }

    #[test]
    fn phase_at_start_of_cycle() {
        let cfg = DutyCycleConfig::new(20_000, 1_000);
        let p = cfg.phase_at(0).unwrap();
        assert_eq!(p.state, ChannelState::On);
        assert_eq!(p.time_to_next_edge_us, 20_000);
        assert_eq!(p.cycle_index, 0);
    }

    #[test]
    fn phase_at_mid_off() {
        let cfg = DutyCycleConfig::new(20_000, 1_000);
        let p = cfg.phase_at(20_500).unwrap();
        assert_eq!(p.state, ChannelState::Off);
        assert_eq!(p.time_to_next_edge_us, 500);
    }

    #[test]
    fn phase_at_period_wrap() {
        let cfg = DutyCycleConfig::new(5_000, 5_000);
        let p = cfg.phase_at(10_000).unwrap();
        assert_eq!(p.state, ChannelState::On);
        assert_eq!(p.time_to_next_edge_us, 5_000);
        assert_eq!(p.cycle_index, 1);
    }

    #[test]
    fn phase_before_origin_rejected() {
        let cfg = DutyCycleConfig::new(5_000, 5_000).with_phase_origin(100);
        assert!(matches!(
            cfg.phase_at(99),
            Err(ScheduleError::BeforeOrigin { .. })
        ));
    }

    #[test]
    fn edge_ownership() {
        // ON->OFF edge belongs to OFF, OFF->ON edge belongs to ON.
        let cfg = DutyCycleConfig::new(5_000, 5_000);
        assert_eq!(cfg.phase_at(5_000).unwrap().state, ChannelState::Off);
        assert_eq!(cfg.phase_at(10_000).unwrap().state, ChannelState::On);
    }

    #[test]
    fn validate_strict_accepts_forum_max() {
        assert!(DutyCycleConfig::new(20_000, 1_000)
            .validate(Strictness::Strict)
            .is_ok());
    }

    #[test]
    fn validate_strict_rejects_long_on() {
        let err = DutyCycleConfig::new(25_000, 1_000)
            .validate(Strictness::Strict)
            .unwrap_err();
        assert_eq!(err.violations(), &[Violation::OnTooLong]);
    }

    #[test]
    fn validate_loose_accepts_long_on() {
        assert!(DutyCycleConfig::new(25_000, 1_000)
            .validate(Strictness::Loose)
            .is_ok());
    }

    #[test]
    fn validate_strict_skips_bounds_when_interferer_absent() {
        assert!(DutyCycleConfig::new(0, 500)
            .validate(Strictness::Strict)
            .is_ok());
    }

    #[test]
    fn validate_rejects_zero_period_and_zero_off() {
        let err = DutyCycleConfig::new(0, 0)
            .validate(Strictness::Loose)
            .unwrap_err();
        assert_eq!(err.violations(), &[Violation::NonpositivePeriod]);
        let err = DutyCycleConfig::new(5_000, 0)
            .validate(Strictness::Loose)
            .unwrap_err();
        assert_eq!(err.violations(), &[Violation::OffTooShort]);
    }

    #[test]
    fn next_edges_are_consistent() {
        let cfg = DutyCycleConfig::new(20_000, 1_000);
        assert_eq!(cfg.next_off_start(0), 20_000);
        assert_eq!(cfg.next_off_start(20_500), 20_500);
        assert_eq!(cfg.next_on_start(20_500), Some(21_000));
        assert_eq!(cfg.next_on_start(3), Some(3));
        let silent = DutyCycleConfig::new(0, 1_000);
        assert_eq!(silent.next_on_start(123), None);
        assert_eq!(silent.next_off_start(123), 123);
    }

    #[test]
    fn on_overlap_examples() {
        let cfg = DutyCycleConfig::new(5_000, 5_000);
        assert_eq!(cfg.on_overlap_us(0, 5_000), 5_000);
        assert_eq!(cfg.on_overlap_us(5_000, 10_000), 0);
        assert_eq!(cfg.on_overlap_us(4_000, 11_000), 2_000);
        assert_eq!(cfg.on_overlap_us(9_000, 26_000), 10_000);
    }

    fn arb_cfg() -> impl Strategy<Value = DutyCycleConfig> {
        (0u64..30_000, 1u64..30_000, 0u64..5_000)
            .prop_map(|(on, off, origin)| DutyCycleConfig::new(on, off).with_phase_origin(origin))
    }

    /// ON measure of `[start, end)` by walking phase_at from edge to edge —
    /// an independent route to the closed-form `on_overlap_us`.
    fn integrate_on_time(cfg: &DutyCycleConfig, start: u64, end: u64) -> u64 {
        let mut t = start;
        let mut on = 0;
        while t < end {
            let phase = cfg.phase_at(t).unwrap();
            let step = phase.time_to_next_edge_us.min(end - t);
            if phase.state == ChannelState::On {
                on += step;
            }
            t += step;
        }
        on
    }

    proptest! {
        #[test]
        fn phase_is_periodic(cfg in arb_cfg(), t in 0u64..1_000_000, k in 0u64..50) {
            let t = t + cfg.phase_origin_us;
            let a = cfg.phase_at(t).unwrap();
            let b = cfg.phase_at(t + k * cfg.period_us()).unwrap();
            prop_assert_eq!(a.state, b.state);
            prop_assert_eq!(a.time_to_next_edge_us, b.time_to_next_edge_us);
        }

        #[test]
        fn on_measure_over_one_period_is_t_on(cfg in arb_cfg(), t in 0u64..1_000_000) {
            let t = t + cfg.phase_origin_us;
            prop_assert_eq!(cfg.on_overlap_us(t, t + cfg.period_us()), cfg.t_on_us);
            prop_assert_eq!(integrate_on_time(&cfg, t, t + cfg.period_us()), cfg.t_on_us);
        }

        #[test]
        fn overlap_closed_form_matches_phase_integration(
            cfg in arb_cfg(),
            start in 0u64..200_000,
            len in 0u64..100_000,
        ) {
            let start = start + cfg.phase_origin_us;
            prop_assert_eq!(
                cfg.on_overlap_us(start, start + len),
                integrate_on_time(&cfg, start, start + len)
            );
        }

        #[test]
        fn duty_cycle_increases_with_on_time(on in 0u64..20_000, off in 1u64..20_000, bump in 1u64..5_000) {
            let lo = DutyCycleConfig::new(on, off).duty_cycle();
            let hi = DutyCycleConfig::new(on + bump, off).duty_cycle();
            prop_assert!(lo >= 0.0 && hi <= 1.0);
            prop_assert!(hi > lo);
        }

        #[test]
        fn time_to_next_edge_bounded(cfg in arb_cfg(), t in 0u64..1_000_000) {
            let t = t + cfg.phase_origin_us;
            let p = cfg.phase_at(t).unwrap();
            let bound = match p.state {
                ChannelState::On => cfg.t_on_us,
                ChannelState::Off => cfg.t_off_us,
            };
            prop_assert!(p.time_to_next_edge_us > 0 && p.time_to_next_edge_us <= bound);
        }

        #[test]
        fn next_off_start_is_off_and_minimal(cfg in arb_cfg(), t in 0u64..1_000_000) {
            let t = t + cfg.phase_origin_us;
            let s = cfg.next_off_start(t);
            prop_assert!(s >= t);
            prop_assert!(!cfg.is_on_at(s));
            if s > t {
                // everything before s was ON
                prop_assert!(cfg.is_on_at(t));
                prop_assert!(cfg.is_on_at(s - 1));
            }
        }
    }
}
