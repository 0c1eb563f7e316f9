//! Wi-Fi MAC parameters for beacon transmission and the overlap drop policy.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// MAC-level constants governing one beacon transmission.
///
/// Defaults are the 802.11ac beacon parameters used throughout this crate:
/// DIFS 34 µs, 9 µs slots, CWmin 16, a 305-byte beacon at 6 Mbps giving a
/// 427 µs airtime, 20 µs PHY preamble, and the nominal 100 TU (102.4 ms)
/// beacon interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WifiMacParams {
    pub difs_us: u64,
    /// Backoff slot time `t_s`.
    pub slot_us: u64,
    /// Minimum contention window `W`; backoff is uniform over `{0, …, W-1}` slots.
    pub cw_min: u32,
    pub beacon_bytes: u32,
    pub beacon_rate_mbps: f64,
    /// Beacon airtime `T_b`.
    pub t_b_us: u64,
    pub preamble_us: u64,
    /// Nominal beacon generation period (TBTT grid spacing).
    pub beacon_interval_us: u64,
}

impl Default for WifiMacParams {
    fn default() -> Self {
        Self {
            difs_us: 34,
            slot_us: 9,
            cw_min: 16,
            beacon_bytes: 305,
            beacon_rate_mbps: 6.0,
            t_b_us: 427,
            preamble_us: 20,
            beacon_interval_us: 102_400,
        }
    }
}

impl WifiMacParams {
    pub fn validate(&self) -> Result<(), MacError> {
        let mut violations = Vec::new();
        if self.difs_us == 0 {
            violations.push(MacViolation::ZeroDifs);
        }
        if self.slot_us == 0 {
            violations.push(MacViolation::ZeroSlot);
        }
        if self.cw_min == 0 {
            violations.push(MacViolation::ZeroContentionWindow);
        }
        if self.t_b_us == 0 {
            violations.push(MacViolation::ZeroBeaconAirtime);
        }
        if self.preamble_us == 0 {
            violations.push(MacViolation::ZeroPreamble);
        }
        if self.beacon_interval_us == 0 {
            violations.push(MacViolation::ZeroBeaconInterval);
        }
        if self.beacon_rate_mbps.is_nan() || self.beacon_rate_mbps <= 0.0 {
            violations.push(MacViolation::NonpositiveRate);
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(MacError::Invalid(violations))
        }
    }

    /// Airtime implied by frame length and rate: `preamble + 8·bytes/rate`.
    pub fn airtime_estimate_us(&self) -> f64 {
        self.preamble_us as f64 + 8.0 * self.beacon_bytes as f64 / self.beacon_rate_mbps
    }

    /// Absolute difference between the configured `t_b_us` and the airtime
    /// implied by length and rate.
    pub fn t_b_deviation_us(&self) -> f64 {
        let d = self.t_b_us as f64 - self.airtime_estimate_us();
        libm::fabs(d)
    }

    /// Informational check: the configured airtime should agree with the
    /// length/rate estimate to within one slot.
    pub fn t_b_consistent(&self) -> bool {
        self.t_b_deviation_us() <= self.slot_us as f64
    }

    /// Mean backoff draw, `(W-1)/2` slots.
    pub fn mean_backoff_slots(&self) -> f64 {
        (self.cw_min as f64 - 1.0) / 2.0
    }

    pub fn mean_backoff_us(&self) -> f64 {
        self.mean_backoff_slots() * self.slot_us as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MacViolation {
    ZeroDifs,
    ZeroSlot,
    ZeroContentionWindow,
    ZeroBeaconAirtime,
    ZeroPreamble,
    ZeroBeaconInterval,
    NonpositiveRate,
}

impl core::fmt::Display for MacViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            MacViolation::ZeroDifs => "ZERO_DIFS",
            MacViolation::ZeroSlot => "ZERO_SLOT",
            MacViolation::ZeroContentionWindow => "ZERO_CONTENTION_WINDOW",
            MacViolation::ZeroBeaconAirtime => "ZERO_BEACON_AIRTIME",
            MacViolation::ZeroPreamble => "ZERO_PREAMBLE",
            MacViolation::ZeroBeaconInterval => "ZERO_BEACON_INTERVAL",
            MacViolation::NonpositiveRate => "NONPOSITIVE_RATE",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MacError {
    #[error("invalid MAC parameters: {0:?}")]
    Invalid(Vec<MacViolation>),
}

/// Fraction of the beacon airtime that may overlap an ON period before the
/// beacon counts as dropped. `p_o = 0` drops on any overlap; `p_o = 1`
/// tolerates full overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapPolicy {
    pub p_o: f64,
}

impl Default for OverlapPolicy {
    fn default() -> Self {
        Self { p_o: 0.0 }
    }
}

impl OverlapPolicy {
    pub const fn new(p_o: f64) -> Self {
        Self { p_o }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.p_o.is_finite() && (0.0..=1.0).contains(&self.p_o) {
            Ok(())
        } else {
            Err(PolicyError::OutOfRange { p_o: self.p_o })
        }
    }

    /// Largest tolerated ON overlap of a `t_b_us`-long transmission, in µs.
    pub fn max_tolerated_overlap_us(&self, t_b_us: u64) -> f64 {
        self.p_o * t_b_us as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("overlap fraction p_o = {p_o} outside [0, 1]")]
    OutOfRange { p_o: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_internally_consistent() {
        let mac = WifiMacParams::default();
        mac.validate().unwrap();
        // 20 + 8*305/6 = 426.67, within one slot of 427
        assert!(mac.t_b_consistent());
        assert!(mac.t_b_deviation_us() < 1.0);
        assert_eq!(mac.mean_backoff_slots(), 7.5);
        assert_eq!(mac.mean_backoff_us(), 67.5);
    }

    #[test]
    fn inconsistent_airtime_is_flagged_not_fatal() {
        let mac = WifiMacParams {
            t_b_us: 1_000,
            ..WifiMacParams::default()
        };
        mac.validate().unwrap();
        assert!(!mac.t_b_consistent());
    }

    #[test]
    fn zero_durations_rejected() {
        let mac = WifiMacParams {
            difs_us: 0,
            slot_us: 0,
            ..WifiMacParams::default()
        };
        let MacError::Invalid(violations) = mac.validate().unwrap_err();
        assert_eq!(
            violations,
            vec![MacViolation::ZeroDifs, MacViolation::ZeroSlot]
        );
    }

    #[test]
    fn overlap_policy_bounds() {
        assert!(OverlapPolicy::new(0.0).validate().is_ok());
        assert!(OverlapPolicy::new(1.0).validate().is_ok());
        assert!(OverlapPolicy::new(1.5).validate().is_err());
        assert!(OverlapPolicy::new(-0.1).validate().is_err());
        assert!(OverlapPolicy::new(f64::NAN).validate().is_err());
    }
}
