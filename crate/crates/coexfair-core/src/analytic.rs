//! Closed-form beacon drop probability and expected delivery time.
//!
//! Evaluation model: the beacon is generated uniformly in time against the
//! ON/OFF schedule. A beacon generated at a backoff slot in the last
//! `ceil((1-p_o)·T_b/t_s)` slots of an OFF period will overlap the next ON
//! period by more than the tolerated fraction and is dropped. Delivery time
//! mixes the conditional delays of the three access cases (deferred-in-ON,
//! clean-in-OFF, sensing interrupted) with their generation-time weights.
//! The mixture is evaluated literally as printed in the reference model even
//! though its OFF-branch weights do not sum to one; no renormalization is
//! applied. The simulator in [`crate::sim`] provides the fully normalized
//! ground truth.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::mac::{OverlapPolicy, WifiMacParams};
use crate::schedule::DutyCycleConfig;

/// Snapshot of all model inputs, echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelInputs {
    pub duty: DutyCycleConfig,
    pub mac: WifiMacParams,
    pub policy: OverlapPolicy,
}

/// Full closed-form evaluation for one schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub inputs: ModelInputs,
    /// Probability that the beacon is generated at any one backoff slot of
    /// the schedule period, `t_s / (t_on + t_off)`.
    pub p_s: f64,
    pub drop_probability: f64,
    pub reception_probability: f64,
    /// Expected delay when generated during ON (wait out ON, then contend).
    pub e_t1_us: f64,
    /// Expected delay of a clean OFF-period transmission.
    pub e_t2_us: f64,
    /// Expected delay when the ON edge interrupts channel acquisition.
    pub e_t3_us: f64,
    /// Expected delivery time of a received beacon.
    pub e_delivery_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticError {
    #[error("ZERO_PERIOD: schedule period must be positive")]
    ZeroPeriod,
    #[error("ZERO_SLOT: slot time must be positive")]
    ZeroSlot,
    #[error(
        "WEIGHT_NEGATIVE: t_off_us = {t_off_us} must exceed t_b_us + difs_us = {min_exclusive_us}"
    )]
    WeightNegative {
        t_off_us: u64,
        min_exclusive_us: u64,
    },
}

impl AnalyticError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticError::ZeroPeriod => "ZERO_PERIOD",
            AnalyticError::ZeroSlot => "ZERO_SLOT",
            AnalyticError::WeightNegative { .. } => "WEIGHT_NEGATIVE",
        }
    }
}

/// Probability that the beacon is generated at one particular backoff slot,
/// `t_s / (t_on + t_off)`.
pub fn slot_gen_probability(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
) -> Result<f64, AnalyticError> {
    let period = duty.period_us();
    if period == 0 {
        return Err(AnalyticError::ZeroPeriod);
    }
    Ok(mac.slot_us as f64 / period as f64)
}

/// Number of trailing OFF-period slots from which a transmission would
/// overlap the next ON period beyond tolerance: `ceil((1-p_o)·T_b/t_s)`.
pub fn overlap_window_slots(
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> Result<u64, AnalyticError> {
    if mac.slot_us == 0 {
        return Err(AnalyticError::ZeroSlot);
    }
    let slots = libm::ceil((1.0 - policy.p_o) * mac.t_b_us as f64 / mac.slot_us as f64);
    Ok(slots as u64)
}

/// Beacon drop probability: the slot-generation probability times the
/// overlap-window width, clamped to `[0, 1]`.
///
/// The clamp matters only for tiny periods where the linearization exceeds
/// one. With an active interferer the value depends on the schedule only
/// through its period; with `t_on_us == 0` there is no ON period to overlap
/// and the probability is zero.
pub fn beacon_drop_probability(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> Result<f64, AnalyticError> {
    let p_s = slot_gen_probability(duty, mac)?;
    let slots = overlap_window_slots(mac, policy)?;
    if duty.t_on_us == 0 {
        return Ok(0.0);
    }
    Ok((p_s * slots as f64).clamp(0.0, 1.0))
}

/// Expected delay when the beacon is generated during ON: wait out the
/// remaining ON time (T_ON/2 under uniform generation), then DIFS, mean
/// backoff, and the airtime.
pub fn expected_delay_case1(duty: &DutyCycleConfig, mac: &WifiMacParams) -> f64 {
    duty.t_on_us as f64 / 2.0 + mac.difs_us as f64 + mac.mean_backoff_us() + mac.t_b_us as f64
}

/// Expected delay of a clean OFF-period transmission: DIFS plus airtime.
pub fn expected_delay_case2(mac: &WifiMacParams) -> f64 {
    mac.difs_us as f64 + mac.t_b_us as f64
}

/// Expected delay when the ON edge lands in the DIFS sensing window: half a
/// DIFS elapses, a full ON period passes, then a fresh DIFS, mean backoff,
/// and the airtime.
pub fn expected_delay_case3(duty: &DutyCycleConfig, mac: &WifiMacParams) -> f64 {
    mac.difs_us as f64 / 2.0
        + duty.t_on_us as f64
        + mac.difs_us as f64
        + mac.mean_backoff_us()
        + mac.t_b_us as f64
}

/// Expected delivery time of a received beacon: the case delays mixed by
/// their generation-time weights, evaluated literally as printed.
///
/// Requires `t_off > t_b + difs`, otherwise the clean-case weight goes
/// negative and the mixture is rejected.
pub fn expected_delivery_time(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
) -> Result<f64, AnalyticError> {
    let min_exclusive_us = mac.t_b_us + mac.difs_us;
    if duty.t_off_us <= min_exclusive_us {
        return Err(AnalyticError::WeightNegative {
            t_off_us: duty.t_off_us,
            min_exclusive_us,
        });
    }
    let t_off = duty.t_off_us as f64;
    let p_b = duty.duty_cycle();
    let w_clean = (t_off - min_exclusive_us as f64) / t_off;
    let w_interrupted = mac.difs_us as f64 / t_off;
    let off_branch =
        w_clean * expected_delay_case2(mac) + w_interrupted * expected_delay_case3(duty, mac);
    Ok(p_b * expected_delay_case1(duty, mac) + (1.0 - p_b) * off_branch)
}

/// Evaluate every closed form for one schedule.
pub fn evaluate(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> Result<AnalyticReport, AnalyticError> {
    let drop_probability = beacon_drop_probability(duty, mac, policy)?;
    let e_delivery_us = expected_delivery_time(duty, mac)?;
    Ok(AnalyticReport {
        inputs: ModelInputs {
            duty: *duty,
            mac: *mac,
            policy: *policy,
        },
        p_s: slot_gen_probability(duty, mac)?,
        drop_probability,
        reception_probability: 1.0 - drop_probability,
        e_t1_us: expected_delay_case1(duty, mac),
        e_t2_us: expected_delay_case2(mac),
        e_t3_us: expected_delay_case3(duty, mac),
        e_delivery_us,
    })
}

/// Evaluate a batch of schedules, carrying per-setup errors through without
/// aborting the rest.
pub fn theory_table(
    setups: &[DutyCycleConfig],
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> Vec<Result<AnalyticReport, AnalyticError>> {
    setups
        .iter()
        .map(|duty| evaluate(duty, mac, policy))
        .collect()
}
