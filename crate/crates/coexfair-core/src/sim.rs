//! Monte Carlo simulation of periodic beacon transmission against the
//! ON/OFF schedule.
//!
//! Beacons are generated on a fixed grid (`first_gen + i·beacon_interval`).
//! Each beacon independently draws one uniform backoff and then walks the
//! channel-access procedure in integer microseconds:
//!
//! 1. generated during ON: wait for the ON→OFF edge;
//! 2. sense DIFS — an ON edge inside the sensing window aborts it, and a
//!    full DIFS restarts at the next OFF start;
//! 3. count down the backoff one slot at a time while the channel is OFF,
//!    freezing at ON edges and resuming after the next OFF start plus a
//!    fresh DIFS (partial slots do not count);
//! 4. transmit for `t_b_us` without preemption; the beacon is delivered iff
//!    its ON overlap is within the tolerated fraction `p_o`.
//!
//! Beacons are broadcast: there is no acknowledgment and no retransmission.
//! Every run is a pure function of its [`SimConfig`]; replication `r` uses
//! RNG stream `r` of the seeded generator, so replications are
//! order-independent and may be merged.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, AnalyticError, AnalyticReport};
use crate::cdf::CdfSeries;
use crate::mac::{MacError, OverlapPolicy, PolicyError, WifiMacParams};
use crate::schedule::{ConfigError, DutyCycleConfig, Strictness};

/// Placement of the beacon generation grid relative to the schedule origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridOffset {
    /// Draw the offset uniformly over one period, independently per
    /// replication. This is the default and models uniform generation.
    #[default]
    Average,
    /// Pin the first generation `offset` µs after the schedule origin.
    Fixed(u64),
}

/// Everything a simulation run depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub duty: DutyCycleConfig,
    pub mac: WifiMacParams,
    pub policy: OverlapPolicy,
    /// Beacons generated per replication.
    pub n_beacons: u64,
    pub seed: u64,
    pub grid_offset: GridOffset,
    pub replications: u32,
}

impl SimConfig {
    pub fn new(duty: DutyCycleConfig, mac: WifiMacParams, policy: OverlapPolicy) -> Self {
        Self {
            duty,
            mac,
            policy,
            n_beacons: 3_000,
            seed: 0,
            grid_offset: GridOffset::Average,
            replications: 1,
        }
    }

    pub fn total_beacons(&self) -> u64 {
        self.n_beacons * self.replications as u64
    }
}

/// Fate of one beacon relative to the ON/OFF cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeaconCase {
    /// Generated during ON; transmission deferred to the next OFF period.
    #[serde(rename = "CASE1")]
    Case1,
    /// Generated during OFF and transmitted cleanly.
    #[serde(rename = "CASE2")]
    Case2,
    /// Transmitted from OFF but overlapping ON beyond tolerance: dropped.
    #[serde(rename = "CASE3A")]
    Case3A,
    /// Channel acquisition was interrupted by an ON edge (DIFS abort or
    /// backoff freeze) at least once.
    #[serde(rename = "CASE3B")]
    Case3B,
}

impl core::fmt::Display for BeaconCase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            BeaconCase::Case1 => "CASE1",
            BeaconCase::Case2 => "CASE2",
            BeaconCase::Case3A => "CASE3A",
            BeaconCase::Case3B => "CASE3B",
        };
        f.write_str(s)
    }
}

/// Lifecycle of one simulated beacon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeaconRecord {
    /// 0-based position on the generation grid within its replication.
    pub index: u64,
    pub gen_time_us: u64,
    pub tx_start_us: Option<u64>,
    pub tx_end_us: Option<u64>,
    pub case: BeaconCase,
    pub delivered: bool,
    /// Microseconds of the airtime that overlapped ON periods.
    pub overlap_us: u64,
    /// `tx_end - gen_time`, present only for delivered beacons.
    pub delay_us: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CaseCounts {
    pub case1: u64,
    pub case2: u64,
    pub case3a: u64,
    pub case3b: u64,
}

impl CaseCounts {
    pub fn count(&mut self, case: BeaconCase) {
        match case {
            BeaconCase::Case1 => self.case1 += 1,
            BeaconCase::Case2 => self.case2 += 1,
            BeaconCase::Case3A => self.case3a += 1,
            BeaconCase::Case3B => self.case3b += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.case1 + self.case2 + self.case3a + self.case3b
    }
}

/// Records and aggregates of a full simulation (all replications, in
/// replication order; `records` holds `n_beacons` rows per replication).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub records: Vec<BeaconRecord>,
    pub drop_rate: f64,
    pub mean_raw_delay_us: Option<f64>,
    /// Mean of `delay - (difs + mean_backoff + t_b)` over delivered beacons.
    pub mean_additional_delay_us: Option<f64>,
    pub case_counts: CaseCounts,
    /// Gaps between consecutive transmissions, per replication.
    pub tx_intervals_us: Vec<u64>,
    /// Gaps between consecutive deliveries, per replication.
    pub rx_intervals_us: Vec<u64>,
    /// Realized grid offset of each replication, in replication order.
    pub realized_offsets_us: Vec<u64>,
}

/// One replication's records plus the realized grid placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRun {
    pub replication_index: u32,
    pub grid_offset_us: u64,
    pub first_gen_us: u64,
    pub records: Vec<BeaconRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Duty(#[from] ConfigError),
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("n_beacons must be at least 1")]
    ZeroBeacons,
    #[error("replications must be at least 1")]
    ZeroReplications,
    #[error(
        "OFF_TOO_SHORT_TO_SENSE: t_off_us = {t_off_us} cannot fit DIFS plus one backoff slot ({required_us} µs); the MAC would defer forever"
    )]
    OffTooShortToSense { t_off_us: u64, required_us: u64 },
    #[error("TIME_OVERFLOW: simulated time span does not fit the µs time base")]
    TimeOverflow,
    #[error("NO_DELIVERED_BEACONS: no beacon was delivered")]
    NoDeliveredBeacons,
    #[error("INSUFFICIENT_EVENTS: need at least {required}, have {actual}")]
    InsufficientEvents { required: usize, actual: usize },
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Duty(_) => "INVALID_DUTY_CONFIG",
            SimError::Mac(_) => "INVALID_MAC_PARAMS",
            SimError::Policy(_) => "INVALID_OVERLAP_POLICY",
            SimError::ZeroBeacons => "ZERO_BEACONS",
            SimError::ZeroReplications => "ZERO_REPLICATIONS",
            SimError::OffTooShortToSense { .. } => "OFF_TOO_SHORT_TO_SENSE",
            SimError::TimeOverflow => "TIME_OVERFLOW",
            SimError::NoDeliveredBeacons => "NO_DELIVERED_BEACONS",
            SimError::InsufficientEvents { .. } => "INSUFFICIENT_EVENTS",
        }
    }
}

fn validate_config(cfg: &SimConfig) -> Result<(), SimError> {
    cfg.duty.validate(Strictness::Loose)?;
    cfg.mac.validate()?;
    cfg.policy.validate()?;
    if cfg.n_beacons == 0 {
        return Err(SimError::ZeroBeacons);
    }
    if cfg.replications == 0 {
        return Err(SimError::ZeroReplications);
    }
    // Progress guarantee: every OFF period must admit a completed DIFS and at
    // least one backoff slot, or a frozen counter would never decrement.
    let required_us = cfg.mac.difs_us + cfg.mac.slot_us;
    if cfg.duty.t_on_us > 0 && cfg.duty.t_off_us < required_us {
        return Err(SimError::OffTooShortToSense {
            t_off_us: cfg.duty.t_off_us,
            required_us,
        });
    }
    // Worst-case end-of-run bound: each beacon needs at most cw_min + 1 OFF
    // periods, and queueing can push every beacon past its grid slot.
    let per_beacon = (cfg.mac.cw_min as u128 + 2) * cfg.duty.period_us() as u128
        + cfg.mac.difs_us as u128
        + (cfg.mac.cw_min as u128) * cfg.mac.slot_us as u128
        + cfg.mac.t_b_us as u128
        + cfg.mac.beacon_interval_us as u128;
    let span = cfg.duty.phase_origin_us as u128
        + cfg.duty.period_us() as u128
        + cfg.n_beacons as u128 * per_beacon;
    if span > (u64::MAX / 2) as u128 {
        return Err(SimError::TimeOverflow);
    }
    Ok(())
}

/// Walk the channel-access procedure for one beacon.
///
/// Returns the transmission start time and whether acquisition was
/// interrupted (DIFS abort or backoff freeze) along the way. The returned
/// instant is always in an OFF period.
fn acquire_channel(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
    start: u64,
    mut backoff_slots: u64,
) -> (u64, bool) {
    let mut interrupted = false;
    let mut t = duty.next_off_start(start);
    loop {
        match duty.next_on_start(t) {
            None => return (t + mac.difs_us + backoff_slots * mac.slot_us, interrupted),
            Some(edge) => {
                debug_assert!(edge > t);
                if edge < t + mac.difs_us {
                    // busy during sensing: restart the full DIFS next OFF
                    interrupted = true;
                    t = duty.next_off_start(edge);
                    continue;
                }
                let counting_from = t + mac.difs_us;
                let avail = edge - counting_from;
                let need = backoff_slots * mac.slot_us;
                if need < avail {
                    return (counting_from + need, interrupted);
                }
                // Freeze. Only whole idle slots decrement the counter; a
                // countdown ending exactly on the edge defers the
                // transmission to the next OFF period.
                backoff_slots -= avail / mac.slot_us;
                interrupted = true;
                t = duty.next_off_start(edge);
            }
        }
    }
}

fn service_beacon(
    cfg: &SimConfig,
    index: u64,
    gen_time: u64,
    ready_at: u64,
    rng: &mut ChaCha12Rng,
) -> BeaconRecord {
    let generated_during_on = cfg.duty.is_on_at(gen_time);
    let backoff_slots = rng.random_range(0..cfg.mac.cw_min as u64);
    let start = gen_time.max(ready_at);
    let (tx_start, interrupted) = acquire_channel(&cfg.duty, &cfg.mac, start, backoff_slots);
    let tx_end = tx_start + cfg.mac.t_b_us;
    let overlap_us = cfg.duty.on_overlap_us(tx_start, tx_end);
    let delivered = (overlap_us as f64) <= cfg.policy.max_tolerated_overlap_us(cfg.mac.t_b_us);
    let case = if generated_during_on {
        BeaconCase::Case1
    } else if interrupted {
        BeaconCase::Case3B
    } else if !delivered {
        BeaconCase::Case3A
    } else {
        BeaconCase::Case2
    };
    BeaconRecord {
        index,
        gen_time_us: gen_time,
        tx_start_us: Some(tx_start),
        tx_end_us: Some(tx_end),
        case,
        delivered,
        overlap_us,
        delay_us: delivered.then(|| tx_end - gen_time),
    }
}

/// Run one replication. Replication `r` uses RNG stream `r` derived from the
/// seed, so any subset of replications can be reproduced independently.
pub fn run_replication(
    cfg: &SimConfig,
    replication_index: u32,
) -> Result<ReplicationRun, SimError> {
    validate_config(cfg)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replication_index as u64);
    let grid_offset_us = match cfg.grid_offset {
        GridOffset::Average => rng.random_range(0..cfg.duty.period_us()),
        GridOffset::Fixed(offset) => offset,
    };
    let first_gen_us = cfg.duty.phase_origin_us + grid_offset_us;
    let mut records = Vec::with_capacity(cfg.n_beacons as usize);
    // pending beacons finish before queued ones start
    let mut ready_at = first_gen_us;
    for index in 0..cfg.n_beacons {
        let gen_time = first_gen_us + index * cfg.mac.beacon_interval_us;
        let record = service_beacon(cfg, index, gen_time, ready_at, &mut rng);
        ready_at = record.tx_end_us.expect("every beacon transmits");
        records.push(record);
    }
    Ok(ReplicationRun {
        replication_index,
        grid_offset_us,
        first_gen_us,
        records,
    })
}

/// Run all replications and aggregate.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult, SimError> {
    validate_config(cfg)?;
    let mut records = Vec::with_capacity(cfg.total_beacons() as usize);
    let mut tx_intervals_us = Vec::new();
    let mut rx_intervals_us = Vec::new();
    let mut realized_offsets_us = Vec::with_capacity(cfg.replications as usize);
    for rep in 0..cfg.replications {
        let run = run_replication(cfg, rep)?;
        collect_intervals(&run.records, &mut tx_intervals_us, &mut rx_intervals_us);
        realized_offsets_us.push(run.grid_offset_us);
        records.extend(run.records);
    }

    let mut case_counts = CaseCounts::default();
    let mut delivered = 0u64;
    let mut delay_sum: u128 = 0;
    for r in &records {
        case_counts.count(r.case);
        if let Some(d) = r.delay_us {
            delivered += 1;
            delay_sum += d as u128;
        }
    }
    let n_total = records.len() as u64;
    let drop_rate = (n_total - delivered) as f64 / n_total as f64;
    let mean_raw_delay_us = (delivered > 0).then(|| delay_sum as f64 / delivered as f64);
    let baseline = cfg.mac.difs_us as f64 + cfg.mac.mean_backoff_us() + cfg.mac.t_b_us as f64;
    let mean_additional_delay_us = mean_raw_delay_us.map(|m| m - baseline);

    Ok(SimResult {
        config: *cfg,
        records,
        drop_rate,
        mean_raw_delay_us,
        mean_additional_delay_us,
        case_counts,
        tx_intervals_us,
        rx_intervals_us,
        realized_offsets_us,
    })
}

fn collect_intervals(records: &[BeaconRecord], tx: &mut Vec<u64>, rx: &mut Vec<u64>) {
    let mut prev_tx: Option<u64> = None;
    let mut prev_rx: Option<u64> = None;
    for r in records {
        let end = match r.tx_end_us {
            Some(e) => e,
            None => continue,
        };
        if let Some(p) = prev_tx {
            tx.push(end - p);
        }
        prev_tx = Some(end);
        if r.delivered {
            if let Some(p) = prev_rx {
                rx.push(end - p);
            }
            prev_rx = Some(end);
        }
    }
}

/// Recompute the drop rate from the records. Equals the cached field.
pub fn drop_rate(result: &SimResult) -> f64 {
    if result.records.is_empty() {
        return 0.0;
    }
    let dropped = result.records.iter().filter(|r| !r.delivered).count();
    dropped as f64 / result.records.len() as f64
}

/// Recompute the mean raw delay over delivered beacons.
pub fn mean_raw_delay(result: &SimResult) -> Result<f64, SimError> {
    let mut sum: u128 = 0;
    let mut n = 0u64;
    for r in &result.records {
        if let Some(d) = r.delay_us {
            sum += d as u128;
            n += 1;
        }
    }
    if n == 0 {
        return Err(SimError::NoDeliveredBeacons);
    }
    Ok(sum as f64 / n as f64)
}

/// Recompute the mean additional delay (raw mean minus the unobstructed
/// `difs + mean backoff + t_b` baseline). Equals the cached field.
pub fn mean_additional_delay(result: &SimResult) -> Result<f64, SimError> {
    let mac = &result.config.mac;
    let baseline = mac.difs_us as f64 + mac.mean_backoff_us() + mac.t_b_us as f64;
    Ok(mean_raw_delay(result)? - baseline)
}

/// Which inter-event gaps to summarize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Tx,
    Rx,
}

/// Empirical CDF of inter-transmission or inter-delivery gaps.
pub fn interval_cdf(result: &SimResult, kind: IntervalKind) -> Result<CdfSeries, SimError> {
    let (samples, events) = match kind {
        IntervalKind::Tx => (
            &result.tx_intervals_us,
            result
                .records
                .iter()
                .filter(|r| r.tx_end_us.is_some())
                .count(),
        ),
        IntervalKind::Rx => (
            &result.rx_intervals_us,
            result.records.iter().filter(|r| r.delivered).count(),
        ),
    };
    CdfSeries::from_samples(samples).ok_or(SimError::InsufficientEvents {
        required: 2,
        actual: events,
    })
}

/// Closed-form and simulated aggregates side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub analytic: AnalyticReport,
    pub sim_drop_rate: f64,
    pub sim_reception_rate: f64,
    pub sim_mean_raw_delay_us: Option<f64>,
    pub sim_mean_additional_delay_us: Option<f64>,
    pub sim_case_counts: CaseCounts,
    pub n_beacons_total: u64,
    /// |sim drop - closed-form drop|.
    pub drop_abs_delta: f64,
    pub delay_abs_delta_us: Option<f64>,
    pub delay_rel_delta: Option<f64>,
    /// Binomial standard deviation of the drop estimate at the closed-form
    /// drop probability and the simulated sample size.
    pub binomial_sigma: f64,
    pub drop_band_low: f64,
    pub drop_band_high: f64,
    pub drop_within_3sigma: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CompareError {
    pub fn code(&self) -> &'static str {
        match self {
            CompareError::Analytic(e) => e.code(),
            CompareError::Sim(e) => e.code(),
        }
    }
}

/// Run the simulation and bundle it with the closed forms, absolute deltas,
/// and the 3-sigma binomial band around the closed-form drop probability.
pub fn compare_with_analytic(cfg: &SimConfig) -> Result<ComparisonRecord, CompareError> {
    let analytic = analytic::evaluate(&cfg.duty, &cfg.mac, &cfg.policy)?;
    let sim = simulate(cfg)?;
    let n = sim.records.len() as f64;
    let p = analytic.drop_probability;
    let binomial_sigma = libm::sqrt(p * (1.0 - p) / n);
    let drop_band_low = (p - 3.0 * binomial_sigma).max(0.0);
    let drop_band_high = (p + 3.0 * binomial_sigma).min(1.0);
    let drop_abs_delta = libm::fabs(sim.drop_rate - p);
    let delay_abs_delta_us = sim
        .mean_raw_delay_us
        .map(|m| libm::fabs(m - analytic.e_delivery_us));
    let delay_rel_delta = delay_abs_delta_us.map(|d| d / analytic.e_delivery_us);
    Ok(ComparisonRecord {
        sim_drop_rate: sim.drop_rate,
        sim_reception_rate: 1.0 - sim.drop_rate,
        sim_mean_raw_delay_us: sim.mean_raw_delay_us,
        sim_mean_additional_delay_us: sim.mean_additional_delay_us,
        sim_case_counts: sim.case_counts,
        n_beacons_total: sim.records.len() as u64,
        drop_abs_delta,
        delay_abs_delta_us,
        delay_rel_delta,
        binomial_sigma,
        drop_band_low,
        drop_band_high,
        drop_within_3sigma: sim.drop_rate >= drop_band_low && sim.drop_rate <= drop_band_high,
        analytic,
    })
}
