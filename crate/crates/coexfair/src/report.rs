//! JSON report payloads emitted by the CLI.

use serde::Serialize;

use coexfair_core::analytic::{self, AnalyticError, ModelInputs};
use coexfair_core::{
    CaseCounts, ComparisonRecord, DutyCycleConfig, MatchReport, OverlapPolicy, SimConfig,
    SimResult, WifiMacParams,
};

/// The benchmark duty-cycle setups reproduced by `analytic --paper-table`,
/// with the reception and delivery reference values the table is checked
/// against: (t_on_us, t_off_us, reference reception, reference delivery ms).
pub const REFERENCE_ROWS: [(u64, u64, f64, f64); 3] = [
    (5_000, 5_000, 0.9559, 1.82),
    (20_000, 1_000, 0.9794, 10.15),
    (20_000, 20_000, 0.9892, 5.59),
];

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

impl ErrorInfo {
    pub fn new(code: &str, message: impl ToString) -> Self {
        Self {
            code: code.to_string(),
            message: message.to_string(),
        }
    }
}

/// Closed-form report for one schedule. The delivery-time mixture is only
/// defined for `t_off > t_b + difs`; outside that range the drop probability
/// is still reported and the delivery field carries the error instead.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticOutput {
    pub inputs: ModelInputs,
    pub p_s: f64,
    pub overlap_window_slots: u64,
    pub drop_probability: f64,
    pub reception_probability: f64,
    pub e_t1_us: f64,
    pub e_t2_us: f64,
    pub e_t3_us: f64,
    pub e_delivery_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_delivery_error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub airtime_consistency_warning: Option<String>,
}

pub fn analytic_output(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> Result<AnalyticOutput, AnalyticError> {
    let drop_probability = analytic::beacon_drop_probability(duty, mac, policy)?;
    let (e_delivery_us, e_delivery_error) = match analytic::expected_delivery_time(duty, mac) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(ErrorInfo::new(e.code(), e))),
    };
    let airtime_consistency_warning = (!mac.t_b_consistent()).then(|| {
        format!(
            "t_b_us = {} differs from preamble + 8*bytes/rate = {:.1} µs by more than one slot",
            mac.t_b_us,
            mac.airtime_estimate_us()
        )
    });
    Ok(AnalyticOutput {
        inputs: ModelInputs {
            duty: *duty,
            mac: *mac,
            policy: *policy,
        },
        p_s: analytic::slot_gen_probability(duty, mac)?,
        overlap_window_slots: analytic::overlap_window_slots(mac, policy)?,
        drop_probability,
        reception_probability: 1.0 - drop_probability,
        e_t1_us: analytic::expected_delay_case1(duty, mac),
        e_t2_us: analytic::expected_delay_case2(mac),
        e_t3_us: analytic::expected_delay_case3(duty, mac),
        e_delivery_us,
        e_delivery_error,
        airtime_consistency_warning,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperTableRow {
    pub t_on_us: u64,
    pub t_off_us: u64,
    pub reception_probability: f64,
    pub reference_reception: f64,
    pub reception_delta: f64,
    pub e_delivery_ms: f64,
    pub reference_delivery_ms: f64,
    pub delivery_delta_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperTable {
    pub overlap_window_slots: u64,
    pub rows: Vec<PaperTableRow>,
    pub note: String,
}

/// Reproduce the three benchmark rows with the given MAC and overlap policy
/// (the reference values assume the defaults: Table-defaults MAC, p_o = 0).
pub fn paper_table(
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> Result<PaperTable, AnalyticError> {
    let overlap_window_slots = analytic::overlap_window_slots(mac, policy)?;
    let mut rows = Vec::new();
    for (t_on_us, t_off_us, reference_reception, reference_delivery_ms) in REFERENCE_ROWS {
        let duty = DutyCycleConfig::new(t_on_us, t_off_us);
        let report = analytic::evaluate(&duty, mac, policy)?;
        let e_delivery_ms = report.e_delivery_us / 1_000.0;
        let note = (t_on_us == 5_000 && t_off_us == 5_000).then(|| {
            format!(
                "reference reception {reference_reception} implies a 49-slot overlap window; \
                 this evaluation standardizes on ceil((1-p_o)*T_b/t_s) = {overlap_window_slots} \
                 slots, leaving a {:+.4} residual",
                report.reception_probability - reference_reception
            )
        });
        rows.push(PaperTableRow {
            t_on_us,
            t_off_us,
            reception_probability: report.reception_probability,
            reference_reception,
            reception_delta: report.reception_probability - reference_reception,
            e_delivery_ms,
            reference_delivery_ms,
            delivery_delta_ms: e_delivery_ms - reference_delivery_ms,
            note,
        });
    }
    Ok(PaperTable {
        overlap_window_slots,
        rows,
        note: "reference columns hold the benchmark values this table reproduces; the literal \
               delivery mixture sits uniformly ~0.08 ms below its reference column"
            .to_string(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub config: SimConfig,
    pub n_records: usize,
    pub delivered: u64,
    pub dropped: u64,
    pub drop_rate: f64,
    pub mean_raw_delay_us: Option<f64>,
    pub mean_additional_delay_us: Option<f64>,
    pub case_counts: CaseCounts,
    pub n_tx_intervals: usize,
    pub n_rx_intervals: usize,
    pub realized_offsets_us_head: Vec<u64>,
}

pub fn simulate_summary(result: &SimResult) -> SimulateSummary {
    let delivered = result.records.iter().filter(|r| r.delivered).count() as u64;
    SimulateSummary {
        config: result.config,
        n_records: result.records.len(),
        delivered,
        dropped: result.records.len() as u64 - delivered,
        drop_rate: result.drop_rate,
        mean_raw_delay_us: result.mean_raw_delay_us,
        mean_additional_delay_us: result.mean_additional_delay_us,
        case_counts: result.case_counts,
        n_tx_intervals: result.tx_intervals_us.len(),
        n_rx_intervals: result.rx_intervals_us.len(),
        realized_offsets_us_head: result
            .realized_offsets_us
            .iter()
            .take(16)
            .copied()
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSection {
    pub path: String,
    pub entries: usize,
    pub first_timestamp_us: u64,
    pub last_timestamp_us: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DelaySection {
    pub first_gen_estimate_us: f64,
    pub additional_delay_us: f64,
    pub nominal_interval_us: u64,
    /// The estimator assumes a drop-free window; true when the sequence
    /// matching found losses, which bias the estimate upward.
    pub loss_in_window: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeTraceReport {
    pub tx: TraceSection,
    pub rx: TraceSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clean: Option<TraceSection>,
    #[serde(rename = "match")]
    pub match_report: MatchReport,
    pub delay: Option<DelaySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_notice: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub pair_duty: DutyCycleConfig,
    pub periods_equal: bool,
    pub analytic_drop_bit_identical: bool,
    pub sim_drop_abs_delta: f64,
    pub combined_3sigma: f64,
    pub within_combined_band: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutput {
    pub main: ComparisonRecord,
    /// PASS iff the simulated drop rate sits inside the 3-sigma band around
    /// the closed-form value.
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<ComparisonRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_check: Option<PairCheck>,
}

pub fn verdict(pass: bool) -> String {
    if pass { "PASS" } else { "FAIL" }.to_string()
}
