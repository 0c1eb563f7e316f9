//! Statistics over timestamped, sequence-numbered beacon observations.
//!
//! A [`BeaconTrace`] is what a capture tool exports from one observation
//! point: (timestamp, sequence number) pairs. Two traces — one taken next to
//! the transmitter, one next to the receiver — are enough to measure loss by
//! sequence-ID matching. A trace captured on a clean channel calibrates the
//! generation grid so that mean additional delay can be estimated from
//! receive timestamps alone.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cdf::CdfSeries;

/// 802.11 sequence numbers are 12 bits.
pub const SEQ_MODULUS: u64 = 4096;
/// A drop in raw sequence value larger than this counts as one wraparound.
pub const WRAP_THRESHOLD: u16 = 2048;

const MIN_CALIBRATION_ENTRIES: usize = 10;
const MAX_CALIBRATION_SPREAD_US: i64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub timestamp_us: u64,
    /// Raw 12-bit sequence number, `0..=4095`.
    pub seq_no: u16,
}

/// Validated, time-ordered beacon observations from one capture point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconTrace {
    source_label: String,
    entries: Vec<TraceEntry>,
}

impl BeaconTrace {
    /// Build a trace from raw rows. Rows are sorted by timestamp; after
    /// sorting, timestamps must be strictly increasing (two observations can
    /// never share a microsecond on one channel). Error indexes refer to the
    /// input order of `entries`.
    pub fn new(
        source_label: impl Into<String>,
        entries: Vec<TraceEntry>,
    ) -> Result<Self, TraceError> {
        if entries.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        for (index, e) in entries.iter().enumerate() {
            if u64::from(e.seq_no) >= SEQ_MODULUS {
                return Err(TraceError::SeqOutOfRange {
                    index,
                    seq_no: e.seq_no,
                });
            }
        }
        let mut indexed: Vec<(usize, TraceEntry)> = entries.into_iter().enumerate().collect();
        indexed.sort_by_key(|(_, e)| e.timestamp_us);
        for w in indexed.windows(2) {
            if w[0].1.timestamp_us == w[1].1.timestamp_us {
                return Err(TraceError::NonMonotoneTimestamp {
                    index: w[0].0.max(w[1].0),
                });
            }
        }
        Ok(Self {
            source_label: source_label.into(),
            entries: indexed.into_iter().map(|(_, e)| e).collect(),
        })
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sequence numbers unrolled across the 4096 wraparound: a drop of more
    /// than [`WRAP_THRESHOLD`] from the previous raw value counts as one wrap.
    pub fn unrolled_seqs(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut wraps = 0u64;
        let mut prev_raw = self.entries[0].seq_no;
        out.push(u64::from(prev_raw));
        for e in &self.entries[1..] {
            if prev_raw > e.seq_no && prev_raw - e.seq_no > WRAP_THRESHOLD {
                wraps += 1;
            }
            out.push(u64::from(e.seq_no) + wraps * SEQ_MODULUS);
            prev_raw = e.seq_no;
        }
        out
    }
}

/// Transmit-vs-receive loss accounting from sequence-ID matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub n_tx: u64,
    pub n_rx: u64,
    /// Raw (12-bit) sequence numbers transmitted but never received, in
    /// transmission order.
    pub missing_seq: Vec<u16>,
    pub loss_ratio: f64,
    /// Longest run of consecutively transmitted beacons that were all lost.
    pub longest_miss_streak: u64,
}

/// Compare what the transmitter-side monitor saw against the receiver-side
/// monitor. Every received sequence must have been transmitted; a violation
/// indicates a mixed-BSS capture.
pub fn match_sequences(tx: &BeaconTrace, rx: &BeaconTrace) -> Result<MatchReport, TraceError> {
    let tx_seqs: Vec<u64> = tx.unrolled_seqs();
    let tx_set: BTreeSet<u64> = tx_seqs.iter().copied().collect();
    let rx_set: BTreeSet<u64> = rx.unrolled_seqs().into_iter().collect();

    if let Some(&orphan) = rx_set.difference(&tx_set).next() {
        return Err(TraceError::RxNotSubset {
            seq_no: (orphan % SEQ_MODULUS) as u16,
        });
    }

    let missing_unrolled: Vec<u64> = tx_set.difference(&rx_set).copied().collect();
    let missing_set: BTreeSet<u64> = missing_unrolled.iter().copied().collect();

    let mut longest = 0u64;
    let mut current = 0u64;
    for seq in &tx_set {
        if missing_set.contains(seq) {
            current += 1;
            longest = longest.max(current);
        } else {
            current = 0;
        }
    }

    let n_tx = tx_set.len() as u64;
    Ok(MatchReport {
        n_tx,
        n_rx: rx_set.len() as u64,
        missing_seq: missing_unrolled
            .iter()
            .map(|s| (s % SEQ_MODULUS) as u16)
            .collect(),
        loss_ratio: missing_unrolled.len() as f64 / n_tx as f64,
        longest_miss_streak: longest,
    })
}

/// Estimate the generation time of the first beacon from a trace captured on
/// a clean channel, where receive times track the generation grid.
///
/// Fits the nominal grid by taking the median of `t_i - nominal·i` — robust
/// to stray jitter — and rejects traces whose residual spread exceeds 1 ms,
/// which signals the channel was not clean.
pub fn estimate_first_gen_time(
    clean: &BeaconTrace,
    nominal_interval_us: u64,
) -> Result<f64, TraceError> {
    let n = clean.len();
    if n < MIN_CALIBRATION_ENTRIES {
        return Err(TraceError::TraceTooShort {
            required: MIN_CALIBRATION_ENTRIES,
            actual: n,
        });
    }
    let mut residuals: Vec<i64> = clean
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| e.timestamp_us as i64 - (nominal_interval_us as i64) * i as i64)
        .collect();
    residuals.sort_unstable();
    let spread = residuals[n - 1] - residuals[0];
    if spread > MAX_CALIBRATION_SPREAD_US {
        return Err(TraceError::GridMisfit { spread_us: spread });
    }
    let median = if n % 2 == 1 {
        residuals[n / 2] as f64
    } else {
        (residuals[n / 2 - 1] as f64 + residuals[n / 2] as f64) / 2.0
    };
    Ok(median)
}

/// Mean additional delivery delay from receive timestamps: the sample mean
/// of `t_i` minus the reconstructed grid mean,
/// `(1/N)·Σ t_i - first_gen - nominal·(N-1)/2`.
///
/// Assumes no beacon in the window was dropped; a drop shifts every later
/// grid slot and biases the estimate, so pair this with a loss check.
pub fn additional_delay(rx: &BeaconTrace, first_gen_us: f64, nominal_interval_us: u64) -> f64 {
    let n = rx.len() as u64;
    let sum: u128 = rx.entries().iter().map(|e| e.timestamp_us as u128).sum();
    let mean_t = sum as f64 / n as f64;
    mean_t - first_gen_us - nominal_interval_us as f64 * (n - 1) as f64 / 2.0
}

/// Empirical CDF of gaps between successive observations.
pub fn interval_cdf(trace: &BeaconTrace) -> Result<CdfSeries, TraceError> {
    if trace.len() < 2 {
        return Err(TraceError::InsufficientEvents {
            required: 2,
            actual: trace.len(),
        });
    }
    let intervals: Vec<u64> = trace
        .entries()
        .windows(2)
        .map(|w| w[1].timestamp_us - w[0].timestamp_us)
        .collect();
    Ok(CdfSeries::from_samples(&intervals).expect("at least one interval"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("EMPTY_TRACE: trace contains no entries")]
    EmptyTrace,
    #[error("NON_MONOTONE_TIMESTAMP: duplicate timestamp at entry {index}")]
    NonMonotoneTimestamp { index: usize },
    #[error("SEQ_OUT_OF_RANGE: entry {index} has seq_no {seq_no} outside 0..=4095")]
    SeqOutOfRange { index: usize, seq_no: u16 },
    #[error("RX_NOT_SUBSET: received seq_no {seq_no} never appears in the transmit trace")]
    RxNotSubset { seq_no: u16 },
    #[error("TRACE_TOO_SHORT: calibration needs {required} entries, got {actual}")]
    TraceTooShort { required: usize, actual: usize },
    #[error("GRID_MISFIT: residual spread {spread_us} µs exceeds 1 ms; channel was not clean")]
    GridMisfit { spread_us: i64 },
    #[error("INSUFFICIENT_EVENTS: need at least {required} observations, have {actual}")]
    InsufficientEvents { required: usize, actual: usize },
}

impl TraceError {
    pub fn code(&self) -> &'static str {
        match self {
            TraceError::EmptyTrace => "EMPTY_TRACE",
            TraceError::NonMonotoneTimestamp { .. } => "NON_MONOTONE_TIMESTAMP",
            TraceError::SeqOutOfRange { .. } => "SEQ_OUT_OF_RANGE",
            TraceError::RxNotSubset { .. } => "RX_NOT_SUBSET",
            TraceError::TraceTooShort { .. } => "TRACE_TOO_SHORT",
            TraceError::GridMisfit { .. } => "GRID_MISFIT",
            TraceError::InsufficientEvents { .. } => "INSUFFICIENT_EVENTS",
        }
    }

    /// Index of the offending input row, when the error is row-specific.
    pub fn entry_index(&self) -> Option<usize> {
        match self {
            TraceError::NonMonotoneTimestamp { index }
            | TraceError::SeqOutOfRange { index, .. } => Some(*index),
            _ => None,
        }
    }
}
