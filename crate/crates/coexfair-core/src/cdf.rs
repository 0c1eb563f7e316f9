//! Empirical CDFs over integer-microsecond samples.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub value_us: u64,
    /// P(X <= value_us).
    pub cum_prob: f64,
}

/// Empirical distribution of a sample of durations: one point per distinct
/// value, strictly increasing in value, nondecreasing in probability, final
/// probability exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    points: Vec<CdfPoint>,
    n_samples: usize,
}

impl CdfSeries {
    /// Build from raw samples. Returns `None` for an empty sample.
    pub fn from_samples(samples: &[u64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let mut points: Vec<CdfPoint> = Vec::new();
        let mut seen = 0usize;
        let mut i = 0usize;
        while i < n {
            let value = sorted[i];
            while i < n && sorted[i] == value {
                i += 1;
                seen += 1;
            }
            points.push(CdfPoint {
                value_us: value,
                cum_prob: seen as f64 / n as f64,
            });
        }
        // the final point is exactly 1 since seen == n there
        Some(Self {
            points,
            n_samples: n,
        })
    }

    pub fn points(&self) -> &[CdfPoint] {
        &self.points
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// P(X <= value).
    pub fn cum_prob_at(&self, value: u64) -> f64 {
        match self.points.binary_search_by_key(&value, |p| p.value_us) {
            Ok(i) => self.points[i].cum_prob,
            Err(0) => 0.0,
            Err(i) => self.points[i - 1].cum_prob,
        }
    }

    /// Smallest sample value v with P(X <= v) >= q. `q` is clamped to (0, 1].
    pub fn value_at_quantile(&self, q: f64) -> u64 {
        let q = q.clamp(f64::MIN_POSITIVE, 1.0);
        for p in &self.points {
            if p.cum_prob >= q {
                return p.value_us;
            }
        }
        // reachable only through float round-down on the last point
        self.points.last().map(|p| p.value_us).unwrap_or(0)
    }
}
