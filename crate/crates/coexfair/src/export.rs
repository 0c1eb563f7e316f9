//! CSV exporters for simulation results.
//!
//! Schemas:
//! - per-beacon: `index,gen_time_us,tx_start_us,tx_end_us,case,delivered,overlap_us,delay_us`
//! - CDF: `interval_us,cum_prob`
//! - trace: `timestamp_us,seq_no` (the capture-ingestion schema, so exported
//!   traces round-trip through `analyze-trace`)

use std::io::{self, Write};

use coexfair_core::{BeaconRecord, CdfSeries};

pub const BEACON_CSV_HEADER: &str =
    "index,gen_time_us,tx_start_us,tx_end_us,case,delivered,overlap_us,delay_us";
pub const CDF_CSV_HEADER: &str = "interval_us,cum_prob";
pub const TRACE_CSV_HEADER: &str = "timestamp_us,seq_no";

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_beacon_csv<W: Write>(mut w: W, records: &[BeaconRecord]) -> io::Result<()> {
    writeln!(w, "{BEACON_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.index,
            r.gen_time_us,
            opt(r.tx_start_us),
            opt(r.tx_end_us),
            r.case,
            r.delivered,
            r.overlap_us,
            opt(r.delay_us),
        )?;
    }
    Ok(())
}

pub fn write_cdf_csv<W: Write>(mut w: W, cdf: Option<&CdfSeries>) -> io::Result<()> {
    writeln!(w, "{CDF_CSV_HEADER}")?;
    if let Some(cdf) = cdf {
        for p in cdf.points() {
            writeln!(w, "{},{}", p.value_us, p.cum_prob)?;
        }
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(mut w: W, rows: &[(u64, u16)]) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for (timestamp_us, seq_no) in rows {
        writeln!(w, "{timestamp_us},{seq_no}")?;
    }
    Ok(())
}

/// Transmitter-side trace rows: every transmitted beacon, stamped at the end
/// of its airtime, sequence-numbered by grid index modulo 4096.
pub fn tx_trace_rows(records: &[BeaconRecord]) -> Vec<(u64, u16)> {
    records
        .iter()
        .filter_map(|r| r.tx_end_us.map(|t| (t, (r.index % 4096) as u16)))
        .collect()
}

/// Receiver-side trace rows: delivered beacons only.
pub fn rx_trace_rows(records: &[BeaconRecord]) -> Vec<(u64, u16)> {
    records
        .iter()
        .filter(|r| r.delivered)
        .filter_map(|r| r.tx_end_us.map(|t| (t, (r.index % 4096) as u16)))
        .collect()
}
