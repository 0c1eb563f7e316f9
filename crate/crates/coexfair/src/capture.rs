//! Ingestion of capture-tool CSV exports.
//!
//! Expected schema: a header row naming at least `timestamp_us` and
//! `seq_no` (extra columns are ignored), then one observation per row,
//! comma-separated, no quoting. Errors carry 1-based line numbers.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use coexfair_core::{BeaconTrace, TraceEntry, TraceError};

pub const TIMESTAMP_COLUMN: &str = "timestamp_us";
pub const SEQ_COLUMN: &str = "seq_no";

#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing header row")]
    MissingHeader { path: String },
    #[error("{path}: header lacks required column '{column}'")]
    MissingColumn { path: String, column: &'static str },
    #[error("{path}: malformed row at line {line}: {reason}")]
    MalformedRow {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: non-monotone timestamp at line {line} (duplicate instant)")]
    NonMonotoneTimestamp { path: String, line: usize },
    #[error("{path}: trace has no data rows")]
    EmptyTrace { path: String },
}

impl CaptureError {
    pub fn code(&self) -> &'static str {
        match self {
            CaptureError::Io { .. } => "CAPTURE_IO",
            CaptureError::MissingHeader { .. } => "MISSING_HEADER",
            CaptureError::MissingColumn { .. } => "MISSING_COLUMN",
            CaptureError::MalformedRow { .. } => "MALFORMED_ROW",
            CaptureError::NonMonotoneTimestamp { .. } => "NON_MONOTONE_TIMESTAMP",
            CaptureError::EmptyTrace { .. } => "EMPTY_TRACE",
        }
    }
}

pub fn parse_capture_csv(path: &Path) -> Result<BeaconTrace, CaptureError> {
    let label = path.display().to_string();
    let file = File::open(path).map_err(|source| CaptureError::Io {
        path: label.clone(),
        source,
    })?;
    parse_capture_reader(&label, BufReader::new(file))
}

pub fn parse_capture_reader<R: Read>(
    label: &str,
    reader: BufReader<R>,
) -> Result<BeaconTrace, CaptureError> {
    let path = label.to_string();
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(source))) => return Err(CaptureError::Io { path, source }),
        None => return Err(CaptureError::MissingHeader { path }),
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let ts_col = columns
        .iter()
        .position(|c| *c == TIMESTAMP_COLUMN)
        .ok_or_else(|| CaptureError::MissingColumn {
            path: path.clone(),
            column: TIMESTAMP_COLUMN,
        })?;
    let seq_col = columns
        .iter()
        .position(|c| *c == SEQ_COLUMN)
        .ok_or_else(|| CaptureError::MissingColumn {
            path: path.clone(),
            column: SEQ_COLUMN,
        })?;
    let needed = ts_col.max(seq_col) + 1;

    let mut entries = Vec::new();
    let mut row_lines = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let row = line.map_err(|source| CaptureError::Io {
            path: path.clone(),
            source,
        })?;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() < needed {
            return Err(CaptureError::MalformedRow {
                path,
                line: line_no,
                reason: format!("expected at least {needed} fields, found {}", fields.len()),
            });
        }
        let timestamp_us: u64 = fields[ts_col]
            .parse()
            .map_err(|_| CaptureError::MalformedRow {
                path: path.clone(),
                line: line_no,
                reason: format!("bad {TIMESTAMP_COLUMN} '{}'", fields[ts_col]),
            })?;
        let seq_no: u16 = fields[seq_col]
            .parse()
            .ok()
            .filter(|s| *s < 4096)
            .ok_or_else(|| CaptureError::MalformedRow {
                path: path.clone(),
                line: line_no,
                reason: format!("bad {SEQ_COLUMN} '{}' (must be 0..=4095)", fields[seq_col]),
            })?;
        entries.push(TraceEntry {
            timestamp_us,
            seq_no,
        });
        row_lines.push(line_no);
    }

    BeaconTrace::new(label, entries).map_err(|e| match e {
        TraceError::EmptyTrace => CaptureError::EmptyTrace { path },
        TraceError::NonMonotoneTimestamp { index } => CaptureError::NonMonotoneTimestamp {
            line: row_lines[index],
            path,
        },
        TraceError::SeqOutOfRange { index, seq_no } => CaptureError::MalformedRow {
            line: row_lines[index],
            path,
            reason: format!("seq_no {seq_no} outside 0..=4095"),
        },
        other => CaptureError::MalformedRow {
            line: 0,
            path,
            reason: other.to_string(),
        },
    })
}
