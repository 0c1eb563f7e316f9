//! File formats, configuration handling, and report types for the
//! `coexfair` command-line tool.
//!
//! The pure models live in `coexfair-core`; this crate adds everything that
//! touches the filesystem: the key-value config format, capture-CSV
//! ingestion, CSV/JSON exporters, and run manifests.

pub mod capture;
pub mod config;
pub mod export;
pub mod manifest;
pub mod report;
