//! Key-value configuration files and parameter resolution.
//!
//! The file format is one `key = value` pair per line; `#` starts a comment
//! line and blank lines are ignored. All durations are in µs (no unit
//! parsing). Command-line flags override file values, and missing MAC keys
//! fall back to the built-in 802.11ac beacon defaults.

use std::fs;
use std::path::Path;

use coexfair_core::{DutyCycleConfig, OverlapPolicy, WifiMacParams};

/// Interferer schedule used when neither flags nor a file provide one: the
/// 95% duty cycle (20 ms ON / 1 ms OFF) that a vacant-channel interferer is
/// allowed to run.
pub const DEFAULT_T_ON_US: u64 = 20_000;
pub const DEFAULT_T_OFF_US: u64 = 1_000;

/// Raw values read from a config file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub t_on_us: Option<u64>,
    pub t_off_us: Option<u64>,
    pub phase_origin_us: Option<u64>,
    pub difs_us: Option<u64>,
    pub slot_us: Option<u64>,
    pub cw_min: Option<u32>,
    pub beacon_bytes: Option<u32>,
    pub beacon_rate_mbps: Option<f64>,
    pub t_b_us: Option<u64>,
    pub preamble_us: Option<u64>,
    pub beacon_interval_us: Option<u64>,
    pub p_o: Option<f64>,
}

/// Values supplied on the command line; same keys as the file.
pub type ParamOverrides = FileConfig;

/// Fully resolved model inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub duty: DutyCycleConfig,
    pub mac: WifiMacParams,
    pub policy: OverlapPolicy,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: expected 'key = value'")]
    MissingSeparator { line: usize },
    #[error("config line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: key '{key}' given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("config line {line}: cannot parse '{value}' for key '{key}'")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
}

impl ConfigFileError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigFileError::Io { .. } => "CONFIG_IO",
            ConfigFileError::MissingSeparator { .. } => "CONFIG_MISSING_SEPARATOR",
            ConfigFileError::UnknownKey { .. } => "CONFIG_UNKNOWN_KEY",
            ConfigFileError::DuplicateKey { .. } => "CONFIG_DUPLICATE_KEY",
            ConfigFileError::InvalidValue { .. } => "CONFIG_INVALID_VALUE",
        }
    }
}

pub fn load_config_file(path: &Path) -> Result<FileConfig, ConfigFileError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<FileConfig, ConfigFileError> {
    let mut cfg = FileConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or(ConfigFileError::MissingSeparator { line })?;
        let key = key.trim();
        let value = value.trim();
        set_key(&mut cfg, key, value, line)?;
    }
    Ok(cfg)
}

fn set_key(
    cfg: &mut FileConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ConfigFileError> {
    fn put<T: std::str::FromStr>(
        slot: &mut Option<T>,
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<(), ConfigFileError> {
        if slot.is_some() {
            return Err(ConfigFileError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        let parsed = value.parse().map_err(|_| ConfigFileError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })?;
        *slot = Some(parsed);
        Ok(())
    }

    match key {
        "t_on_us" => put(&mut cfg.t_on_us, key, value, line),
        "t_off_us" => put(&mut cfg.t_off_us, key, value, line),
        "phase_origin_us" => put(&mut cfg.phase_origin_us, key, value, line),
        "difs_us" => put(&mut cfg.difs_us, key, value, line),
        "slot_us" => put(&mut cfg.slot_us, key, value, line),
        "cw_min" => put(&mut cfg.cw_min, key, value, line),
        "beacon_bytes" => put(&mut cfg.beacon_bytes, key, value, line),
        "beacon_rate_mbps" => put(&mut cfg.beacon_rate_mbps, key, value, line),
        "t_b_us" => put(&mut cfg.t_b_us, key, value, line),
        "preamble_us" => put(&mut cfg.preamble_us, key, value, line),
        "beacon_interval_us" => put(&mut cfg.beacon_interval_us, key, value, line),
        "p_o" => put(&mut cfg.p_o, key, value, line),
        _ => Err(ConfigFileError::UnknownKey {
            line,
            key: key.to_string(),
        }),
    }
}

/// Merge flag values over file values over defaults.
pub fn resolve(file: Option<&FileConfig>, flags: &ParamOverrides) -> ResolvedParams {
    fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
        flag.or(file).unwrap_or(default)
    }
    let empty = FileConfig::default();
    let file = file.unwrap_or(&empty);
    let mac_defaults = WifiMacParams::default();
    ResolvedParams {
        duty: DutyCycleConfig {
            t_on_us: pick(flags.t_on_us, file.t_on_us, DEFAULT_T_ON_US),
            t_off_us: pick(flags.t_off_us, file.t_off_us, DEFAULT_T_OFF_US),
            phase_origin_us: pick(flags.phase_origin_us, file.phase_origin_us, 0),
        },
        mac: WifiMacParams {
            difs_us: pick(flags.difs_us, file.difs_us, mac_defaults.difs_us),
            slot_us: pick(flags.slot_us, file.slot_us, mac_defaults.slot_us),
            cw_min: pick(flags.cw_min, file.cw_min, mac_defaults.cw_min),
            beacon_bytes: pick(
                flags.beacon_bytes,
                file.beacon_bytes,
                mac_defaults.beacon_bytes,
            ),
            beacon_rate_mbps: pick(
                flags.beacon_rate_mbps,
                file.beacon_rate_mbps,
                mac_defaults.beacon_rate_mbps,
            ),
            t_b_us: pick(flags.t_b_us, file.t_b_us, mac_defaults.t_b_us),
            preamble_us: pick(
                flags.preamble_us,
                file.preamble_us,
                mac_defaults.preamble_us,
            ),
            beacon_interval_us: pick(
                flags.beacon_interval_us,
                file.beacon_interval_us,
                mac_defaults.beacon_interval_us,
            ),
        },
        policy: OverlapPolicy::new(pick(flags.p_o, file.p_o, 0.0)),
    }
}
