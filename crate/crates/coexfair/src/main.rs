//! `coexfair` — model, simulate, and measure Wi-Fi beacon delivery under a
//! duty-cycled interferer.
//!
//! Subcommands: `analytic` (closed forms), `simulate` (Monte Carlo with CSV
//! exports), `analyze-trace` (capture-CSV loss and delay), `compare`
//! (simulation vs closed forms). All output is JSON on stdout; errors are
//! JSON on stderr with a nonzero exit code.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use coexfair_core::analytic::AnalyticError;
use coexfair_core::sim;
use coexfair_core::trace::{self, TraceError};
use coexfair_core::{
    BeaconTrace, CdfSeries, CompareError, DutyCycleConfig, GridOffset, MacError, SimConfig,
    SimError, Strictness,
};

use coexfair::capture::{self, CaptureError};
use coexfair::config::{self, ConfigFileError, ParamOverrides, ResolvedParams};
use coexfair::export;
use coexfair::manifest::{self, RunManifest};
use coexfair::report::{self, DelaySection, TraceSection};

#[derive(Parser)]
#[command(
    name = "coexfair",
    version,
    about = "Beacon delivery under a duty-cycled interferer: closed forms, Monte Carlo, trace analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model parameters, mirroring the config-file keys one to one. Flags
/// override file values; missing keys fall back to the built-in defaults.
#[derive(Args, Debug, Default)]
struct ConfigFlags {
    /// Key-value config file (`key = value` per line)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interferer ON time in µs
    #[arg(long)]
    t_on_us: Option<u64>,
    /// Interferer OFF time in µs
    #[arg(long)]
    t_off_us: Option<u64>,
    /// Absolute start of the first ON period in µs
    #[arg(long)]
    phase_origin_us: Option<u64>,
    #[arg(long)]
    difs_us: Option<u64>,
    #[arg(long)]
    slot_us: Option<u64>,
    #[arg(long)]
    cw_min: Option<u32>,
    #[arg(long)]
    beacon_bytes: Option<u32>,
    #[arg(long)]
    beacon_rate_mbps: Option<f64>,
    /// Beacon airtime in µs
    #[arg(long)]
    t_b_us: Option<u64>,
    #[arg(long)]
    preamble_us: Option<u64>,
    /// Beacon generation period in µs
    #[arg(long)]
    beacon_interval_us: Option<u64>,
    /// Tolerated ON-overlap fraction of the beacon airtime, 0..=1
    #[arg(long)]
    p_o: Option<f64>,
    /// Skip the LTE-U Forum schedule bounds (structural checks only)
    #[arg(long)]
    loose: bool,
}

#[derive(Args, Debug)]
struct SimFlags {
    /// RNG seed (falls back to $COEXFAIR_SEED, then 0)
    #[arg(long, env = "COEXFAIR_SEED", default_value_t = 0)]
    seed: u64,
    /// Beacons per replication
    #[arg(long, default_value_t = 3_000)]
    beacons: u64,
    #[arg(long, default_value_t = 1)]
    replications: u32,
    /// "average" (uniform offset per replication) or a fixed offset in µs
    #[arg(long, default_value = "average", value_parser = parse_grid_offset)]
    grid_offset: GridOffset,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form drop probability and delivery time
    Analytic {
        #[command(flatten)]
        cfg: ConfigFlags,
        /// Emit the three benchmark rows (5/5, 20/1, 20/20 ms) instead
        #[arg(long)]
        paper_table: bool,
    },
    /// Run the Monte Carlo simulator and export CSVs
    Simulate {
        #[command(flatten)]
        cfg: ConfigFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Directory for summary.json, CSV exports, and the run manifest
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compute loss and delay statistics from capture-CSV exports
    AnalyzeTrace {
        /// Transmitter-side capture CSV (timestamp_us,seq_no)
        #[arg(long)]
        tx: PathBuf,
        /// Receiver-side capture CSV
        #[arg(long)]
        rx: PathBuf,
        /// Clean-channel capture CSV for grid calibration
        #[arg(long)]
        clean: Option<PathBuf>,
        /// Directory for report.json, CDF CSVs, and the run manifest
        #[arg(long)]
        out: Option<PathBuf>,
        /// Nominal beacon interval for the delay estimator, in µs
        #[arg(long, default_value_t = 102_400)]
        nominal_interval_us: u64,
    },
    /// Simulate and compare against the closed forms
    Compare {
        #[command(flatten)]
        cfg: ConfigFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Second schedule "T_ON_US,T_OFF_US" for an equal-period check
        #[arg(long)]
        pair: Option<String>,
        /// Directory for compare.json and the run manifest
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn parse_grid_offset(s: &str) -> Result<GridOffset, String> {
    if s.eq_ignore_ascii_case("average") {
        Ok(GridOffset::Average)
    } else {
        s.parse::<u64>()
            .map(GridOffset::Fixed)
            .map_err(|_| format!("expected 'average' or an offset in µs, got '{s}'"))
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    ConfigFile(#[from] ConfigFileError),
    #[error("invalid configuration: {}", violations.join(", "))]
    InvalidParams { violations: Vec<String> },
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("bad value for --{flag}: {reason}")]
    BadFlag { flag: &'static str, reason: String },
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::ConfigFile(e) => e.code(),
            CliError::InvalidParams { .. } => "INVALID_CONFIG",
            CliError::Analytic(e) => e.code(),
            CliError::Sim(e) => e.code(),
            CliError::Compare(e) => e.code(),
            CliError::Trace(e) => e.code(),
            CliError::Capture(e) => e.code(),
            CliError::Io { .. } => "IO",
            CliError::BadFlag { .. } => "BAD_FLAG",
        }
    }
}

fn error_body(e: &CliError) -> serde_json::Value {
    let mut body = serde_json::json!({
        "error": { "code": e.code(), "message": e.to_string() }
    });
    if let CliError::InvalidParams { violations } = e {
        body["error"]["violations"] = serde_json::json!(violations);
    }
    body
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&error_body(&e)).expect("error body serializes")
        );
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analytic { cfg, paper_table } => cmd_analytic(cfg, paper_table),
        Command::Simulate { cfg, sim, out_dir } => cmd_simulate(cfg, sim, out_dir),
        Command::AnalyzeTrace {
            tx,
            rx,
            clean,
            out,
            nominal_interval_us,
        } => cmd_analyze_trace(tx, rx, clean, out, nominal_interval_us),
        Command::Compare {
            cfg,
            sim,
            pair,
            out_dir,
        } => cmd_compare(cfg, sim, pair, out_dir),
    }
}

fn resolve_flags(flags: &ConfigFlags) -> Result<ResolvedParams, CliError> {
    let file = match &flags.config {
        Some(path) => Some(config::load_config_file(path)?),
        None => None,
    };
    let overrides = ParamOverrides {
        t_on_us: flags.t_on_us,
        t_off_us: flags.t_off_us,
        phase_origin_us: flags.phase_origin_us,
        difs_us: flags.difs_us,
        slot_us: flags.slot_us,
        cw_min: flags.cw_min,
        beacon_bytes: flags.beacon_bytes,
        beacon_rate_mbps: flags.beacon_rate_mbps,
        t_b_us: flags.t_b_us,
        preamble_us: flags.preamble_us,
        beacon_interval_us: flags.beacon_interval_us,
        p_o: flags.p_o,
    };
    let resolved = config::resolve(file.as_ref(), &overrides);
    validate_params(&resolved, flags.loose)?;
    Ok(resolved)
}

/// Aggregate every violation across the schedule, MAC, and overlap policy
/// into one error.
fn validate_params(resolved: &ResolvedParams, loose: bool) -> Result<(), CliError> {
    let strictness = if loose {
        Strictness::Loose
    } else {
        Strictness::Strict
    };
    let mut violations: Vec<String> = Vec::new();
    if let Err(e) = resolved.duty.validate(strictness) {
        violations.extend(e.violations().iter().map(|v| v.code().to_string()));
    }
    if let Err(MacError::Invalid(v)) = resolved.mac.validate() {
        violations.extend(v.iter().map(|x| x.to_string()));
    }
    if resolved.policy.validate().is_err() {
        violations.push("OVERLAP_FRACTION_OUT_OF_RANGE".to_string());
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::InvalidParams { violations })
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn write_file(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<String, CliError> {
    let path = dir.join(name);
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(&path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    write(&mut writer).map_err(io_err)?;
    writer.flush().map_err(io_err)?;
    Ok(name.to_string())
}

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn argv() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn cmd_analytic(cfg: ConfigFlags, paper_table: bool) -> Result<(), CliError> {
    let resolved = resolve_flags(&cfg)?;
    if paper_table {
        let table = report::paper_table(&resolved.mac, &resolved.policy)?;
        print_json(&table);
    } else {
        let output = report::analytic_output(&resolved.duty, &resolved.mac, &resolved.policy)?;
        print_json(&output);
    }
    Ok(())
}

fn cmd_simulate(cfg: ConfigFlags, sim_flags: SimFlags, out_dir: PathBuf) -> Result<(), CliError> {
    let started = Instant::now();
    let resolved = resolve_flags(&cfg)?;
    let sim_cfg = SimConfig {
        duty: resolved.duty,
        mac: resolved.mac,
        policy: resolved.policy,
        n_beacons: sim_flags.beacons,
        seed: sim_flags.seed,
        grid_offset: sim_flags.grid_offset,
        replications: sim_flags.replications,
    };
    let result = sim::simulate(&sim_cfg)?;
    create_out_dir(&out_dir)?;

    let mut outputs = Vec::new();
    let summary = report::simulate_summary(&result);
    outputs.push(write_file(&out_dir, "summary.json", |w| {
        writeln!(
            w,
            "{}",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        )
    })?);
    outputs.push(write_file(&out_dir, "beacons.csv", |w| {
        export::write_beacon_csv(w, &result.records)
    })?);
    let tx_cdf = CdfSeries::from_samples(&result.tx_intervals_us);
    let rx_cdf = CdfSeries::from_samples(&result.rx_intervals_us);
    outputs.push(write_file(&out_dir, "tx_intervals_cdf.csv", |w| {
        export::write_cdf_csv(w, tx_cdf.as_ref())
    })?);
    outputs.push(write_file(&out_dir, "rx_intervals_cdf.csv", |w| {
        export::write_cdf_csv(w, rx_cdf.as_ref())
    })?);
    // trace exports describe one contiguous capture: replication 0
    let rep0 = &result.records[..sim_cfg.n_beacons as usize];
    outputs.push(write_file(&out_dir, "tx_trace.csv", |w| {
        export::write_trace_csv(w, &export::tx_trace_rows(rep0))
    })?);
    outputs.push(write_file(&out_dir, "rx_trace.csv", |w| {
        export::write_trace_csv(w, &export::rx_trace_rows(rep0))
    })?);

    let mut manifest = RunManifest::new(argv(), serde_json::to_value(sim_cfg).unwrap());
    manifest.seed = Some(sim_cfg.seed);
    manifest.outputs = outputs;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest::write_manifest(&out_dir, &manifest).map_err(|source| CliError::Io {
        path: out_dir.join(manifest::MANIFEST_FILE).display().to_string(),
        source,
    })?;

    print_json(&summary);
    Ok(())
}

fn trace_section(path: &Path, trace: &BeaconTrace) -> TraceSection {
    TraceSection {
        path: path.display().to_string(),
        entries: trace.len(),
        first_timestamp_us: trace.entries().first().map(|e| e.timestamp_us).unwrap_or(0),
        last_timestamp_us: trace.entries().last().map(|e| e.timestamp_us).unwrap_or(0),
    }
}

fn cmd_analyze_trace(
    tx: PathBuf,
    rx: PathBuf,
    clean: Option<PathBuf>,
    out: Option<PathBuf>,
    nominal_interval_us: u64,
) -> Result<(), CliError> {
    let started = Instant::now();
    let tx_trace = capture::parse_capture_csv(&tx)?;
    let rx_trace = capture::parse_capture_csv(&rx)?;
    let match_report = trace::match_sequences(&tx_trace, &rx_trace)?;

    let mut clean_section = None;
    let (delay, delay_notice) = match &clean {
        Some(clean_path) => {
            let clean_trace = capture::parse_capture_csv(clean_path)?;
            let first_gen_estimate_us =
                trace::estimate_first_gen_time(&clean_trace, nominal_interval_us)?;
            let additional_delay_us =
                trace::additional_delay(&rx_trace, first_gen_estimate_us, nominal_interval_us);
            clean_section = Some(trace_section(clean_path, &clean_trace));
            let loss_in_window = match_report.loss_ratio > 0.0;
            let caveat = loss_in_window.then(|| {
                format!(
                    "the delay estimator assumes a drop-free window, but sequence matching \
                     found {} lost beacons; the estimate is biased upward",
                    match_report.missing_seq.len()
                )
            });
            (
                Some(DelaySection {
                    first_gen_estimate_us,
                    additional_delay_us,
                    nominal_interval_us,
                    loss_in_window,
                    caveat,
                }),
                None,
            )
        }
        None => (
            None,
            Some(
                "delay estimation skipped: provide --clean <csv> captured with the interferer off"
                    .to_string(),
            ),
        ),
    };

    let output = report::AnalyzeTraceReport {
        tx: trace_section(&tx, &tx_trace),
        rx: trace_section(&rx, &rx_trace),
        clean: clean_section,
        match_report,
        delay,
        delay_notice,
    };

    if let Some(dir) = &out {
        create_out_dir(dir)?;
        let mut outputs = Vec::new();
        outputs.push(write_file(dir, "report.json", |w| {
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&output).expect("report serializes")
            )
        })?);
        let tx_cdf = trace::interval_cdf(&tx_trace).ok();
        let rx_cdf = trace::interval_cdf(&rx_trace).ok();
        outputs.push(write_file(dir, "tx_intervals_cdf.csv", |w| {
            export::write_cdf_csv(w, tx_cdf.as_ref())
        })?);
        outputs.push(write_file(dir, "rx_intervals_cdf.csv", |w| {
            export::write_cdf_csv(w, rx_cdf.as_ref())
        })?);
        let mut manifest = RunManifest::new(
            argv(),
            serde_json::json!({
                "tx": tx.display().to_string(),
                "rx": rx.display().to_string(),
                "clean": clean.as_ref().map(|p| p.display().to_string()),
                "nominal_interval_us": nominal_interval_us,
            }),
        );
        manifest.outputs = outputs;
        manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
        manifest::write_manifest(dir, &manifest).map_err(|source| CliError::Io {
            path: dir.join(manifest::MANIFEST_FILE).display().to_string(),
            source,
        })?;
    }

    print_json(&output);
    Ok(())
}

fn parse_pair(raw: &str) -> Result<(u64, u64), CliError> {
    let bad = |reason: String| CliError::BadFlag {
        flag: "pair",
        reason,
    };
    let (on, off) = raw
        .split_once(',')
        .ok_or_else(|| bad(format!("expected 'T_ON_US,T_OFF_US', got '{raw}'")))?;
    let t_on = on
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad T_ON_US '{on}'")))?;
    let t_off = off
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad T_OFF_US '{off}'")))?;
    Ok((t_on, t_off))
}

fn cmd_compare(
    cfg: ConfigFlags,
    sim_flags: SimFlags,
    pair: Option<String>,
    out_dir: Option<PathBuf>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let loose = cfg.loose;
    let resolved = resolve_flags(&cfg)?;
    let sim_cfg = SimConfig {
        duty: resolved.duty,
        mac: resolved.mac,
        policy: resolved.policy,
        n_beacons: sim_flags.beacons,
        seed: sim_flags.seed,
        grid_offset: sim_flags.grid_offset,
        replications: sim_flags.replications,
    };
    let main = sim::compare_with_analytic(&sim_cfg)?;

    let (pair_record, pair_check) = match &pair {
        Some(raw) => {
            let (t_on_us, t_off_us) = parse_pair(raw)?;
            let pair_duty = DutyCycleConfig {
                t_on_us,
                t_off_us,
                phase_origin_us: resolved.duty.phase_origin_us,
            };
            validate_params(
                &ResolvedParams {
                    duty: pair_duty,
                    mac: resolved.mac,
                    policy: resolved.policy,
                },
                loose,
            )?;
            let pair_cfg = SimConfig {
                duty: pair_duty,
                ..sim_cfg
            };
            let record = sim::compare_with_analytic(&pair_cfg)?;
            let periods_equal = pair_duty.period_us() == resolved.duty.period_us();
            let analytic_drop_bit_identical = main.analytic.drop_probability.to_bits()
                == record.analytic.drop_probability.to_bits();
            let sim_drop_abs_delta = (main.sim_drop_rate - record.sim_drop_rate).abs();
            let combined_3sigma =
                3.0 * (main.binomial_sigma.powi(2) + record.binomial_sigma.powi(2)).sqrt();
            let within_combined_band = sim_drop_abs_delta < combined_3sigma;
            let check = report::PairCheck {
                pair_duty,
                periods_equal,
                analytic_drop_bit_identical,
                sim_drop_abs_delta,
                combined_3sigma,
                within_combined_band,
                verdict: report::verdict(analytic_drop_bit_identical && within_combined_band),
            };
            (Some(record), Some(check))
        }
        None => (None, None),
    };

    let output = report::CompareOutput {
        verdict: report::verdict(main.drop_within_3sigma),
        main,
        pair: pair_record,
        pair_check,
    };

    if let Some(dir) = &out_dir {
        create_out_dir(dir)?;
        let outputs = vec![write_file(dir, "compare.json", |w| {
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&output).expect("report serializes")
            )
        })?];
        let mut manifest = RunManifest::new(argv(), serde_json::to_value(sim_cfg).unwrap());
        manifest.seed = Some(sim_cfg.seed);
        manifest.outputs = outputs;
        manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
        manifest::write_manifest(dir, &manifest).map_err(|source| CliError::Io {
            path: dir.join(manifest::MANIFEST_FILE).display().to_string(),
            source,
        })?;
    }

    print_json(&output);
    Ok(())
}
