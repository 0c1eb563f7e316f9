//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured values (run with `-- --nocapture` to see
//! them all).
//!
//! Statistical criteria run a fixed seed so the suite is deterministic. The
//! n = 1e5 Monte Carlo runs split the beacons across many replications: the
//! grid offset is drawn once per replication, and the beacon interval and
//! schedule period share large common divisors, so a single replication
//! samples only a coarse lattice of relative phases. Many replications make
//! the offset average converge alongside the binomial error.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use coexfair_core::analytic;
use coexfair_core::sim::{self, IntervalKind};
use coexfair_core::trace;
use coexfair_core::{
    BeaconCase, BeaconTrace, DutyCycleConfig, GridOffset, OverlapPolicy, SimConfig, TraceEntry,
    WifiMacParams,
};

use coexfair::capture::parse_capture_csv;
use coexfair::export;

const SEED: u64 = 0xACCE97;

fn table_mac() -> WifiMacParams {
    WifiMacParams::default()
}

fn reference_setups() -> [DutyCycleConfig; 3] {
    [
        DutyCycleConfig::new(5_000, 5_000),
        DutyCycleConfig::new(20_000, 1_000),
        DutyCycleConfig::new(20_000, 20_000),
    ]
}

fn monte_carlo_config(duty: DutyCycleConfig, n_beacons: u64, replications: u32) -> SimConfig {
    SimConfig {
        duty,
        mac: table_mac(),
        policy: OverlapPolicy::new(0.0),
        n_beacons,
        seed: SEED,
        grid_offset: GridOffset::Average,
        replications,
    }
}

#[test]
fn criterion_01_reception_table_reproduction() {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_coexfair"))
        .args(["analytic", "--paper-table"])
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let rec = |i: usize| -> f64 { rows[i]["reception_probability"].as_f64().unwrap() };

    assert!(
        (rec(0) - 0.9568).abs() < 1e-12,
        "(5,5) reception {}",
        rec(0)
    );
    assert!(
        (rec(1) - 0.9794).abs() < 1e-4,
        "(20,1) reception {}",
        rec(1)
    );
    assert!(
        (rec(2) - 0.9892).abs() < 1e-4,
        "(20,20) reception {}",
        rec(2)
    );
    // the (5,5) row deviates from its reference value within 2e-3 and the
    // report documents the discrepancy
    assert!((rec(0) - 0.9559).abs() < 2e-3);
    let note = rows[0]["note"].as_str().unwrap();
    assert!(note.contains("0.9559") && note.contains("48"));
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");

    println!(
        "criterion 01 PASS — reception table {{(5,5): {:.4}, (20,1): {:.5}, (20,20): {:.4}}}, \
         (5,5) residual documented, {elapsed:?}",
        rec(0),
        rec(1),
        rec(2)
    );
}

#[test]
fn criterion_02_delivery_table_reproduction() {
    let started = Instant::now();
    let mac = table_mac();
    let reference_ms = [1.82, 10.15, 5.59];
    let mut values_ms = [0.0f64; 3];
    for (i, duty) in reference_setups().iter().enumerate() {
        let e_us = analytic::expected_delivery_time(duty, &mac).unwrap();
        values_ms[i] = e_us / 1_000.0;
        assert!(
            (values_ms[i] - reference_ms[i]).abs() < 0.1,
            "setup {i}: {} ms vs reference {} ms",
            values_ms[i],
            reference_ms[i]
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1));
    println!(
        "criterion 02 PASS — delivery times {{{:.4}, {:.4}, {:.4}}} ms all within 0.1 ms of \
         {{1.82, 10.15, 5.59}} ms, {elapsed:?}",
        values_ms[0], values_ms[1], values_ms[2]
    );
}

/// Brute-force reference for the closed-form drop probability: enumerate
/// every backoff-slot generation offset over one period and apply the
/// overlap rule directly (airtime starts at the generation slot, the overlap
/// with the next ON period must exceed p_o·T_b), ignoring DIFS and backoff
/// displacement just as the closed form does.
fn slot_enumeration_drop(
    duty: &DutyCycleConfig,
    mac: &WifiMacParams,
    policy: &OverlapPolicy,
) -> f64 {
    let period = duty.period_us();
    let threshold = policy.max_tolerated_overlap_us(mac.t_b_us);
    let mut dropped = 0u64;
    let mut offset = 0u64;
    while offset < period {
        if offset >= duty.t_on_us {
            let overhang = (offset + mac.t_b_us).saturating_sub(period);
            if overhang.min(duty.t_on_us) as f64 > threshold {
                dropped += 1;
            }
        }
        offset += mac.slot_us;
    }
    dropped as f64 * mac.slot_us as f64 / period as f64
}

#[test]
fn criterion_03_drop_probability_oracle_equivalence() {
    let mac = table_mac();
    let min_off = mac.t_b_us + mac.difs_us + (mac.cw_min as u64 - 1) * mac.slot_us; // 596
    let mut state = SEED | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };

    let mut checked = 0;
    while checked < 25 {
        let t_on = 1_000 + next() % 19_000;
        let t_off = min_off + 1 + next() % 20_000;
        let p_o = (next() % 11) as f64 / 20.0; // 0.0..=0.5
        let duty = DutyCycleConfig::new(t_on, t_off);
        let policy = OverlapPolicy::new(p_o);

        let closed = analytic::beacon_drop_probability(&duty, &mac, &policy).unwrap();
        let brute = slot_enumeration_drop(&duty, &mac, &policy);
        let p_s = analytic::slot_gen_probability(&duty, &mac).unwrap();
        assert!(
            (closed - brute).abs() <= p_s + 1e-12,
            "duty {duty:?} p_o {p_o}: closed {closed} vs oracle {brute} (P_s = {p_s})"
        );
        checked += 1;
    }
    println!(
        "criterion 03 PASS — closed form matched the slot-enumeration oracle within one slot's \
         probability mass on {checked} randomized schedules"
    );
}

#[test]
fn criterion_04_simulated_drop_matches_analytic() {
    let mac = table_mac();
    for duty in reference_setups() {
        let started = Instant::now();
        // 1e5 beacons as 20_000 replications x 5 beacons
        let cfg = monte_carlo_config(duty, 5, 20_000);
        let result = sim::simulate(&cfg).unwrap();
        let n = result.records.len() as f64;
        assert_eq!(n as u64, 100_000);

        let p_window = mac.t_b_us as f64 / duty.period_us() as f64;
        let sigma = (p_window * (1.0 - p_window) / n).sqrt();
        let dev = (result.drop_rate - p_window).abs();
        assert!(
            dev < 3.0 * sigma,
            "{duty:?}: sim drop {} vs t_b/period {p_window} (|dev| {dev:.2e} > 3σ {:.2e})",
            result.drop_rate,
            3.0 * sigma
        );

        let closed = analytic::beacon_drop_probability(&duty, &mac, &cfg.policy).unwrap();
        assert!(
            (result.drop_rate - closed).abs() < 0.005,
            "{duty:?}: sim drop {} vs closed form {closed}",
            result.drop_rate
        );

        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
        println!(
            "criterion 04 PASS — ({}, {}): sim drop {:.5} within 3σ ({:.1e}) of t_b/period \
             {:.5} and within 0.005 of closed form {:.5}, {elapsed:?}",
            duty.t_on_us,
            duty.t_off_us,
            result.drop_rate,
            3.0 * sigma,
            p_window,
            closed
        );
    }
}

#[test]
fn criterion_05_drop_depends_only_on_period() {
    let mac = table_mac();
    let policy = OverlapPolicy::new(0.0);
    let a = DutyCycleConfig::new(5_000, 5_000);
    let b = DutyCycleConfig::new(8_000, 2_000);

    let drop_a = analytic::beacon_drop_probability(&a, &mac, &policy).unwrap();
    let drop_b = analytic::beacon_drop_probability(&b, &mac, &policy).unwrap();
    assert_eq!(
        drop_a.to_bits(),
        drop_b.to_bits(),
        "equal periods must give bit-identical drop probabilities"
    );

    let sim_a = sim::simulate(&monte_carlo_config(a, 5, 20_000)).unwrap();
    let sim_b = sim::simulate(&monte_carlo_config(b, 5, 20_000)).unwrap();
    let n = 100_000.0;
    let sigma = (drop_a * (1.0 - drop_a) / n).sqrt();
    let combined = 3.0 * (2.0f64).sqrt() * sigma;
    let dev = (sim_a.drop_rate - sim_b.drop_rate).abs();
    assert!(
        dev < combined,
        "sim drops {} vs {} differ by {dev:.2e} > combined 3σ {combined:.2e}",
        sim_a.drop_rate,
        sim_b.drop_rate
    );
    println!(
        "criterion 05 PASS — analytic drop bit-identical ({drop_a:.6}); sim drops {:.5} vs \
         {:.5} within combined 3σ {combined:.1e}",
        sim_a.drop_rate, sim_b.drop_rate
    );
}

#[test]
fn criterion_06_simulated_delay_against_closed_form_and_reference() {
    let mac = table_mac();
    let reference_us = [1_820.0, 10_150.0, 5_590.0];
    for (i, duty) in reference_setups().iter().enumerate() {
        // 1e5 beacons as 1_000 replications x 100 beacons
        let cfg = monte_carlo_config(*duty, 100, 1_000);
        let result = sim::simulate(&cfg).unwrap();
        let mean = result.mean_raw_delay_us.unwrap();

        let closed = analytic::expected_delivery_time(duty, &mac).unwrap();
        let rel_closed = (mean - closed).abs() / closed;
        assert!(
            rel_closed < 0.10,
            "({}, {}): sim mean {mean:.1} µs vs closed form {closed:.1} µs ({:.1}%)",
            duty.t_on_us,
            duty.t_off_us,
            rel_closed * 100.0
        );

        let rel_ref = (mean - reference_us[i]).abs() / reference_us[i];
        assert!(
            rel_ref < 0.12,
            "({}, {}): sim mean {mean:.1} µs vs reference {} µs ({:.1}%)",
            duty.t_on_us,
            duty.t_off_us,
            reference_us[i],
            rel_ref * 100.0
        );
        println!(
            "criterion 06 PASS — ({}, {}): sim mean delay {:.3} ms, {:.1}% from closed form \
             {:.3} ms, {:.1}% from reference {:.2} ms",
            duty.t_on_us,
            duty.t_off_us,
            mean / 1_000.0,
            rel_closed * 100.0,
            closed / 1_000.0,
            rel_ref * 100.0,
            reference_us[i] / 1_000.0
        );
    }
}

#[test]
fn criterion_07_trace_round_trip_identity() {
    let cfg = monte_carlo_config(DutyCycleConfig::new(20_000, 1_000), 5_000, 1);
    let result = sim::simulate(&cfg).unwrap();
    assert!(result.drop_rate > 0.0);

    let dir = tempfile::tempdir().unwrap();
    let tx_path = dir.path().join("tx.csv");
    let rx_path = dir.path().join("rx.csv");
    let mut buf = Vec::new();
    export::write_trace_csv(&mut buf, &export::tx_trace_rows(&result.records)).unwrap();
    fs::write(&tx_path, buf).unwrap();
    let mut buf = Vec::new();
    export::write_trace_csv(&mut buf, &export::rx_trace_rows(&result.records)).unwrap();
    fs::write(&rx_path, buf).unwrap();

    let tx = parse_capture_csv(&tx_path).unwrap();
    let rx = parse_capture_csv(&rx_path).unwrap();
    let report = trace::match_sequences(&tx, &rx).unwrap();
    assert_eq!(
        report.loss_ratio, result.drop_rate,
        "loss from traces must equal the simulator's drop rate exactly"
    );

    // longest drop-free window, fed back through the capture format
    let mut best = (0usize, 0usize);
    let mut start = None;
    for (i, r) in result.records.iter().enumerate() {
        if r.delivered {
            let s = *start.get_or_insert(i);
            if i + 1 - s > best.1 - best.0 {
                best = (s, i + 1);
            }
        } else {
            start = None;
        }
    }
    let window = &result.records[best.0..best.1];
    let window_path = dir.path().join("window.csv");
    let mut buf = Vec::new();
    export::write_trace_csv(&mut buf, &export::rx_trace_rows(window)).unwrap();
    fs::write(&window_path, buf).unwrap();
    let window_rx = parse_capture_csv(&window_path).unwrap();

    let estimated = trace::additional_delay(
        &window_rx,
        window[0].gen_time_us as f64,
        cfg.mac.beacon_interval_us,
    );
    let mean = window
        .iter()
        .map(|r| r.delay_us.unwrap() as f64)
        .sum::<f64>()
        / window.len() as f64;
    let dev = (estimated - mean).abs();
    assert!(dev < 1.0, "estimator {estimated} vs mean {mean}");
    println!(
        "criterion 07 PASS — trace loss {:.5} equals sim drop rate exactly; grid estimator \
         within {dev:.2e} µs of the record mean over a {}-beacon drop-free window",
        report.loss_ratio,
        window.len()
    );
}

#[test]
fn criterion_08_delay_estimator_identities() {
    let grid: Vec<TraceEntry> = (0..1_000)
        .map(|i| TraceEntry {
            timestamp_us: 5_000 + 102_400 * i,
            seq_no: (i % 4_096) as u16,
        })
        .collect();
    let perfect = BeaconTrace::new("perfect", grid.clone()).unwrap();
    let zero = trace::additional_delay(&perfect, 5_000.0, 102_400);
    assert_eq!(zero, 0.0, "perfect grid must give exactly zero");

    let shifted = BeaconTrace::new(
        "shifted",
        grid.iter()
            .map(|e| TraceEntry {
                timestamp_us: e.timestamp_us + 5_000,
                seq_no: e.seq_no,
            })
            .collect(),
    )
    .unwrap();
    let shift = trace::additional_delay(&shifted, 5_000.0, 102_400);
    assert_eq!(shift, 5_000.0, "constant shift must be recovered exactly");
    println!(
        "criterion 08 PASS — estimator identities exact: perfect grid -> 0, +5 ms shift -> 5000 µs"
    );
}

#[test]
fn criterion_09_rx_interval_tail_ordering() {
    // 1e5 beacons as 100 replications x 1000 beacons
    let high_duty = sim::simulate(&monte_carlo_config(
        DutyCycleConfig::new(20_000, 1_000),
        1_000,
        100,
    ))
    .unwrap();
    let low_duty = sim::simulate(&monte_carlo_config(
        DutyCycleConfig::new(5_000, 5_000),
        1_000,
        100,
    ))
    .unwrap();

    let p999_high = sim::interval_cdf(&high_duty, IntervalKind::Rx)
        .unwrap()
        .value_at_quantile(0.999);
    let p999_low = sim::interval_cdf(&low_duty, IntervalKind::Rx)
        .unwrap()
        .value_at_quantile(0.999);
    println!(
        "criterion 09 measured — 99.9th percentile rx interval {:.1} ms under (20,1) vs {:.1} \
         ms under (5,5)",
        p999_high as f64 / 1_000.0,
        p999_low as f64 / 1_000.0
    );
    assert!(
        p999_high > p999_low,
        "99.9th percentile rx interval: (20,1) {p999_high} µs must exceed (5,5) {p999_low} µs. \
         This ordering is structurally false under the fixed generation grid: the beacon phase \
         advances by (102400 mod period) per interval, so under (20,1) the beacon preceding \
         every drop is always ON-generated (delay ~18.1 ms) and the one following it gets \
         ~2.3 ms, pinning every loss gap near 189 ms, while under (5,5) the same arithmetic \
         pins every gap near 208 ms; both gap populations carry far more than 0.1% of the \
         interval mass, so the 99.9th percentiles compare the gap sizes and the criterion \
         inverts for every seed."
    );
}

#[test]
fn criterion_10_per_record_invariant_suite() {
    let mut checked_records = 0usize;
    let mut setups: Vec<SimConfig> = reference_setups()
        .iter()
        .map(|d| monte_carlo_config(*d, 2_000, 2))
        .collect();
    // degenerate schedules stay inside the invariants too
    setups.push(SimConfig {
        policy: OverlapPolicy::new(0.5),
        ..monte_carlo_config(DutyCycleConfig::new(25_000, 700), 2_000, 2)
    });
    setups.push(SimConfig {
        grid_offset: GridOffset::Fixed(123),
        ..monte_carlo_config(DutyCycleConfig::new(0, 1_000), 2_000, 2)
    });

    for cfg in &setups {
        // determinism under a fixed seed
        let result = sim::simulate(cfg).unwrap();
        assert_eq!(result, sim::simulate(cfg).unwrap(), "must be deterministic");

        let tolerated = cfg.policy.max_tolerated_overlap_us(cfg.mac.t_b_us);
        for rep in result.records.chunks(cfg.n_beacons as usize) {
            let first_gen = rep[0].gen_time_us;
            for (i, r) in rep.iter().enumerate() {
                assert_eq!(r.index, i as u64);
                // generation grid exact
                assert_eq!(
                    r.gen_time_us,
                    first_gen + r.index * cfg.mac.beacon_interval_us
                );
                let tx_start = r.tx_start_us.unwrap();
                let tx_end = r.tx_end_us.unwrap();
                // no transmission starts during ON
                assert!(!cfg.duty.is_on_at(tx_start));
                // delivered beacons overlap at most p_o * t_b
                assert_eq!(r.overlap_us, cfg.duty.on_overlap_us(tx_start, tx_end));
                assert_eq!(r.delivered, r.overlap_us as f64 <= tolerated);
                // delay bound and presence
                match r.delay_us {
                    Some(d) => {
                        assert!(r.delivered);
                        assert_eq!(d, tx_end - r.gen_time_us);
                        assert!(d >= cfg.mac.difs_us + cfg.mac.t_b_us);
                    }
                    None => assert!(!r.delivered),
                }
                // case partition: exactly one label, CASE1 iff ON-generated
                assert_eq!(
                    r.case == BeaconCase::Case1,
                    cfg.duty.is_on_at(r.gen_time_us)
                );
                checked_records += 1;
            }
        }
        assert_eq!(result.case_counts.total(), result.records.len() as u64);
    }
    println!(
        "criterion 10 PASS — per-record invariants held on {checked_records} records across \
         {} configurations, with bitwise determinism",
        setups.len()
    );
}
