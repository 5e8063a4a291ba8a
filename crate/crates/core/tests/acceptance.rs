//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hmsim::bypass::{decide_fill, FillDecision, PageActivationTable, RequestLevels, ScorePipelineState};
use hmsim::config::{ExperimentConfig, PatternName, PolicyName, SimMode};
use hmsim::dram_cache::{
    amil_decode, amil_encode, probe_ops, Layout, LineMeta, MshrEntry, MshrOutcome, MshrTable, RowMetadata, AMIL_BITS,
    MSHR_ENTRY_BITS,
};
use hmsim::engine::{run_simulation, workload_records, StatsReport};
use hmsim::geometry::DeviceGeometry;
use hmsim::power::{EnergyEvent, EnergyLedger, EnergyParams};
use hmsim::report::{encode_report, timeline_csv};
use hmsim::timing::{Channel, ColumnRequest, Op, Rank, ScmMode, TimingParams};
use hmsim::workload::TraceRecord;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn synthetic(mode: SimMode, scm: ScmMode, pattern: PatternName, length: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig { mode, scm_mode: scm, ..Default::default() };
    c.workload.pattern = pattern;
    c.workload.length = length;
    c
}

fn run(c: &ExperimentConfig) -> StatsReport {
    let records = workload_records(c, None).expect("workload");
    run_simulation(c, &records).expect("simulation")
}

fn run_trace(c: &ExperimentConfig, records: &[TraceRecord]) -> StatsReport {
    run_simulation(c, records).expect("simulation")
}

// 1: single-request latencies on one channel

fn channel() -> Channel {
    Channel::new(
        0,
        TimingParams::dram().without_refresh(),
        TimingParams::scm(ScmMode::Mlc),
        EnergyParams::default(),
        16,
        2048,
        32,
    )
}

fn read(token: u64, rank: Rank, row: u32) -> ColumnRequest {
    ColumnRequest { token, rank, bank: 5, row, column: 3, op: Op::Read, page: None }
}

/// Latency of a read to `row` after the bank was left open on `open_row`
/// and went idle.
fn latency_after(rank: Rank, open_row: u32, row: u32) -> u64 {
    let mut ch = channel();
    ch.enqueue(read(1, rank, open_row), 0);
    let (end, _) = ch.drain(0);
    let at = end + 5_000;
    ch.enqueue(read(2, rank, row), at);
    let (_, done) = ch.drain(at);
    done[0].done - at
}

fn c1_latency_anchors() -> Outcome {
    let start = Instant::now();
    let dram = latency_after(Rank::Dram, 1, 2);
    let scm = latency_after(Rank::Scm, 1, 2);
    let hit_dram = latency_after(Rank::Dram, 1, 1);
    let hit_scm = latency_after(Rank::Scm, 1, 1);
    ensure(dram == 43, || format!("DRAM conflict {dram}, expected 43"))?;
    ensure(scm == 149, || format!("SCM-MLC conflict {scm}, expected 149"))?;
    ensure(hit_dram == 15 && hit_scm == 15, || format!("row hits {hit_dram}/{hit_scm}, expected 15"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("conflict DRAM {dram}, SCM-MLC {scm}, row hit {hit_dram}"))
}

// 2: streaming reads saturate but never exceed the bus

fn c2_peak_bandwidth() -> Outcome {
    let start = Instant::now();
    let mut c = synthetic(SimMode::DirectDram, ScmMode::Mlc, PatternName::StreamingRead, 1_000_000);
    c.timing.dram_refresh = false;
    let r = run(&c);
    let per = &r.bandwidth.per_channel_utilization;
    let min = per.iter().copied().fold(f64::INFINITY, f64::min);
    let max = per.iter().copied().fold(0.0, f64::max);
    let per_channel_gbps = 32.0;
    ensure(per.len() == 8, || format!("{} channels", per.len()))?;
    ensure(min >= 0.95, || format!("channel utilization {min:.4} below 0.95"))?;
    ensure(max <= 1.0, || format!("channel utilization {max:.4} above 1"))?;
    ensure(r.bandwidth.gbps <= 8.0 * per_channel_gbps, || format!("{:.2} GB/s above 256", r.bandwidth.gbps))?;
    ensure(r.bandwidth.peak_gbps == 256.0, || format!("peak {} GB/s", r.bandwidth.peak_gbps))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("per-channel utilization {min:.4}..{max:.4}, {:.2} GB/s of 256", r.bandwidth.gbps))
}

// 3: device ordering of streaming and random utilization

fn utilization(mode: SimMode, scm: ScmMode, pattern: PatternName) -> f64 {
    run(&synthetic(mode, scm, pattern, 1_000_000)).bandwidth.utilization
}

fn c3_device_ordering() -> Outcome {
    let start = Instant::now();
    let dram = (SimMode::DirectDram, ScmMode::Mlc);
    let slc = (SimMode::DirectScm, ScmMode::Slc);
    let mlc = (SimMode::DirectScm, ScmMode::Mlc);
    let u = |d: (SimMode, ScmMode), p| utilization(d.0, d.1, p);
    let rd_dram = u(dram, PatternName::StreamingRead);
    let rd_slc = u(slc, PatternName::StreamingRead);
    let rd_mlc = u(mlc, PatternName::StreamingRead);
    let wr_dram = u(dram, PatternName::StreamingWrite);
    let wr_mlc = u(mlc, PatternName::StreamingWrite);
    let rnd_dram = u(dram, PatternName::RandomRead);
    let rnd_slc = u(slc, PatternName::RandomRead);
    let rnd_mlc = u(mlc, PatternName::RandomRead);
    ensure(rd_slc >= rd_dram, || format!("SLC read {rd_slc:.4} < DRAM {rd_dram:.4}"))?;
    ensure(rd_mlc >= 0.85 * rd_dram, || format!("MLC read {rd_mlc:.4} < 0.85 x DRAM {rd_dram:.4}"))?;
    ensure(wr_mlc < rd_mlc, || format!("MLC write {wr_mlc:.4} >= MLC read {rd_mlc:.4}"))?;
    ensure(wr_mlc < wr_dram, || format!("MLC write {wr_mlc:.4} >= DRAM write {wr_dram:.4}"))?;
    for (name, rnd, seq) in [("DRAM", rnd_dram, rd_dram), ("SLC", rnd_slc, rd_slc), ("MLC", rnd_mlc, rd_mlc)] {
        ensure(rnd < seq, || format!("{name} random {rnd:.4} >= streaming {seq:.4}"))?;
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "read DRAM {rd_dram:.3} SLC {rd_slc:.3} MLC {rd_mlc:.3}; write DRAM {wr_dram:.3} MLC {wr_mlc:.3}; \
         random DRAM {rnd_dram:.3} SLC {rnd_slc:.3} MLC {rnd_mlc:.3}"
    ))
}

// 4: penalty score unit values

fn c4_penalty_units() -> Outcome {
    let s = ScorePipelineState::new(&TimingParams::dram(), &TimingParams::scm(ScmMode::Mlc), 4, 100);
    let read8 = s.scm_penalty_score(8, false).map_err(|e| e.to_string())?;
    let write1 = s.scm_penalty_score(1, true).map_err(|e| e.to_string())?;
    // hand-derived from the device tables: (120-14)/8 and (120-14)+(1000-16)
    let oracle = f64::from(120 - 14) / 8.0;
    ensure(read8 == oracle && oracle == 13.25, || format!("8 read columns scored {read8}"))?;
    ensure(write1 == 1090.0, || format!("1 write column scored {write1}"))?;
    let same = ScorePipelineState::new(&TimingParams::dram(), &TimingParams::dram(), 4, 100);
    for cols in 1..=8 {
        for w in [false, true] {
            let v = same.scm_penalty_score(cols, w).map_err(|e| e.to_string())?;
            ensure(v == 0.0, || format!("equal timings scored {v} for {cols} columns"))?;
        }
    }
    Ok(format!("13.25 for 8 reads, {write1} for 1 write, 0 for equal timings"))
}

// 5: aggregated metadata column

fn random_row(rng: &mut ChaCha8Rng) -> RowMetadata {
    let mut m = RowMetadata::default();
    for l in m.lines.iter_mut() {
        *l = LineMeta::new(rng.random_range(0..4), rng.random(), rng.random(), rng.random_range(0..4));
    }
    m
}

fn c5_amil() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100_000 {
        let m = random_row(&mut rng);
        let w = amil_encode(&m);
        ensure(w >> 48 == 0, || format!("word {w:#x} wider than 48 bits"))?;
        ensure(amil_decode(w) == m, || format!("roundtrip {i} failed for {m:?}"))?;
    }
    ensure(AMIL_BITS == 48, || format!("packed size {AMIL_BITS} bits"))?;
    let geo = DeviceGeometry::default();
    let sectors = geo.dram_capacity() / 32;
    let mut metadata = 0u64;
    for s in 0..sectors {
        let idx = geo.dram_cache_index(s * 32).map_err(|e| e.to_string())?;
        metadata += idx.is_metadata_column() as u64;
    }
    ensure(metadata * 64 == sectors, || format!("{metadata} of {sectors} sectors uncacheable"))?;
    let amil = probe_ops(&geo, 0, Layout::Amil).len();
    let tad = probe_ops(&geo, 0, Layout::Tad).len();
    ensure(amil == 1 && tad == 8, || format!("row tag fetch AMIL {amil}, TAD {tad} columns"))?;
    Ok(format!("1e5 roundtrips, 48 bits, {metadata}/{sectors} uncacheable, probe 1 vs 8 columns"))
}

// 6: two-level bypass decision against a separately written flowchart

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Expected {
    Bypass,
    FillEmpty,
    Replace,
    Keep,
}

/// Flowchart walk: filter on the average level, then an empty slot is
/// taken outright, otherwise the stored affinity must be beaten.
fn oracle(request_level: u8, request_affinity: u8, avg: u8, victim: &LineMeta) -> Expected {
    let passes_filter = request_level > avg;
    match (passes_filter, victim.valid) {
        (false, _) => Expected::Bypass,
        (true, false) => Expected::FillEmpty,
        (true, true) if request_affinity > victim.affinity => Expected::Replace,
        (true, true) => Expected::Keep,
    }
}

fn class(d: FillDecision) -> Expected {
    match d {
        FillDecision::BypassFirstLevel => Expected::Bypass,
        FillDecision::FillInvalid => Expected::FillEmpty,
        FillDecision::FillReplace => Expected::Replace,
        FillDecision::NoReplace { .. } => Expected::Keep,
    }
}

fn c6_bypass_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lv = |penalty, affinity| RequestLevels { penalty, affinity };
    // constructed cases
    let valid = |affinity| LineMeta::new(1, true, false, affinity);
    ensure(decide_fill(lv(1, 3), 2, &valid(0), 1.0, &mut rng) == FillDecision::BypassFirstLevel, || {
        "level 1 under average 2 did not bypass".into()
    })?;
    ensure(decide_fill(lv(2, 3), 2, &valid(0), 1.0, &mut rng) == FillDecision::BypassFirstLevel, || {
        "level equal to the average did not bypass".into()
    })?;
    ensure(decide_fill(lv(3, 0), 1, &LineMeta::default(), 1.0, &mut rng) == FillDecision::FillInvalid, || {
        "invalid victim was not filled".into()
    })?;
    ensure(decide_fill(lv(3, 3), 0, &valid(2), 1.0, &mut rng) == FillDecision::FillReplace, || {
        "greater affinity did not replace".into()
    })?;
    ensure(
        decide_fill(lv(2, 2), 0, &valid(3), 1.0, &mut rng) == FillDecision::NoReplace { decremented: true },
        || "kept victim was not decremented at p_dec 1".into(),
    )?;
    ensure(
        decide_fill(lv(2, 2), 0, &valid(3), 0.0, &mut rng) == FillDecision::NoReplace { decremented: false },
        || "kept victim decremented at p_dec 0".into(),
    )?;
    // p_dec from the page counters: counter / max
    let mut t = PageActivationTable::new(2, true);
    for _ in 0..4 {
        t.bump_activation_counter(0);
    }
    t.bump_activation_counter(1);
    ensure(t.p_dec(1) == 0.25 && t.p_dec(0) == 1.0, || format!("p_dec {} / {}", t.p_dec(1), t.p_dec(0)))?;
    ensure(PageActivationTable::new(1, false).p_dec(0) == 1.0, || "disabled counters p_dec != 1".into())?;

    // randomized decisions
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let (p, a, avg) = (rng.random_range(0..4), rng.random_range(0..4), rng.random_range(0..4));
        let victim = LineMeta::new(rng.random_range(0..4), rng.random(), rng.random(), rng.random_range(0..4));
        let p_dec = if rng.random() { 1.0 } else { 0.0 };
        let got = decide_fill(lv(p, a), avg, &victim, p_dec, &mut rng);
        let want = oracle(p, a, avg, &victim);
        let dec_ok = match got {
            FillDecision::NoReplace { decremented } => decremented == (p_dec == 1.0 && victim.affinity > 0),
            _ => true,
        };
        if class(got) != want || !dec_ok {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} of 10000 decisions disagree with the oracle"))?;

    // decrement frequency
    let p = 0.3;
    let n = 10_000u32;
    let mut draws = ChaCha8Rng::seed_from_u64(66);
    let hits = (0..n)
        .filter(|_| {
            matches!(decide_fill(lv(2, 1), 0, &valid(3), p, &mut draws), FillDecision::NoReplace { decremented: true })
        })
        .count() as f64;
    let mean = n as f64 * p;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    ensure((hits - mean).abs() <= 3.0 * sigma, || format!("{hits} decrements, expected {mean} +- {:.1}", 3.0 * sigma))?;
    Ok(format!("constructed cases, 1e4 oracle decisions, {hits} decrements vs {mean} +- {:.1}", 3.0 * sigma))
}

// 7: write filtering with a hot set that fits in DRAM

fn zipf_write_heavy(policy: PolicyName) -> ExperimentConfig {
    let mut c = synthetic(SimMode::Cache, ScmMode::Mlc, PatternName::ZipfHotCold, 1_000_000);
    c.policy = policy;
    c.workload.alpha = 0.6;
    c.workload.write_fraction = 0.8;
    c.workload.span_bytes = Some(4 << 20);
    c.workload.window = 8;
    c
}

fn scm_write_columns(r: &StatsReport) -> u64 {
    r.traffic.demand_scm_wr + r.traffic.evict_scm_wr
}

fn c7_write_filtering() -> Outcome {
    let start = Instant::now();
    let aware_cfg = zipf_write_heavy(PolicyName::ScmAware);
    ensure(aware_cfg.workload.span_bytes.unwrap() <= aware_cfg.geometry.dram_capacity(), || {
        "hot set exceeds DRAM".into()
    })?;
    let aware = run(&aware_cfg);
    let bypass = run(&zipf_write_heavy(PolicyName::AlwaysBypass));
    let hit = aware.hit_rates.dram_cache_write;
    let (a, b) = (scm_write_columns(&aware), scm_write_columns(&bypass));
    ensure(hit >= 0.9, || format!("write hit rate {hit:.4} below 0.9"))?;
    ensure(2 * a <= b, || format!("SCM write columns {a} above half of {b}"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!("write hit rate {hit:.4}, SCM write columns {a} vs {b} ({:.1}%)", 100.0 * a as f64 / b as f64))
}

// 8: tag cache on a row-reuse trace

fn row_reuse_trace(passes: usize) -> Vec<TraceRecord> {
    // one read per line over 8 MiB: 512 DRAM rows per channel
    let pass: Vec<TraceRecord> =
        (0..(8u64 << 20) / 256).map(|line| TraceRecord::sector(0, Op::Read, line * 256)).collect();
    pass.iter().copied().cycle().take(pass.len() * passes).collect()
}

fn ctc_config(layout: Layout, ways: u32) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.workload.pattern = PatternName::Trace;
    c.workload.trace = Some("row-reuse".into());
    c.policy = PolicyName::AlwaysFill;
    c.layout = layout;
    c.ctc_l2_ways = ways;
    c.l2.sets = 8;
    c
}

fn c8_ctc_effectiveness() -> Outcome {
    let once = row_reuse_trace(1);
    let twice = row_reuse_trace(2);
    let full = ctc_config(Layout::Amil, 4);
    ensure(full.l2_config().ctc_row_capacity() >= 512, || "trace not covered by the tag cache".into())?;
    let warm = run_trace(&full, &once).traffic.probe;
    let both = run_trace(&full, &twice).traffic.probe;
    ensure(both == warm, || format!("{} probe columns after warmup", both as i64 - warm as i64))?;
    let mut rates = Vec::new();
    for ways in (1..=4).rev() {
        rates.push(run_trace(&ctc_config(Layout::Amil, ways), &twice).hit_rates.ctc);
    }
    ensure(rates.windows(2).all(|w| w[1] <= w[0]), || format!("hit rates for 4..1 ways {rates:?}"))?;
    let amil = run_trace(&ctc_config(Layout::Amil, 1), &twice).traffic.probe;
    let tad = run_trace(&ctc_config(Layout::Tad, 1), &twice).traffic.probe;
    ensure(tad > amil, || format!("TAD {tad} probe columns not above AMIL {amil}"))?;
    Ok(format!(
        "0 probes after warmup; hit rate 4..1 ways {}; 1-way probes TAD {tad} vs AMIL {amil}",
        rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(" ")
    ))
}

// 9: energy of a scripted micro-trace

fn c9_energy() -> Outcome {
    let p = EnergyParams::default();
    let mut l = EnergyLedger::default();
    let mut record = |e, bits| l.record_energy(&p, e, Rank::Scm, bits).map_err(|e| e.to_string());
    record(EnergyEvent::Act, 16_384)?;
    record(EnergyEvent::Rd, 256)?;
    record(EnergyEvent::Rd, 256)?;
    record(EnergyEvent::Pre, 256)?;
    // femtojoule form of 2.47*16384 + 2*0.93*256 + 16.82*256 pJ
    let expected_fj: u64 = 2_470 * 16_384 + 2 * 930 * 256 + 16_820 * 256;
    ensure(l.total_fj() == expected_fj, || format!("{} fJ, expected {expected_fj}", l.total_fj()))?;

    // the same sequence issued on a channel: a dirty SCM row closed by a conflict
    let mut ch = channel();
    let write = ColumnRequest { token: 1, rank: Rank::Scm, bank: 0, row: 1, column: 0, op: Op::Write, page: None };
    let rd = |token, row| ColumnRequest { token, rank: Rank::Scm, bank: 0, row, column: 1, op: Op::Read, page: None };
    ch.enqueue(write, 0);
    ch.enqueue(rd(2, 1), 0);
    ch.enqueue(rd(3, 2), 0);
    ch.drain(0);
    let pre = ch.ledger.get_fj(Rank::Scm, EnergyEvent::Pre);
    ensure(pre == 16_820 * 256, || format!("channel charged {pre} fJ for one dirty column"))?;
    Ok(format!("{expected_fj} fJ = {:.3} pJ", expected_fj as f64 / 1000.0))
}

// 10: power throttle on streaming SCM writes

fn c10_throttle() -> Outcome {
    let mut c = synthetic(SimMode::DirectScm, ScmMode::Mlc, PatternName::StreamingWrite, 500_000);
    let free = run(&c);
    let unthrottled_scm = free.timeline.iter().map(|w| w.scm_watts).sum::<f64>() / free.timeline.len() as f64;
    let budget = 0.7 * free.power.mean_watts;
    c.power.budget_watts = Some(budget);
    let r = run(&c);
    ensure(r.power.engagements > 0, || "throttle never engaged".into())?;
    let first = r.timeline.iter().position(|w| w.throttled_channels > 0).expect("engaged window");
    // windows after the one in which the throttle first took effect
    let steady = &r.timeline[first + 1..];
    ensure(steady.len() >= 5, || format!("only {} windows after engagement", steady.len()))?;
    let steady_watts = steady.iter().map(|w| w.watts).sum::<f64>() / steady.len() as f64;
    let steady_scm = steady.iter().map(|w| w.scm_watts).sum::<f64>() / steady.len() as f64;
    ensure(steady_scm < unthrottled_scm, || format!("SCM power {steady_scm:.3} W not below {unthrottled_scm:.3} W"))?;
    ensure(steady_watts <= 1.1 * budget, || format!("steady power {steady_watts:.3} W above 1.1 x {budget:.3} W"))?;
    Ok(format!(
        "budget {budget:.2} W: steady {steady_watts:.2} W, SCM {unthrottled_scm:.2} -> {steady_scm:.2} W, {} engagements",
        r.power.engagements
    ))
}

// 11: MSHR entry width and capacity

fn c11_mshr() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    ensure(MSHR_ENTRY_BITS == 51, || format!("{MSHR_ENTRY_BITS} bits"))?;
    for _ in 0..10_000 {
        let e = MshrEntry {
            line_address: rng.random_range(0..1u64 << 37),
            column_mask: rng.random(),
            entry_valid: rng.random(),
            is_write: rng.random(),
            affinity_level: rng.random_range(0..4),
            ctc_valid: rng.random(),
            ctc_dirty: rng.random(),
        };
        let w = e.encode();
        ensure(w >> 51 == 0, || format!("entry packs to more than 51 bits: {w:#x}"))?;
        ensure(MshrEntry::decode(w).ok() == Some(e), || format!("roundtrip failed for {e:?}"))?;
    }
    let mut t = MshrTable::new(128);
    for line in 0..128 {
        let o = t.insert_or_merge(line, 0, Op::Read).map_err(|e| e.to_string())?;
        ensure(o == MshrOutcome::NewMiss, || format!("line {line}: {o:?}"))?;
    }
    let o = t.insert_or_merge(128, 0, Op::Read).map_err(|e| e.to_string())?;
    ensure(o == MshrOutcome::Full, || format!("129th line: {o:?}"))?;
    Ok("51-bit roundtrip, 129th line Full".into())
}

// 12: reruns are byte-identical

fn c12_determinism() -> Outcome {
    let mut configs = Vec::new();
    for (mode, pattern) in [(SimMode::Cache, PatternName::MixedRandom), (SimMode::Flat, PatternName::ZipfHotCold)] {
        let mut c = synthetic(mode, ScmMode::Mlc, pattern, 50_000);
        c.seed = 12;
        c.bypass.activation_counters = true;
        c.power.budget_watts = Some(5.0);
        configs.push(c);
    }
    for c in &configs {
        let (a, b) = (run(c), run(c));
        ensure(encode_report(&a) == encode_report(&b), || format!("{:?} JSON differs between runs", c.mode))?;
        ensure(timeline_csv(&a.timeline) == timeline_csv(&b.timeline), || format!("{:?} timeline differs", c.mode))?;
    }
    Ok(format!("{} configurations rerun byte-identical", configs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("latency anchors", c1_latency_anchors),
        ("peak bandwidth", c2_peak_bandwidth),
        ("device ordering", c3_device_ordering),
        ("penalty score units", c4_penalty_units),
        ("AMIL metadata", c5_amil),
        ("bypass invariants", c6_bypass_invariants),
        ("write filtering", c7_write_filtering),
        ("tag cache effectiveness", c8_ctc_effectiveness),
        ("energy hand-check", c9_energy),
        ("power throttle", c10_throttle),
        ("MSHR", c11_mshr),
        ("determinism", c12_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} [{t:.1?}]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail} [{t:.1?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
