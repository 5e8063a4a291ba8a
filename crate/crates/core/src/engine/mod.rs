//! Event-driven simulation of the whole memory system: request streams, the
//! per-channel L2, the DRAM cache controller and the device channels.

mod cache;
mod functional;
mod stats;

pub use stats::*;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bypass::{BypassPolicy, PageActivationTable, PendingDecision, ScorePipelineState};
use crate::config::{ExperimentConfig, SimMode};
use crate::dram_cache::{CacheStore, ColumnOp, Layout, MshrTable};
use crate::error::{Error, Result};
use crate::geometry::DeviceGeometry;
use crate::l2_ctc::{HitCounter, L2Partition, L2Result};
use crate::power::{watts, EnergyEvent, EnergyLedger, PowerMonitor};
use crate::timing::{Channel, ColumnRequest, Op, Rank};
use crate::traffic::{Category, TrafficCounts};
use crate::workload::{generate, parse_trace, TraceRecord};
use crate::Cycle;

use functional::{load, store, Functional};

type ReqId = u64;
type TaskId = u64;

/// Records of the configured workload; `trace_text` is required for
/// trace-driven configurations.
pub fn workload_records(config: &ExperimentConfig, trace_text: Option<&str>) -> Result<Vec<TraceRecord>> {
    let w = &config.workload;
    match w.synthetic() {
        Some(p) => {
            let span = w.span_bytes.unwrap_or_else(|| config.address_capacity());
            Ok(generate(p, config.seed, w.length, span, w.streams)?.collect())
        }
        None => {
            let text = trace_text.ok_or_else(|| Error::Usage("trace workload needs the trace file contents".into()))?;
            parse_trace(text, config.address_capacity())
        }
    }
}

/// Run `records` through the system described by `config`.
pub fn run_simulation(config: &ExperimentConfig, records: &[TraceRecord]) -> Result<StatsReport> {
    Simulator::new(config, records)?.run()
}

#[derive(Debug, Clone, Copy)]
struct PlannedOp {
    op: ColumnOp,
    page: u64,
}

#[derive(Debug, Clone, Copy)]
enum Notify {
    Stream(ReqId),
    /// An L2 read miss for this sector address returned.
    L2Fill(u64),
    /// A demand access of the MSHR entry (line, generation) finished.
    EntryDemand(u64, u64),
    /// A hit of the group (line, generation) finished.
    HitDemand(u64, u64),
    Probe(usize, u64),
    Affinity(u64),
}

#[derive(Debug)]
struct Task {
    phases: Vec<Vec<PlannedOp>>,
    next_phase: usize,
    outstanding: usize,
    notify: Vec<Notify>,
}

/// A sector request as seen by the memory controller.
#[derive(Debug, Clone, Copy)]
struct MemReq {
    addr: u64,
    op: Op,
    /// Value written, or value a read must return.
    value: u64,
    notify: Option<Notify>,
}

#[derive(Debug, Clone, Copy)]
struct StreamReq {
    stream: usize,
    op: Op,
    issued: Cycle,
    expect: u64,
}

#[derive(Debug, Default)]
struct StreamState {
    queue: VecDeque<(Op, u64)>,
    outstanding: u32,
}

#[derive(Debug, Clone, Copy)]
struct L2Value {
    value: u64,
    dirty: bool,
}

#[derive(Debug, Default)]
struct PendingFill {
    waiters: Vec<ReqId>,
    value: Option<u64>,
}

/// In-flight miss of one DRAM cache line.
#[derive(Debug, Clone, Copy)]
struct Entry {
    channel: usize,
    set: u64,
    tag: u8,
    page: u64,
    generation: u64,
    /// The row's metadata column content is known (read by a probe).
    meta_read: bool,
    pending: Option<PendingDecision>,
}

/// Hits to one line issued before the first of them completes; fed to the
/// policy as one request group.
#[derive(Debug, Clone, Copy)]
struct HitTrack {
    channel: usize,
    mask: u8,
    write: bool,
    generation: u64,
}

pub struct Simulator {
    cfg: ExperimentConfig,
    geo: DeviceGeometry,
    layout: Layout,
    channels: Vec<Channel>,
    monitors: Vec<PowerMonitor>,
    l2: Vec<L2Partition>,
    l2_shift: u32,
    chunk_bits: u32,
    line_shift: u32,
    channel_bits: u32,
    store: CacheStore,
    policies: Vec<BypassPolicy>,
    counters: PageActivationTable,
    page_accesses: HashMap<u64, u32>,
    mshrs: Vec<MshrTable>,
    entries: HashMap<u64, Entry>,
    hits: HashMap<u64, HitTrack>,
    next_generation: u64,
    probes: HashMap<(usize, u64), Vec<TaskId>>,
    stalled: Vec<VecDeque<MemReq>>,
    tasks: HashMap<TaskId, Task>,
    next_task: TaskId,
    reqs: HashMap<ReqId, StreamReq>,
    next_req: ReqId,
    l2_pending: HashMap<u64, PendingFill>,
    l2_values: HashMap<u64, L2Value>,
    timers: BinaryHeap<Reverse<(Cycle, ReqId)>>,
    streams: Vec<StreamState>,
    func: Functional,
    rng: ChaCha8Rng,
    requests: RequestStats,
    read_latency_sum: u128,
    traffic: TrafficCounts,
    hit_counters: HitCounters,
    bypass: BypassBreakdown,
    timeline: Vec<WindowSample>,
    window_start: Cycle,
    window_fj: Vec<(u64, u64, u64)>,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig, records: &[TraceRecord]) -> Result<Self> {
        let cfg = config.resolved()?;
        let cap = cfg.address_capacity();
        for (i, r) in records.iter().enumerate() {
            r.validate(cap).map_err(|msg| Error::Trace { line: i + 1, msg })?;
        }
        let geo = cfg.geometry;
        let channels: Vec<Channel> = (0..geo.channels)
            .map(|c| {
                Channel::new(
                    c,
                    cfg.dram_timing(),
                    cfg.scm_timing(),
                    cfg.energy,
                    geo.banks_per_channel(),
                    geo.row_bytes,
                    geo.column_bytes,
                )
                .with_starvation_limit(cfg.timing.starvation_limit)
            })
            .collect();
        let n = channels.len();
        let per_channel_budget = cfg.power.budget_watts.map(|b| b / n as f64);
        let monitors =
            (0..n).map(|_| PowerMonitor::new(cfg.power.window, per_channel_budget, cfg.power.hysteresis)).collect();
        let l2 = match cfg.mode {
            SimMode::Cache | SimMode::Flat => {
                (0..n).map(|_| L2Partition::new(cfg.l2_config())).collect::<Result<Vec<_>>>()?
            }
            SimMode::DirectDram | SimMode::DirectScm => Vec::new(),
        };
        let score =
            ScorePipelineState::new(&cfg.dram_timing(), &cfg.scm_timing(), cfg.bypass.n_levels, cfg.bypass.f_update);
        let policies = (0..n).map(|_| BypassPolicy::new(cfg.policy_kind(), score.clone())).collect();
        let mut streams: Vec<StreamState> = Vec::new();
        let mut ids = BTreeMap::new();
        for r in records {
            let next = ids.len();
            let s = *ids.entry(r.stream).or_insert(next);
            if s == streams.len() {
                streams.push(StreamState::default());
            }
            streams[s].queue.extend(r.sectors().map(|a| (r.op, a)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(1);
        Ok(Self {
            layout: cfg.layout,
            channels,
            monitors,
            l2,
            l2_shift: cfg.l2.line_bytes.trailing_zeros(),
            chunk_bits: (geo.cacheline_bytes / cfg.l2.line_bytes).trailing_zeros(),
            line_shift: geo.cacheline_bytes.trailing_zeros(),
            channel_bits: geo.channels.trailing_zeros(),
            store: CacheStore::new(geo),
            policies,
            counters: PageActivationTable::for_capacity(cfg.address_capacity(), cfg.bypass.activation_counters),
            page_accesses: HashMap::new(),
            mshrs: (0..n).map(|_| MshrTable::new(cfg.mshr.entries)).collect(),
            entries: HashMap::new(),
            hits: HashMap::new(),
            next_generation: 0,
            probes: HashMap::new(),
            stalled: (0..n).map(|_| VecDeque::new()).collect(),
            tasks: HashMap::new(),
            next_task: 0,
            reqs: HashMap::new(),
            next_req: 0,
            l2_pending: HashMap::new(),
            l2_values: HashMap::new(),
            timers: BinaryHeap::new(),
            streams,
            func: Functional::default(),
            rng,
            requests: RequestStats::default(),
            read_latency_sum: 0,
            traffic: TrafficCounts::default(),
            hit_counters: HitCounters::default(),
            bypass: BypassBreakdown::default(),
            timeline: Vec::new(),
            window_start: 0,
            window_fj: vec![(0, 0, 0); n],
            geo,
            cfg,
        })
    }

    pub fn run(mut self) -> Result<StatsReport> {
        let mut now: Cycle = 0;
        let window = self.cfg.power.window;
        loop {
            while now >= self.window_start + window {
                let end = self.window_start + window;
                self.close_window(end)?;
            }
            self.inject(now);
            self.fire_timers(now);
            for c in 0..self.channels.len() {
                if self.channels[c].wake_at() <= now {
                    self.channels[c].tick(now);
                }
                while let Some(done) = self.channels[c].pop_completion(now) {
                    self.op_done(done.token, now);
                }
                self.drain_activations(c);
            }
            if self.finished() {
                break;
            }
            let window_open = self.cfg.workload.window;
            let injectable = self.streams.iter().any(|s| !s.queue.is_empty() && s.outstanding < window_open);
            let mut next = if injectable { now + 1 } else { Cycle::MAX };
            if let Some(Reverse((t, _))) = self.timers.peek() {
                next = next.min(*t);
            }
            for ch in &self.channels {
                next = next.min(ch.wake_at());
                if let Some(t) = ch.next_completion() {
                    next = next.min(t);
                }
            }
            if next == Cycle::MAX {
                return Err(Error::Usage(format!(
                    "simulation stalled at cycle {now} with {} tasks and {} requests in flight",
                    self.tasks.len(),
                    self.reqs.len()
                )));
            }
            now = next.max(now + 1);
        }
        if self.cfg.timing.dram_refresh {
            for ch in &mut self.channels {
                ch.refresh_tick(now);
            }
        }
        if now > self.window_start {
            self.close_window(now)?;
        }
        Ok(self.report(now))
    }

    fn finished(&self) -> bool {
        self.tasks.is_empty()
            && self.timers.is_empty()
            && self.reqs.is_empty()
            && self.stalled.iter().all(VecDeque::is_empty)
            && self.streams.iter().all(|s| s.queue.is_empty())
            && self.channels.iter().all(Channel::is_idle)
    }

    /// Each stream with room in its window injects one sector.
    fn inject(&mut self, now: Cycle) {
        let window = self.cfg.workload.window;
        for s in 0..self.streams.len() {
            let st = &mut self.streams[s];
            if st.outstanding >= window {
                continue;
            }
            let Some((op, addr)) = st.queue.pop_front() else { continue };
            st.outstanding += 1;
            self.inject_one(s, op, addr, now);
        }
    }

    fn inject_one(&mut self, stream: usize, op: Op, addr: u64, now: Cycle) {
        let id = self.next_req;
        self.next_req += 1;
        self.requests.injected += 1;
        match op {
            Op::Read => self.requests.reads += 1,
            Op::Write => self.requests.writes += 1,
        }
        let value = match op {
            Op::Write => self.func.write(addr),
            Op::Read => self.func.expected(addr),
        };
        self.reqs.insert(id, StreamReq { stream, op, issued: now, expect: value });
        let c = self.geo.channel_of(addr) as usize;
        if self.l2.is_empty() {
            self.process(c, MemReq { addr, op, value, notify: Some(Notify::Stream(id)) }, now);
            return;
        }
        let (line, sector) = self.l2_line(addr);
        let (result, eviction) = self.l2[c].data.l2_access(line, sector, op);
        if let Some(ev) = eviction {
            for s in 0..self.l2[c].config.sectors_per_line() as u8 {
                let a = self.l2_sector_addr(c, ev.line, s);
                let v = self.l2_values.remove(&a);
                if ev.dirty >> s & 1 == 1 {
                    let value = v.map_or(0, |v| v.value);
                    self.requests.l2_writebacks += 1;
                    self.process(c, MemReq { addr: a, op: Op::Write, value, notify: None }, now);
                }
            }
        }
        let hit_at = now + self.cfg.l2.hit_latency;
        match (op, result) {
            (Op::Write, _) => {
                self.l2_values.insert(addr, L2Value { value, dirty: true });
                self.timers.push(Reverse((hit_at, id)));
            }
            (Op::Read, L2Result::Hit) => {
                let dirty = self.l2_values.get(&addr).is_some_and(|v| v.dirty);
                match self.l2_pending.get_mut(&addr) {
                    Some(p) if !dirty => p.waiters.push(id),
                    _ => {
                        let got = self.l2_values.get(&addr).map_or(0, |v| v.value);
                        self.func.check(value, got);
                        self.timers.push(Reverse((hit_at, id)));
                    }
                }
            }
            (Op::Read, _) => {
                if let Some(p) = self.l2_pending.get_mut(&addr) {
                    p.waiters.push(id);
                } else {
                    self.l2_pending.insert(addr, PendingFill { waiters: vec![id], value: None });
                    self.process(c, MemReq { addr, op, value, notify: Some(Notify::L2Fill(addr)) }, now);
                }
            }
        }
    }

    /// Channel-local L2 line id and sector of a sector address.
    fn l2_line(&self, addr: u64) -> (u64, u8) {
        let chunk = (addr >> self.l2_shift) & ((1 << self.chunk_bits) - 1);
        let upper = addr >> (self.line_shift + self.channel_bits);
        let sector = (addr >> self.geo.column_bytes.trailing_zeros()) & ((1 << (self.l2_shift - 5)) - 1);
        ((upper << self.chunk_bits) | chunk, sector as u8)
    }

    fn l2_sector_addr(&self, channel: usize, line: u64, sector: u8) -> u64 {
        let chunk = line & ((1 << self.chunk_bits) - 1);
        let upper = line >> self.chunk_bits;
        (upper << (self.line_shift + self.channel_bits))
            | ((channel as u64) << self.line_shift)
            | (chunk << self.l2_shift)
            | ((sector as u64) * self.geo.column_bytes as u64)
    }

    fn fire_timers(&mut self, now: Cycle) {
        while let Some(Reverse((t, id))) = self.timers.peek().copied() {
            if t > now {
                break;
            }
            self.timers.pop();
            self.complete_stream(id, now);
        }
    }

    fn complete_stream(&mut self, id: ReqId, now: Cycle) {
        let r = self.reqs.remove(&id).expect("request in flight");
        self.streams[r.stream].outstanding -= 1;
        self.requests.completed += 1;
        if r.op == Op::Read {
            let lat = now - r.issued;
            self.read_latency_sum += lat as u128;
            self.requests.max_read_latency = self.requests.max_read_latency.max(lat);
        }
    }

    /// Entry point of the memory controller.
    fn process(&mut self, c: usize, req: MemReq, now: Cycle) {
        self.requests.memory_requests += 1;
        match self.cfg.mode {
            SimMode::Cache => self.process_cache(c, req, now),
            SimMode::Flat => {
                let dram_cap = self.geo.dram_capacity();
                if req.addr < dram_cap {
                    self.process_direct(Rank::Dram, req.addr, req, now);
                } else {
                    self.process_direct(Rank::Scm, req.addr - dram_cap, req, now);
                }
            }
            SimMode::DirectDram => self.process_direct(Rank::Dram, req.addr, req, now),
            SimMode::DirectScm => self.process_direct(Rank::Scm, req.addr, req, now),
        }
    }

    fn process_direct(&mut self, rank: Rank, dev_addr: u64, req: MemReq, now: Cycle) {
        let map = match rank {
            Rank::Dram => &mut self.func.dram,
            Rank::Scm => &mut self.func.scm,
        };
        let category = match (rank, req.op) {
            (Rank::Dram, Op::Read) => Category::DemandDramRd,
            (Rank::Dram, Op::Write) => Category::DemandDramWr,
            (Rank::Scm, Op::Read) => Category::DemandScmRd,
            (Rank::Scm, Op::Write) => Category::DemandScmWr,
        };
        match req.op {
            Op::Write => store(map, dev_addr, req.value),
            Op::Read => {
                let got = load(map, dev_addr);
                self.read_done(req, got);
            }
        }
        let op = PlannedOp {
            op: ColumnOp { rank, addr: dev_addr, op: req.op, category },
            page: PageActivationTable::page_of(req.addr),
        };
        self.spawn(vec![vec![op]], req.notify.into_iter().collect(), now);
    }

    /// Functional part of a memory read: check it and hand the value to
    /// any L2 fill waiting on it.
    fn read_done(&mut self, req: MemReq, got: u64) {
        self.func.check(req.value, got);
        if let Some(Notify::L2Fill(addr)) = req.notify {
            if let Some(p) = self.l2_pending.get_mut(&addr) {
                p.value = Some(got);
            }
            let c = self.geo.channel_of(addr) as usize;
            let (line, sector) = self.l2_line(addr);
            let dirty = self.l2_values.get(&addr).is_some_and(|v| v.dirty);
            if self.l2[c].data.probe(line, sector) && !dirty {
                self.l2_values.insert(addr, L2Value { value: got, dirty: false });
            }
        }
    }

    fn spawn(&mut self, phases: Vec<Vec<PlannedOp>>, notify: Vec<Notify>, now: Cycle) -> TaskId {
        let id = self.spawn_waiting(phases, notify);
        self.advance(id, now);
        id
    }

    fn spawn_waiting(&mut self, phases: Vec<Vec<PlannedOp>>, notify: Vec<Notify>) -> TaskId {
        let id = self.next_task;
        self.next_task += 1;
        self.tasks.insert(id, Task { phases, next_phase: 0, outstanding: 0, notify });
        id
    }

    /// Issue the task's next non-empty phase, or complete it.
    fn advance(&mut self, id: TaskId, now: Cycle) {
        loop {
            let task = self.tasks.get_mut(&id).expect("live task");
            if task.next_phase == task.phases.len() {
                let task = self.tasks.remove(&id).expect("live task");
                for n in task.notify {
                    self.notify(n, now);
                }
                return;
            }
            let phase = std::mem::take(&mut task.phases[task.next_phase]);
            task.next_phase += 1;
            if phase.is_empty() {
                continue;
            }
            task.outstanding = phase.len();
            for op in phase {
                self.enqueue_op(op, id, now);
            }
            return;
        }
    }

    fn enqueue_op(&mut self, p: PlannedOp, token: TaskId, now: Cycle) {
        let d = match p.op.rank {
            Rank::Dram => self.geo.decompose_dram(p.op.addr),
            Rank::Scm => self.geo.decompose_address(p.op.addr),
        }
        .expect("device address within capacity");
        let req = ColumnRequest {
            token,
            rank: p.op.rank,
            bank: self.geo.flat_bank(&d),
            row: d.row,
            column: d.column,
            op: p.op.op,
            page: self.counters.enabled().then_some(p.page),
        };
        self.traffic.add(p.op.category, 1);
        self.channels[d.channel as usize].enqueue(req, now);
    }

    fn op_done(&mut self, token: TaskId, now: Cycle) {
        let task = self.tasks.get_mut(&token).expect("completion of a live task");
        task.outstanding -= 1;
        if task.outstanding == 0 {
            self.advance(token, now);
        }
    }

    fn notify(&mut self, n: Notify, now: Cycle) {
        match n {
            Notify::Stream(id) => self.complete_stream(id, now),
            Notify::L2Fill(addr) => {
                let p = self.l2_pending.remove(&addr).expect("pending L2 fill");
                let got = p.value.unwrap_or(0);
                for id in p.waiters {
                    let expect = self.reqs[&id].expect;
                    self.func.check(expect, got);
                    self.complete_stream(id, now);
                }
            }
            Notify::EntryDemand(line, generation) => {
                // the first returning demand starts the decision; later
                // merges only ride along
                if self.entries.get(&line).is_some_and(|e| e.generation == generation && e.pending.is_none()) {
                    self.retire_entry(line, now);
                }
            }
            Notify::HitDemand(line, generation) => {
                if self.hits.get(&line).is_some_and(|h| h.generation == generation) {
                    let h = self.hits.remove(&line).expect("tracked hit");
                    self.policies[h.channel].on_hit(h.mask.count_ones(), h.write);
                }
            }
            Notify::Probe(c, row) => {
                for t in self.probes.remove(&(c, row)).unwrap_or_default() {
                    self.advance(t, now);
                }
            }
            Notify::Affinity(line) => self.finish_entry(line, now),
        }
    }

    fn drain_activations(&mut self, c: usize) {
        let acts: Vec<_> = self.channels[c].drain_activations().collect();
        for (_, page) in acts {
            if let Some(p) = page {
                self.counters.bump_activation_counter(p);
            }
        }
    }

    fn close_window(&mut self, end: Cycle) -> Result<()> {
        let elapsed = end - self.window_start;
        let mut total_fj = 0;
        let mut scm_fj = 0;
        let mut busy = 0;
        let mut throttled = 0;
        for c in 0..self.channels.len() {
            let ch = &self.channels[c];
            let (t, s, b) = (ch.ledger.total_fj(), ch.ledger.rank_total_fj(Rank::Scm), ch.busy_bus_cycles());
            let (pt, ps, pb) = self.window_fj[c];
            total_fj += t - pt;
            scm_fj += s - ps;
            busy += b - pb;
            self.window_fj[c] = (t, s, b);
            let (_, thr) = self.monitors[c].windowed_power_and_throttle(&ch.ledger, elapsed);
            self.channels[c].set_throttle(thr)?;
            if thr.act || thr.wr {
                throttled += 1;
            }
        }
        self.timeline.push(WindowSample {
            end_cycle: end,
            watts: watts(total_fj, elapsed),
            scm_watts: watts(scm_fj, elapsed),
            throttled_channels: throttled,
            utilization: busy as f64 / (elapsed * self.channels.len() as u64) as f64,
        });
        self.window_start = end;
        Ok(())
    }

    fn report(mut self, cycles: Cycle) -> StatsReport {
        self.requests.value_checks = self.func.checks;
        self.requests.value_mismatches = self.func.mismatches;
        let reads_done = self.requests.reads.max(1);
        self.requests.mean_read_latency = self.read_latency_sum as f64 / reads_done as f64;
        self.traffic.refresh = self.channels.iter().map(Channel::refresh_count).sum();
        debug_assert_eq!(
            self.traffic.columns(),
            self.channels
                .iter()
                .flat_map(|c| [Rank::Dram, Rank::Scm].map(|r| c.column_ops(r, Op::Read) + c.column_ops(r, Op::Write)))
                .sum::<u64>(),
            "traffic categories must account for every column issued"
        );
        let mut l2 = HitCounter::default();
        let mut ctc = HitCounter::default();
        for p in &self.l2 {
            l2.hits += p.data.stats.hits;
            l2.misses += p.data.stats.misses;
            ctc.hits += p.ctc.stats.hits;
            ctc.misses += p.ctc.stats.misses;
        }
        self.hit_counters.l2 = l2;
        self.hit_counters.ctc = ctc;
        let mut ledger = EnergyLedger::default();
        for ch in &self.channels {
            ledger.merge(&ch.ledger);
        }
        let device = |rank: Rank| {
            let pj = |e: EnergyEvent| crate::power::fj_to_pj(ledger.get_fj(rank, e));
            DeviceEnergyStats {
                act_pj: pj(EnergyEvent::Act),
                pre_pj: pj(EnergyEvent::Pre),
                rd_pj: pj(EnergyEvent::Rd),
                wr_pj: pj(EnergyEvent::Wr),
                total_pj: crate::power::fj_to_pj(ledger.rank_total_fj(rank)),
            }
        };
        let energy = EnergyStats {
            dram: device(Rank::Dram),
            scm: device(Rank::Scm),
            total_pj: ledger.total_pj(),
            total_fj: ledger.total_fj(),
        };
        let span = cycles.max(1) as f64;
        let per_channel_utilization: Vec<f64> =
            self.channels.iter().map(|c| c.busy_bus_cycles() as f64 / span).collect();
        let utilization = per_channel_utilization.iter().sum::<f64>() / per_channel_utilization.len() as f64;
        let col = self.geo.column_bytes as f64;
        let bandwidth = BandwidthStats {
            utilization,
            gbps: self.traffic.columns() as f64 * col / span,
            peak_gbps: self.channels.len() as f64 * col / self.cfg.dram_timing().bl as f64,
            per_channel_utilization,
        };
        let power = PowerStats {
            budget_watts: self.cfg.power.budget_watts,
            windows: self.timeline.len() as u64,
            throttled_windows: self.timeline.iter().filter(|w| w.throttled_channels > 0).count() as u64,
            engagements: self.monitors.iter().map(|m| m.engagements).sum(),
            mean_watts: watts(ledger.total_fj(), cycles.max(1)),
            max_window_watts: self.timeline.iter().map(|w| w.watts).fold(0.0, f64::max),
        };
        StatsReport {
            schema_version: SCHEMA_VERSION,
            config: self.cfg,
            cycles,
            requests: self.requests,
            traffic: self.traffic,
            hit_rates: HitRates::from(&self.hit_counters),
            counters: self.hit_counters,
            bypass: self.bypass,
            bandwidth,
            energy,
            power,
            timeline: self.timeline,
        }
    }
}
