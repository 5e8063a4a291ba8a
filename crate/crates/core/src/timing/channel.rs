use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Op, Rank, RankTiming, Throttle, TimingParams};
use crate::error::Result;
use crate::power::{EnergyEvent, EnergyLedger, EnergyParams, PrechargeCharge};
use crate::Cycle;

/// One 32 B column access targeted at a rank of this channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnRequest {
    /// Opaque caller token returned on completion.
    pub token: u64,
    pub rank: Rank,
    /// Bank index within the channel (bank_group * banks_per_group + bank).
    pub bank: u32,
    pub row: u32,
    pub column: u32,
    pub op: Op,
    /// Page id charged on activation, if activation counters are tracked.
    pub page: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completion {
    pub token: u64,
    pub arrival: Cycle,
    pub done: Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommandKind {
    Act,
    Pre,
    Rd,
    Wr,
    Ref,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommandRecord {
    pub at: Cycle,
    pub rank: Rank,
    pub bank: u32,
    pub kind: CommandKind,
    pub row: u32,
    /// Last cycle the command occupies the bus (column commands) or the
    /// command cycle itself.
    pub data_end: Cycle,
}

#[derive(Debug, Clone, Copy, Default)]
struct Bank {
    open_row: Option<u32>,
    next_act: Cycle,
    next_col: Cycle,
    next_pre: Cycle,
    busy_until: Cycle,
    dirty_columns: u64,
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    req: ColumnRequest,
    arrival: Cycle,
    seq: u64,
}

/// The command the FR-FCFS scheduler would issue next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledCommand {
    pub token: u64,
    pub kind: CommandKind,
}

#[derive(Debug, Default)]
struct Decision {
    column: Option<usize>,
    row: Option<(usize, CommandKind)>,
    wake: Cycle,
}

/// One memory channel with a DRAM rank and an SCM rank on a shared bus.
#[derive(Debug)]
pub struct Channel {
    pub id: u32,
    timing: [RankTiming; 2],
    energy: EnergyParams,
    banks_per_rank: u32,
    row_bits: u64,
    column_bits: u64,
    banks: Vec<Bank>,
    queue: Vec<Queued>,
    seq: u64,
    bus_free_at: Cycle,
    next_refresh: Option<Cycle>,
    refresh_count: u64,
    starvation_limit: Cycle,
    pub ledger: EnergyLedger,
    completions: BinaryHeap<Reverse<(Cycle, u64, u64, Cycle)>>,
    activations: Vec<(Rank, Option<u64>)>,
    busy_bus_cycles: u64,
    column_ops: [[u64; 2]; 2],
    wake_at: Cycle,
    log: Option<Vec<CommandRecord>>,
}

impl Channel {
    pub fn new(
        id: u32,
        dram: TimingParams,
        scm: TimingParams,
        energy: EnergyParams,
        banks_per_rank: u32,
        row_bytes: u32,
        column_bytes: u32,
    ) -> Self {
        let next_refresh = (dram.refresh_interval > 0).then(|| dram.refresh_interval - dram.refresh_duration);
        Self {
            id,
            timing: [RankTiming::new(Rank::Dram, dram), RankTiming::new(Rank::Scm, scm)],
            energy,
            banks_per_rank,
            row_bits: row_bytes as u64 * 8,
            column_bits: column_bytes as u64 * 8,
            banks: vec![Bank::default(); 2 * banks_per_rank as usize],
            queue: Vec::new(),
            seq: 0,
            bus_free_at: 0,
            next_refresh,
            refresh_count: 0,
            starvation_limit: 10_000,
            ledger: EnergyLedger::default(),
            completions: BinaryHeap::new(),
            activations: Vec::new(),
            busy_bus_cycles: 0,
            column_ops: [[0; 2]; 2],
            wake_at: 0,
            log: None,
        }
    }

    pub fn with_starvation_limit(mut self, limit: Cycle) -> Self {
        self.starvation_limit = limit;
        self
    }

    pub fn enable_log(&mut self) {
        self.log = Some(Vec::new());
    }

    pub fn log(&self) -> &[CommandRecord] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn timing(&self, rank: Rank) -> TimingParams {
        self.timing[rank as usize].effective()
    }

    pub fn set_throttle(&mut self, throttle: Throttle) -> Result<()> {
        self.timing[Rank::Scm as usize].apply_throttle(throttle)?;
        Ok(())
    }

    pub fn throttle(&self) -> Throttle {
        self.timing[Rank::Scm as usize].throttle()
    }

    pub fn enqueue(&mut self, req: ColumnRequest, now: Cycle) {
        debug_assert!(req.bank < self.banks_per_rank);
        self.queue.push(Queued { req, arrival: now, seq: self.seq });
        self.seq += 1;
        self.wake_at = self.wake_at.min(now);
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty() && self.completions.is_empty()
    }

    /// Earliest cycle at which `tick` can make progress.
    pub fn wake_at(&self) -> Cycle {
        if self.queue.is_empty() {
            Cycle::MAX
        } else {
            self.wake_at
        }
    }

    pub fn next_completion(&self) -> Option<Cycle> {
        self.completions.peek().map(|Reverse((t, ..))| *t)
    }

    pub fn pop_completion(&mut self, now: Cycle) -> Option<Completion> {
        match self.completions.peek() {
            Some(Reverse((t, _, _, _))) if *t <= now => {
                let Reverse((done, _, token, arrival)) = self.completions.pop().unwrap();
                Some(Completion { token, arrival, done })
            }
            _ => None,
        }
    }

    pub fn drain_activations(&mut self) -> std::vec::Drain<'_, (Rank, Option<u64>)> {
        self.activations.drain(..)
    }

    pub fn refresh_count(&self) -> u64 {
        self.refresh_count
    }

    pub fn busy_bus_cycles(&self) -> u64 {
        self.busy_bus_cycles
    }

    pub fn column_ops(&self, rank: Rank, op: Op) -> u64 {
        self.column_ops[rank as usize][op as usize]
    }

    pub fn bus_free_at(&self) -> Cycle {
        self.bus_free_at
    }

    pub fn open_row(&self, rank: Rank, bank: u32) -> Option<u32> {
        self.banks[self.bank_index(rank, bank)].open_row
    }

    pub fn bank_busy_until(&self, rank: Rank, bank: u32) -> Cycle {
        self.banks[self.bank_index(rank, bank)].busy_until
    }

    fn bank_index(&self, rank: Rank, bank: u32) -> usize {
        rank as usize * self.banks_per_rank as usize + bank as usize
    }

    fn record(&mut self, at: Cycle, rank: Rank, bank: u32, kind: CommandKind, row: u32, data_end: Cycle) {
        if let Some(log) = self.log.as_mut() {
            log.push(CommandRecord { at, rank, bank, kind, row, data_end });
        }
    }

    fn charge(&mut self, event: EnergyEvent, rank: Rank, bits: u64) {
        if bits > 0 {
            self.ledger.record_energy(&self.energy, event, rank, bits).expect("non-zero bits");
        }
    }

    fn precharge_energy(&mut self, rank: Rank, dirty_columns: u64) {
        match rank {
            Rank::Dram => self.charge(EnergyEvent::Pre, rank, self.row_bits),
            Rank::Scm => {
                if dirty_columns != 0 {
                    let bits = match self.energy.scm_precharge {
                        PrechargeCharge::DirtyColumns => dirty_columns.count_ones() as u64 * self.column_bits,
                        PrechargeCharge::FullRow => self.row_bits,
                    };
                    self.charge(EnergyEvent::Pre, rank, bits);
                }
            }
        }
    }

    /// Refresh windows of the DRAM rank that start at or before `now`;
    /// returns how many were started. SCM never refreshes.
    pub fn refresh_tick(&mut self, now: Cycle) -> u64 {
        let dram = *self.timing[Rank::Dram as usize].base();
        let mut started = 0;
        while let Some(start) = self.next_refresh.filter(|s| *s <= now) {
            let end = start + dram.refresh_duration;
            for b in 0..self.banks_per_rank {
                let i = self.bank_index(Rank::Dram, b);
                let bank = self.banks[i];
                let mut ready = end;
                if let Some(row) = bank.open_row {
                    let pre_at = start.max(bank.next_pre);
                    self.precharge_energy(Rank::Dram, bank.dirty_columns);
                    self.record(pre_at, Rank::Dram, b, CommandKind::Pre, row, pre_at);
                    ready = ready.max(pre_at + dram.rp);
                }
                // all-bank refresh costs about one activate/precharge pair per bank
                self.charge(EnergyEvent::Act, Rank::Dram, self.row_bits);
                self.charge(EnergyEvent::Pre, Rank::Dram, self.row_bits);
                let bank = &mut self.banks[i];
                bank.open_row = None;
                bank.dirty_columns = 0;
                bank.next_act = bank.next_act.max(ready);
                bank.busy_until = bank.busy_until.max(ready);
            }
            self.record(start, Rank::Dram, 0, CommandKind::Ref, 0, end);
            self.refresh_count += 1;
            started += 1;
            self.next_refresh = Some(start + dram.refresh_interval);
        }
        started
    }

    /// FR-FCFS: among issuable commands, column accesses to open rows win over
    /// row commands; within a class, starved requests first, then oldest.
    fn decide(&self, now: Cycle) -> Decision {
        let mut d = Decision { wake: Cycle::MAX, ..Default::default() };
        let mut has_hit: u128 = 0;
        let mut any_starved = false;
        // oldest starved conflicting request per bank; younger hits to that
        // bank are held back so its precharge can issue
        let mut starved_conflict: Vec<(usize, u64)> = Vec::new();
        for q in &self.queue {
            let bi = self.bank_index(q.req.rank, q.req.bank);
            let bank = &self.banks[bi];
            let starved = now.saturating_sub(q.arrival) >= self.starvation_limit;
            any_starved |= starved;
            match bank.open_row {
                Some(r) if r == q.req.row => has_hit |= 1u128 << bi,
                Some(_) if starved && !starved_conflict.iter().any(|&(b, _)| b == bi) => {
                    starved_conflict.push((bi, q.seq));
                }
                _ => {}
            }
        }
        if !starved_conflict.is_empty() {
            has_hit = 0;
            for q in &self.queue {
                let bi = self.bank_index(q.req.rank, q.req.bank);
                if self.banks[bi].open_row == Some(q.req.row)
                    && !starved_conflict.iter().any(|&(b, seq)| b == bi && seq < q.seq)
                {
                    has_hit |= 1u128 << bi;
                }
            }
        }
        // The queue is in arrival order, so without starvation the first
        // ready candidate is also the oldest.
        let cl = [self.timing[0].effective().cl, self.timing[1].effective().cl];
        let mut best_col: Option<(bool, u64, usize)> = None;
        for (i, q) in self.queue.iter().enumerate() {
            let bi = self.bank_index(q.req.rank, q.req.bank);
            if has_hit & (1u128 << bi) == 0 {
                continue;
            }
            let bank = &self.banks[bi];
            if bank.open_row != Some(q.req.row) {
                continue;
            }
            if starved_conflict.iter().any(|&(b, seq)| b == bi && seq < q.seq) {
                continue;
            }
            let ready = bank.next_col.max(self.bus_free_at.saturating_sub(cl[q.req.rank as usize]));
            if ready <= now {
                let starved = now.saturating_sub(q.arrival) >= self.starvation_limit;
                let key = (!starved, q.seq, i);
                if best_col.is_none_or(|b| key < b) {
                    best_col = Some(key);
                }
                if !any_starved {
                    break;
                }
            } else {
                d.wake = d.wake.min(ready);
            }
        }
        d.column = best_col.map(|(_, _, i)| i);
        let col_bank = d.column.map(|i| {
            let r = &self.queue[i].req;
            self.bank_index(r.rank, r.bank)
        });

        let mut best_row: Option<((bool, u64, usize), CommandKind)> = None;
        for (i, q) in self.queue.iter().enumerate() {
            let bi = self.bank_index(q.req.rank, q.req.bank);
            let bank = &self.banks[bi];
            if bank.open_row == Some(q.req.row) || Some(bi) == col_bank {
                continue;
            }
            let starved = now.saturating_sub(q.arrival) >= self.starvation_limit;
            let (ready, kind) = match bank.open_row {
                None => (bank.next_act, CommandKind::Act),
                Some(_) => {
                    // hits left in has_hit are older than any starved conflict;
                    // precharging first livelocks once throttled tRCD exceeds tRAS
                    if has_hit & (1u128 << bi) != 0 {
                        continue;
                    }
                    (bank.next_pre, CommandKind::Pre)
                }
            };
            if ready <= now {
                let key = (!starved, q.seq, i);
                if best_row.is_none_or(|(b, _)| key < b) {
                    best_row = Some((key, kind));
                }
                if !any_starved {
                    break;
                }
            } else {
                d.wake = d.wake.min(ready);
            }
        }
        d.row = best_row.map(|((_, _, i), k)| (i, k));
        d
    }

    /// Next command the scheduler would issue at `now`, column commands first.
    pub fn schedule_frfcfs(&self, now: Cycle) -> Option<ScheduledCommand> {
        let d = self.decide(now);
        if let Some(i) = d.column {
            let r = &self.queue[i].req;
            let kind = if r.op == Op::Read { CommandKind::Rd } else { CommandKind::Wr };
            return Some(ScheduledCommand { token: r.token, kind });
        }
        d.row.map(|(i, kind)| ScheduledCommand { token: self.queue[i].req.token, kind })
    }

    /// Advance the channel at cycle `now`, issuing at most one column command
    /// and one row command.
    pub fn tick(&mut self, now: Cycle) {
        self.refresh_tick(now);
        if self.queue.is_empty() || now < self.wake_at {
            return;
        }
        let d = self.decide(now);
        let mut issued = false;
        let mut removed: Option<usize> = None;
        if let Some(i) = d.column {
            self.issue_column(i, now);
            removed = Some(i);
            issued = true;
        }
        if let Some((i, kind)) = d.row {
            self.issue_row(i, kind, now);
            issued = true;
        }
        if let Some(i) = removed {
            self.queue.remove(i);
        }
        self.wake_at = if issued { now + 1 } else { d.wake.max(now + 1) };
        if let Some(next) = self.next_refresh {
            self.wake_at = self.wake_at.min(next.max(now + 1));
        }
    }

    fn issue_column(&mut self, i: usize, now: Cycle) {
        let q = self.queue[i];
        let t = self.timing(q.req.rank);
        let data_start = now + t.cl;
        let data_end = data_start + t.bl;
        debug_assert!(self.bus_free_at <= data_start);
        self.bus_free_at = data_end;
        self.busy_bus_cycles += t.bl;
        let bi = self.bank_index(q.req.rank, q.req.bank);
        let bank = &mut self.banks[bi];
        let kind = match q.req.op {
            Op::Read => {
                bank.next_pre = bank.next_pre.max(now + t.bl);
                CommandKind::Rd
            }
            Op::Write => {
                bank.next_pre = bank.next_pre.max(data_end + t.wr);
                bank.dirty_columns |= 1u64 << (q.req.column % 64);
                CommandKind::Wr
            }
        };
        bank.busy_until = bank.busy_until.max(data_end);
        self.column_ops[q.req.rank as usize][q.req.op as usize] += 1;
        let event = if q.req.op == Op::Read { EnergyEvent::Rd } else { EnergyEvent::Wr };
        self.charge(event, q.req.rank, self.column_bits);
        self.record(now, q.req.rank, q.req.bank, kind, q.req.row, data_end);
        self.completions.push(Reverse((data_end, q.seq, q.req.token, q.arrival)));
    }

    fn issue_row(&mut self, i: usize, kind: CommandKind, now: Cycle) {
        let q = self.queue[i];
        let t = self.timing(q.req.rank);
        let bi = self.bank_index(q.req.rank, q.req.bank);
        match kind {
            CommandKind::Act => {
                let bank = &mut self.banks[bi];
                bank.open_row = Some(q.req.row);
                bank.next_col = now + t.rcd;
                bank.next_pre = bank.next_pre.max(now + t.ras);
                bank.busy_until = bank.busy_until.max(now + t.rcd);
                self.charge(EnergyEvent::Act, q.req.rank, self.row_bits);
                self.activations.push((q.req.rank, q.req.page));
                self.record(now, q.req.rank, q.req.bank, kind, q.req.row, now);
            }
            CommandKind::Pre => {
                let bank = self.banks[bi];
                let old = bank.open_row.expect("precharge of an open bank");
                self.precharge_energy(q.req.rank, bank.dirty_columns);
                let bank = &mut self.banks[bi];
                bank.open_row = None;
                bank.dirty_columns = 0;
                bank.next_act = now + t.rp;
                bank.busy_until = bank.busy_until.max(now + t.rp);
                self.record(now, q.req.rank, q.req.bank, kind, old, now);
            }
            _ => unreachable!("row command"),
        }
    }

    /// Run until every queued request has completed; returns the completions
    /// in completion order. Intended for device-level experiments and tests.
    pub fn drain(&mut self, mut now: Cycle) -> (Cycle, Vec<Completion>) {
        let mut out = Vec::new();
        while !self.is_idle() {
            self.tick(now);
            while let Some(c) = self.pop_completion(now) {
                out.push(c);
            }
            if self.is_idle() {
                break;
            }
            let next = self.wake_at().min(self.next_completion().unwrap_or(Cycle::MAX));
            now = next.max(now + 1);
        }
        (now, out)
    }
}
