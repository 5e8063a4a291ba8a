//! DRAM cache controller: tag lookup through the tag cache, MSHR tracking of
//! misses and the fill/bypass decision once a miss drains.

use super::*;
use crate::bypass::FillDecision;
use crate::dram_cache::{
    cacheable_columns, ctc_sector_decode, ctc_sector_encode, evict_line, fill_line, metadata_column_address,
    metadata_update_ops, probe_ops, LineMeta, MshrOutcome,
};
use crate::geometry::AddressDecomposition;
use crate::l2_ctc::CtcWriteback;

impl Simulator {
    pub(super) fn process_cache(&mut self, c: usize, req: MemReq, now: Cycle) {
        self.process_cache_inner(c, req, now, false);
    }

    fn process_cache_inner(&mut self, c: usize, req: MemReq, now: Cycle, resumed: bool) {
        let idx = self.geo.dram_cache_index(req.addr).expect("validated address");
        let page = PageActivationTable::page_of(req.addr);
        if !resumed {
            *self.page_accesses.entry(page).or_insert(0) += 1;
        }
        if idx.is_metadata_column() {
            self.requests.uncacheable += 1;
            let category = match req.op {
                Op::Read => Category::DemandScmRd,
                Op::Write => Category::DemandScmWr,
            };
            self.scm_functional(req);
            let op = PlannedOp { op: ColumnOp { rank: Rank::Scm, addr: req.addr, op: req.op, category }, page };
            self.spawn(vec![vec![op]], req.notify.into_iter().collect(), now);
            return;
        }
        let line = req.addr >> self.line_shift;
        if let Some(e) = self.entries.get(&line) {
            let generation = e.generation;
            self.mshrs[c].insert_or_merge(line, idx.sector, req.op).expect("sector within line");
            self.record_cache_access(req.op, false);
            self.scm_functional(req);
            let op = PlannedOp { op: scm_demand(req), page };
            let notify = req.notify.into_iter().chain([Notify::EntryDemand(line, generation)]).collect();
            self.spawn(vec![vec![op]], notify, now);
            return;
        }
        let (set, tag) = (idx.set, idx.tag);
        let hit = self.store.is_hit(set, tag);
        if !hit && (self.mshrs[c].is_full() || (!resumed && !self.stalled[c].is_empty())) {
            if !resumed {
                self.requests.mshr_stalls += 1;
            }
            self.stalled[c].push_back(req);
            return;
        }
        self.record_cache_access(req.op, hit);
        let row = self.geo.row_id_of_set(set);
        let dram_addr = self.geo.dram_address_of(set, idx.sector);
        let mut own_probe = Vec::new();
        let mut wait = false;
        let probed;
        if self.l2[c].ctc.enabled() {
            if self.l2[c].ctc.ctc_lookup(row).is_some() {
                wait = self.probes.contains_key(&(c, row));
                probed = wait;
            } else {
                self.start_probe(c, set, row, page, now);
                wait = true;
                probed = true;
            }
        } else {
            probed = true;
            let ops = match self.layout {
                Layout::Tad if hit && req.op == Op::Read => Vec::new(),
                Layout::Tad => {
                    vec![ColumnOp { rank: Rank::Dram, addr: dram_addr, op: Op::Read, category: Category::Probe }]
                }
                Layout::Amil => probe_ops(&self.geo, set, Layout::Amil),
            };
            own_probe = ops.into_iter().map(|op| PlannedOp { op, page }).collect();
        }
        let (demand, follow) = if hit {
            let category = match req.op {
                Op::Read => {
                    let got = functional::load(&self.func.dram, dram_addr);
                    self.read_done(req, got);
                    Category::DemandDramRd
                }
                Op::Write => {
                    functional::store(&mut self.func.dram, dram_addr, req.value);
                    self.mark_dirty(c, set, row, page, now);
                    Category::DemandDramWr
                }
            };
            let generation = self.next_generation;
            let h = self.hits.entry(line).or_insert(HitTrack { channel: c, mask: 0, write: false, generation });
            if h.generation == generation {
                self.next_generation += 1;
            }
            h.mask |= 1 << idx.sector;
            h.write |= req.op == Op::Write;
            let generation = h.generation;
            (ColumnOp { rank: Rank::Dram, addr: dram_addr, op: req.op, category }, Notify::HitDemand(line, generation))
        } else {
            let outcome = self.mshrs[c].insert_or_merge(line, idx.sector, req.op).expect("sector within line");
            debug_assert_eq!(outcome, MshrOutcome::NewMiss);
            let generation = self.next_generation;
            self.next_generation += 1;
            self.entries
                .insert(line, Entry { channel: c, set, tag, page, generation, meta_read: probed, pending: None });
            self.scm_functional(req);
            (scm_demand(req), Notify::EntryDemand(line, generation))
        };
        let mut phases = Vec::new();
        if !own_probe.is_empty() {
            phases.push(own_probe);
        }
        phases.push(vec![PlannedOp { op: demand, page }]);
        let notify = req.notify.into_iter().chain([follow]).collect();
        if wait {
            let t = self.spawn_waiting(phases, notify);
            self.probes.get_mut(&(c, row)).expect("probe in flight").push(t);
        } else {
            self.spawn(phases, notify, now);
        }
    }

    fn record_cache_access(&mut self, op: Op, hit: bool) {
        match op {
            Op::Read => self.hit_counters.dram_cache_read.record(hit),
            Op::Write => self.hit_counters.dram_cache_write.record(hit),
        }
    }

    fn scm_functional(&mut self, req: MemReq) {
        match req.op {
            Op::Read => {
                let got = functional::load(&self.func.scm, req.addr);
                self.read_done(req, got);
            }
            Op::Write => functional::store(&mut self.func.scm, req.addr, req.value),
        }
    }

    /// Read the row's metadata into the tag cache.
    fn start_probe(&mut self, c: usize, set: u64, row: u64, page: u64, now: Cycle) {
        let stored = self.store.stored_row(set);
        debug_assert!(stored
            .lines
            .iter()
            .zip(self.store.current_row(set).lines.iter())
            .all(|(s, cur)| s.same_tag_state(cur)));
        for wb in self.l2[c].ctc.ctc_fill(row, ctc_sector_encode(&stored)) {
            self.ctc_writeback(c, wb, now);
        }
        let ops = probe_ops(&self.geo, set, self.layout).into_iter().map(|op| PlannedOp { op, page }).collect();
        self.probes.insert((c, row), Vec::new());
        self.spawn(vec![ops], vec![Notify::Probe(c, row)], now);
    }

    /// A dirty tag-cache sector left the cache: read-modify-write of the
    /// row's metadata column.
    fn ctc_writeback(&mut self, c: usize, wb: CtcWriteback, now: Cycle) {
        let set = self.set_of_row(c, wb.row);
        let meta = ctc_sector_decode(wb.word, &self.store.stored_row(set));
        self.store.write_back_tags(set, &meta);
        let page = PageActivationTable::page_of(self.geo.home_address_of(set, 0, 0));
        let phases = metadata_update_ops(&self.geo, set, self.layout, false)
            .into_iter()
            .map(|op| vec![PlannedOp { op, page }])
            .collect();
        self.spawn(phases, Vec::new(), now);
    }

    /// First cache set of a channel-local DRAM row id.
    fn set_of_row(&self, c: usize, row_id: u64) -> u64 {
        let bpc = self.geo.banks_per_channel() as u64;
        let flat = (row_id % bpc) as u32;
        let d = AddressDecomposition {
            channel: c as u32,
            bank_group: flat / self.geo.banks_per_group,
            bank: flat % self.geo.banks_per_group,
            row: (row_id / bpc) as u32,
            column: 0,
            byte_offset: 0,
        };
        self.geo.compose(&d) / self.geo.cacheline_bytes as u64
    }

    fn sync_ctc(&mut self, c: usize, set: u64, row: u64) {
        let word = ctc_sector_encode(&self.store.current_row(set));
        self.l2[c].ctc.ctc_sync(row, word);
    }

    /// First write to a clean cached line.
    fn mark_dirty(&mut self, c: usize, set: u64, row: u64, page: u64, now: Cycle) {
        let mut cur = self.store.line(set);
        if cur.dirty {
            return;
        }
        cur.dirty = true;
        self.store.set_line(set, cur);
        if self.layout == Layout::Tad {
            // the tag bits travel with the data write
            self.store.persist_line(set);
            self.sync_ctc(c, set, row);
            return;
        }
        let word = ctc_sector_encode(&self.store.current_row(set));
        if self.l2[c].ctc.ctc_update(row, word) {
            return;
        }
        self.store.persist_line(set);
        let phases = metadata_update_ops(&self.geo, set, self.layout, false)
            .into_iter()
            .map(|op| vec![PlannedOp { op, page }])
            .collect();
        self.spawn(phases, Vec::new(), now);
    }

    /// The first demand of a miss returned: start its fill decision.
    pub(super) fn retire_entry(&mut self, line: u64, now: Cycle) {
        let e = self.entries[&line];
        let m = *self.mshrs[e.channel].get(line).expect("MSHR entry of a live miss");
        let victim = self.store.line(e.set);
        let counter = self.counters.value(e.page);
        let accesses = self.page_accesses.get(&e.page).copied().unwrap_or(0);
        let pending = self.policies[e.channel].begin(m.columns(), m.is_write, counter, accesses, &mut self.rng);
        let needs_read = self.policies[e.channel].needs_victim_affinity(&pending, &victim) && !e.meta_read;
        let entry = self.entries.get_mut(&line).expect("entry");
        entry.pending = Some(pending);
        if !needs_read {
            self.finish_entry(line, now);
            return;
        }
        entry.meta_read = true;
        self.bypass.affinity_reads += 1;
        let addr = match self.layout {
            Layout::Amil => metadata_column_address(&self.geo, e.set),
            Layout::Tad => self.geo.dram_address_of(e.set, 0),
        };
        let op = PlannedOp {
            op: ColumnOp { rank: Rank::Dram, addr, op: Op::Read, category: Category::Probe },
            page: e.page,
        };
        self.spawn(vec![vec![op]], vec![Notify::Affinity(line)], now);
    }

    pub(super) fn finish_entry(&mut self, line: u64, now: Cycle) {
        let e = self.entries[&line];
        let pending = e.pending.expect("decision in progress");
        let victim = self.store.line(e.set);
        let p_dec = self.counters.p_dec(e.page);
        let outcome = self.policies[e.channel].finish(pending, &victim, p_dec, &mut self.rng);
        self.bypass.decisions += 1;
        match outcome.decision {
            FillDecision::BypassFirstLevel => self.bypass.first_level_bypass += 1,
            FillDecision::FillInvalid | FillDecision::FillReplace => {
                if outcome.decision == FillDecision::FillInvalid {
                    self.bypass.fill_invalid += 1;
                } else {
                    self.bypass.fill_replace += 1;
                }
                self.apply_fill(&e, victim, outcome.affinity_level, now);
            }
            FillDecision::NoReplace { decremented } => {
                self.bypass.no_replace += 1;
                if decremented {
                    self.bypass.decremented += 1;
                    self.decrement(&e, victim, now);
                }
            }
        }
        self.mshrs[e.channel].remove(line);
        self.entries.remove(&line);
        self.resume_stalled(e.channel, now);
    }

    fn apply_fill(&mut self, e: &Entry, victim: LineMeta, level: u8, now: Cycle) {
        let geo = self.geo;
        let set = e.set;
        let mut first = Vec::new();
        let mut second = Vec::new();
        let mut place = |op: ColumnOp, page: u64| match op.op {
            Op::Read => first.push(PlannedOp { op, page }),
            Op::Write => second.push(PlannedOp { op, page }),
        };
        if victim.valid && victim.dirty {
            let vpage = PageActivationTable::page_of(geo.home_address_of(set, victim.tag, 0));
            for op in evict_line(&geo, set, victim) {
                place(op, vpage);
            }
        }
        for op in fill_line(&geo, set, e.tag) {
            place(op, e.page);
        }
        for op in metadata_update_ops(&geo, set, self.layout, e.meta_read) {
            place(op, e.page);
        }
        let n = cacheable_columns(&geo, set);
        if victim.valid && victim.dirty {
            for col in 0..n {
                self.func.dram_to_scm(geo.dram_address_of(set, col), geo.home_address_of(set, victim.tag, col));
            }
        }
        for col in 0..n {
            self.func.scm_to_dram(geo.home_address_of(set, e.tag, col), geo.dram_address_of(set, col));
        }
        self.store.set_line(set, LineMeta::new(e.tag, true, false, level.min(3)));
        self.store.persist_line(set);
        self.sync_ctc(e.channel, set, geo.row_id_of_set(set));
        self.spawn(vec![first, second], Vec::new(), now);
    }

    fn decrement(&mut self, e: &Entry, victim: LineMeta, now: Cycle) {
        let set = e.set;
        let mut v = victim;
        v.affinity -= 1;
        self.store.set_line(set, v);
        self.store.persist_line(set);
        self.sync_ctc(e.channel, set, self.geo.row_id_of_set(set));
        let ops = match self.layout {
            Layout::Amil => metadata_update_ops(&self.geo, set, Layout::Amil, e.meta_read),
            Layout::Tad => vec![ColumnOp {
                rank: Rank::Dram,
                addr: self.geo.dram_address_of(set, 0),
                op: Op::Write,
                category: Category::MetadataWriteback,
            }],
        };
        let phases = ops.into_iter().map(|op| vec![PlannedOp { op, page: e.page }]).collect();
        self.spawn(phases, Vec::new(), now);
    }

    fn resume_stalled(&mut self, c: usize, now: Cycle) {
        while !self.mshrs[c].is_full() {
            let Some(req) = self.stalled[c].pop_front() else { break };
            self.process_cache_inner(c, req, now, true);
        }
    }
}

fn scm_demand(req: MemReq) -> ColumnOp {
    let category = match req.op {
        Op::Read => Category::DemandScmRd,
        Op::Write => Category::DemandScmWr,
    };
    ColumnOp { rank: Rank::Scm, addr: req.addr, op: req.op, category }
}
