use std::collections::HashMap;

/// Data values held by each device, keyed by device-local sector address.
/// Every write stores a fresh value, so a stale read shows up as a mismatch
/// against the program-order shadow copy. Absent keys hold 0.
#[derive(Debug, Default)]
pub(crate) struct Functional {
    shadow: HashMap<u64, u64>,
    pub dram: HashMap<u64, u64>,
    pub scm: HashMap<u64, u64>,
    next_value: u64,
    pub checks: u64,
    pub mismatches: u64,
}

pub(crate) fn load(map: &HashMap<u64, u64>, addr: u64) -> u64 {
    map.get(&addr).copied().unwrap_or(0)
}

pub(crate) fn store(map: &mut HashMap<u64, u64>, addr: u64, value: u64) {
    if value == 0 {
        map.remove(&addr);
    } else {
        map.insert(addr, value);
    }
}

impl Functional {
    /// New value for a program-order write to `addr`.
    pub fn write(&mut self, addr: u64) -> u64 {
        self.next_value += 1;
        self.shadow.insert(addr, self.next_value);
        self.next_value
    }

    pub fn expected(&self, addr: u64) -> u64 {
        load(&self.shadow, addr)
    }

    pub fn check(&mut self, expected: u64, got: u64) {
        self.checks += 1;
        if expected != got {
            self.mismatches += 1;
        }
    }

    pub fn scm_to_dram(&mut self, scm_addr: u64, dram_addr: u64) {
        let v = load(&self.scm, scm_addr);
        store(&mut self.dram, dram_addr, v);
    }

    pub fn dram_to_scm(&mut self, dram_addr: u64, scm_addr: u64) {
        let v = load(&self.dram, dram_addr);
        store(&mut self.scm, scm_addr, v);
    }
}
