/// Page granularity of the activation counters.
pub const PAGE_BYTES: u64 = 2 << 20;

/// 8-bit per-page activation counters. On saturation all counters are
/// halved and the 3-bit shift register advances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageActivationTable {
    counters: Vec<u8>,
    msb_shift: u8,
    max_counter: u8,
    enabled: bool,
}

impl PageActivationTable {
    pub fn new(pages: usize, enabled: bool) -> Self {
        Self { counters: vec![0; pages], msb_shift: 0, max_counter: 0, enabled }
    }

    pub fn for_capacity(bytes: u64, enabled: bool) -> Self {
        Self::new(bytes.div_ceil(PAGE_BYTES) as usize, enabled)
    }

    pub fn page_of(addr: u64) -> u64 {
        addr / PAGE_BYTES
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn pages(&self) -> usize {
        self.counters.len()
    }

    pub fn raw(&self, page: u64) -> u8 {
        self.counters[page as usize]
    }

    pub fn max_counter(&self) -> u8 {
        self.max_counter
    }

    pub fn msb_shift(&self) -> u8 {
        self.msb_shift
    }

    /// Counter value used in scores: the raw count, or 1 when disabled.
    pub fn value(&self, page: u64) -> u32 {
        if self.enabled {
            self.counters[page as usize] as u32
        } else {
            1
        }
    }

    /// Probability of decrementing a victim's affinity after a bypassed
    /// access to `page`.
    pub fn p_dec(&self, page: u64) -> f64 {
        if !self.enabled || self.max_counter == 0 {
            return 1.0;
        }
        (self.counters[page as usize] as f64 / self.max_counter as f64).clamp(0.0, 1.0)
    }

    pub fn bump_activation_counter(&mut self, page: u64) {
        if !self.enabled {
            return;
        }
        let p = page as usize;
        if self.counters[p] == u8::MAX {
            for c in self.counters.iter_mut() {
                *c >>= 1;
            }
            self.msb_shift = (self.msb_shift + 1) & 0x7;
            self.max_counter = self.counters.iter().copied().max().unwrap_or(0);
        }
        self.counters[p] += 1;
        self.max_counter = self.max_counter.max(self.counters[p]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn increments() {
        let mut t = PageActivationTable::new(4, true);
        t.bump_activation_counter(2);
        assert_eq!(t.raw(2), 1);
        assert_eq!(t.max_counter(), 1);
    }

    #[test]
    fn saturation_halves_everything() {
        let mut t = PageActivationTable::new(4, true);
        for _ in 0..255 {
            t.bump_activation_counter(0);
        }
        for _ in 0..10 {
            t.bump_activation_counter(1);
        }
        assert_eq!(t.raw(0), 255);
        t.bump_activation_counter(0);
        assert_eq!(t.raw(0), 128);
        assert_eq!(t.raw(1), 5);
        assert_eq!(t.msb_shift(), 1);
        assert_eq!(t.max_counter(), 128);
    }

    #[test]
    fn disabled_counts_as_one() {
        let mut t = PageActivationTable::new(4, false);
        t.bump_activation_counter(0);
        assert_eq!(t.raw(0), 0);
        assert_eq!(t.value(0), 1);
        assert_eq!(t.p_dec(0), 1.0);
    }

    proptest! {
        #[test]
        fn max_dominates_every_counter(pages in proptest::collection::vec(0u64..8, 0..2000)) {
            let mut t = PageActivationTable::new(8, true);
            for p in pages {
                t.bump_activation_counter(p);
                for q in 0..8 {
                    prop_assert!(t.max_counter() >= t.raw(q));
                    let pd = t.p_dec(q);
                    prop_assert!((0.0..=1.0).contains(&pd));
                }
            }
        }
    }
}
