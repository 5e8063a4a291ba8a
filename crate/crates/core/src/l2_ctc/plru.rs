/// Tree pseudo-LRU over `ways` leaves. Way counts that are not a power of two
/// use the next power-of-two tree and never select a missing leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreePlru {
    ways: usize,
    leaves: usize,
    /// Node i's bit: 0 = victim on the left, 1 = victim on the right.
    bits: u64,
}

impl TreePlru {
    pub fn new(ways: usize) -> Self {
        assert!((1..=64).contains(&ways), "tree PLRU supports 1..=64 ways");
        Self { ways, leaves: ways.next_power_of_two(), bits: 0 }
    }

    pub fn ways(&self) -> usize {
        self.ways
    }

    pub fn state(&self) -> u64 {
        self.bits
    }

    /// Mark `way` most recently used: every node on its path points away.
    pub fn touch(&mut self, way: usize) {
        debug_assert!(way < self.ways);
        let (mut node, mut lo, mut hi) = (0usize, 0usize, self.leaves);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if way < mid {
                self.bits |= 1 << node;
                node = 2 * node + 1;
                hi = mid;
            } else {
                self.bits &= !(1 << node);
                node = 2 * node + 2;
                lo = mid;
            }
        }
    }

    pub fn victim(&self) -> usize {
        let (mut node, mut lo, mut hi) = (0usize, 0usize, self.leaves);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let right = self.bits >> node & 1 == 1 && mid < self.ways;
            if right {
                node = 2 * node + 2;
                lo = mid;
            } else {
                node = 2 * node + 1;
                hi = mid;
            }
        }
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_way_trace() {
        let mut p = TreePlru::new(4);
        assert_eq!(p.victim(), 0);
        p.touch(0);
        assert_eq!(p.victim(), 2);
        p.touch(2);
        assert_eq!(p.victim(), 1);
        p.touch(1);
        assert_eq!(p.victim(), 3);
        p.touch(3);
        assert_eq!(p.victim(), 0);
    }

    #[test]
    fn sequential_touches_cycle_through_all_ways() {
        for ways in [4, 8, 16] {
            let mut p = TreePlru::new(ways);
            let mut seen = vec![false; ways];
            for _ in 0..ways {
                let v = p.victim();
                assert!(v < ways);
                assert!(!seen[v], "way {v} chosen twice with {ways} ways");
                seen[v] = true;
                p.touch(v);
            }
        }
    }

    #[test]
    fn unbalanced_tree_reaches_every_way() {
        let mut p = TreePlru::new(12);
        let mut seen = [false; 12];
        for _ in 0..24 {
            let v = p.victim();
            seen[v] = true;
            p.touch(v);
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn most_recent_is_never_victim() {
        let mut p = TreePlru::new(12);
        for w in [3, 7, 11, 0, 5, 9, 1] {
            p.touch(w);
            assert_ne!(p.victim(), w);
        }
    }
}
