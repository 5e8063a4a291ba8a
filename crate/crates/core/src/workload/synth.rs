use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use super::trace::{TraceRecord, SECTOR_BYTES};
use crate::error::{Error, Result};
use crate::timing::Op;

/// Granularity of Zipf ranks: one rank per 256 B line.
pub const ZIPF_LINE_BYTES: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticPattern {
    StreamingRead,
    StreamingWrite,
    RandomRead,
    RandomWrite,
    MixedRandom {
        write_fraction: f64,
    },
    /// Zipf-ranked 256 B lines; rank r maps to line r, so the hottest lines
    /// sit at the bottom of the address span.
    ZipfHotCold {
        alpha: f64,
        write_fraction: f64,
    },
    Strided {
        stride: u64,
    },
}

impl SyntheticPattern {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SyntheticPattern::MixedRandom { write_fraction } => check_fraction(write_fraction),
            SyntheticPattern::ZipfHotCold { alpha, write_fraction } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::Workload(format!("zipf alpha must be positive, got {alpha}")));
                }
                check_fraction(write_fraction)
            }
            SyntheticPattern::Strided { stride } => {
                if stride == 0 || stride % SECTOR_BYTES != 0 {
                    return Err(Error::Workload(format!("stride {stride} must be a positive multiple of 32")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::Workload(format!("write fraction {f} outside [0, 1]")))
    }
}

/// Deterministic record generator.
#[derive(Debug, Clone)]
pub struct Generator {
    pattern: SyntheticPattern,
    rng: ChaCha8Rng,
    zipf: Option<Zipf<f64>>,
    span: u64,
    streams: u32,
    length: u64,
    next: u64,
}

/// Records of `pattern` over `[0, span)`, spread round-robin over `streams`.
pub fn generate(pattern: SyntheticPattern, seed: u64, length: u64, span: u64, streams: u32) -> Result<Generator> {
    pattern.validate()?;
    if length == 0 {
        return Err(Error::Workload("length must be positive".into()));
    }
    if span < SECTOR_BYTES || !span.is_multiple_of(SECTOR_BYTES) {
        return Err(Error::Workload(format!("span {span} must be a positive multiple of 32")));
    }
    if streams == 0 {
        return Err(Error::Workload("at least one stream is required".into()));
    }
    let zipf = match pattern {
        SyntheticPattern::ZipfHotCold { alpha, .. } => {
            let lines = (span / ZIPF_LINE_BYTES).max(1);
            Some(Zipf::new(lines as f64, alpha).map_err(|e| Error::Workload(e.to_string()))?)
        }
        _ => None,
    };
    Ok(Generator { pattern, rng: ChaCha8Rng::seed_from_u64(seed), zipf, span, streams, length, next: 0 })
}

impl Generator {
    fn uniform_sector(&mut self) -> u64 {
        self.rng.random_range(0..self.span / SECTOR_BYTES) * SECTOR_BYTES
    }

    fn op_with(&mut self, write_fraction: f64) -> Op {
        if self.rng.random::<f64>() < write_fraction {
            Op::Write
        } else {
            Op::Read
        }
    }
}

impl Iterator for Generator {
    type Item = TraceRecord;

    fn next(&mut self) -> Option<TraceRecord> {
        if self.next >= self.length {
            return None;
        }
        let i = self.next;
        self.next += 1;
        let sequential = (i * SECTOR_BYTES) % self.span;
        let (op, addr) = match self.pattern {
            SyntheticPattern::StreamingRead => (Op::Read, sequential),
            SyntheticPattern::StreamingWrite => (Op::Write, sequential),
            SyntheticPattern::RandomRead => (Op::Read, self.uniform_sector()),
            SyntheticPattern::RandomWrite => (Op::Write, self.uniform_sector()),
            SyntheticPattern::MixedRandom { write_fraction } => {
                let addr = self.uniform_sector();
                (self.op_with(write_fraction), addr)
            }
            SyntheticPattern::ZipfHotCold { write_fraction, .. } => {
                let rank = self.zipf.as_ref().expect("zipf sampler").sample(&mut self.rng) as u64;
                let sector = self.rng.random_range(0..ZIPF_LINE_BYTES / SECTOR_BYTES);
                let addr = ((rank - 1) * ZIPF_LINE_BYTES + sector * SECTOR_BYTES) % self.span;
                (self.op_with(write_fraction), addr)
            }
            SyntheticPattern::Strided { stride } => (Op::Read, (i * stride) % self.span),
        };
        Some(TraceRecord::sector((i % self.streams as u64) as u32, op, addr))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.length - self.next) as usize;
        (n, Some(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPAN: u64 = 256 << 20;

    #[test]
    fn streaming_walks_consecutive_sectors() {
        let g = generate(SyntheticPattern::StreamingRead, 1, 4, SPAN, 1).unwrap();
        let addrs: Vec<u64> = g.map(|r| r.addr).collect();
        assert_eq!(addrs, vec![0x0, 0x20, 0x40, 0x60]);
    }

    #[test]
    fn streaming_wraps_at_span() {
        let g = generate(SyntheticPattern::StreamingWrite, 1, 5, 128, 2).unwrap();
        let recs: Vec<TraceRecord> = g.collect();
        assert_eq!(recs[4].addr, 0);
        assert_eq!(recs[3].stream, 1);
        assert!(recs.iter().all(|r| r.op == Op::Write));
    }

    #[test]
    fn same_seed_same_stream() {
        let p = SyntheticPattern::MixedRandom { write_fraction: 0.3 };
        let a: Vec<_> = generate(p, 9, 1000, SPAN, 4).unwrap().collect();
        let b: Vec<_> = generate(p, 9, 1000, SPAN, 4).unwrap().collect();
        let c: Vec<_> = generate(p, 10, 1000, SPAN, 4).unwrap().collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_stays_in_span_and_aligned() {
        for r in generate(SyntheticPattern::RandomRead, 3, 10_000, 1 << 20, 1).unwrap() {
            assert!(r.addr < 1 << 20);
            assert_eq!(r.addr % 32, 0);
        }
    }

    #[test]
    fn strided() {
        let g = generate(SyntheticPattern::Strided { stride: 4096 }, 0, 3, SPAN, 1).unwrap();
        assert_eq!(g.map(|r| r.addr).collect::<Vec<_>>(), vec![0, 4096, 8192]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate(SyntheticPattern::MixedRandom { write_fraction: 1.1 }, 0, 1, SPAN, 1).is_err());
        assert!(generate(SyntheticPattern::ZipfHotCold { alpha: 0.0, write_fraction: 0.5 }, 0, 1, SPAN, 1).is_err());
        assert!(generate(SyntheticPattern::Strided { stride: 48 }, 0, 1, SPAN, 1).is_err());
        assert!(generate(SyntheticPattern::StreamingRead, 0, 0, SPAN, 1).is_err());
        assert!(generate(SyntheticPattern::StreamingRead, 0, 1, 40, 1).is_err());
    }

    /// Fraction of Zipf(alpha) mass on the first `k` of `n` ranks, summed directly.
    fn zipf_head_mass(n: u64, k: u64, alpha: f64) -> f64 {
        let w = |r: u64| (r as f64).powf(-alpha);
        let head: f64 = (1..=k).map(w).sum();
        let total: f64 = head + (k + 1..=n).map(w).sum::<f64>();
        head / total
    }

    #[test]
    fn zipf_concentrates_on_hot_set() {
        let alpha = 1.2;
        let hot_bytes = 64u64 << 20;
        let n = 1_000_000;
        let recs = generate(SyntheticPattern::ZipfHotCold { alpha, write_fraction: 0.8 }, 5, n, SPAN, 8).unwrap();
        let (mut hot, mut writes) = (0u64, 0u64);
        for r in recs {
            hot += (r.addr < hot_bytes) as u64;
            writes += (r.op == Op::Write) as u64;
        }
        let empirical = hot as f64 / n as f64;
        let expected = zipf_head_mass(SPAN / ZIPF_LINE_BYTES, hot_bytes / ZIPF_LINE_BYTES, alpha);
        assert!(empirical >= 0.9, "{empirical}");
        assert!((empirical - expected).abs() < 0.005, "{empirical} vs {expected}");
        assert!((writes as f64 / n as f64 - 0.8).abs() < 0.005);
    }
}
