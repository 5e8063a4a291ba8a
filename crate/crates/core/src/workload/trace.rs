use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::timing::Op;

pub const SECTOR_BYTES: u64 = 32;

/// One trace line: `stream op addr_hex size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceRecord {
    pub stream: u32,
    pub op: Op,
    pub addr: u64,
    pub size: u32,
}

impl TraceRecord {
    pub fn sector(stream: u32, op: Op, addr: u64) -> Self {
        Self { stream, op, addr, size: SECTOR_BYTES as u32 }
    }

    /// Sector-aligned addresses covered by this record.
    pub fn sectors(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.size as u64 / SECTOR_BYTES).map(move |i| self.addr + i * SECTOR_BYTES)
    }

    pub fn validate(&self, capacity: u64) -> std::result::Result<(), String> {
        if self.size == 0 || !(self.size as u64).is_multiple_of(SECTOR_BYTES) {
            return Err(format!("size {} is not a positive multiple of 32", self.size));
        }
        if !self.addr.is_multiple_of(SECTOR_BYTES) {
            return Err(format!("address {:#x} is not 32 B aligned", self.addr));
        }
        match self.addr.checked_add(self.size as u64) {
            Some(end) if end <= capacity => Ok(()),
            _ => Err(format!("address {:#x}+{} beyond capacity {capacity:#x}", self.addr, self.size)),
        }
    }
}

fn op_char(op: Op) -> char {
    match op {
        Op::Read => 'R',
        Op::Write => 'W',
    }
}

fn parse_line(line: &str, capacity: u64) -> std::result::Result<Option<TraceRecord>, String> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    }
    let stream = fields[0].parse::<u32>().map_err(|e| format!("bad stream id `{}`: {e}", fields[0]))?;
    let op = match fields[1] {
        "R" | "r" => Op::Read,
        "W" | "w" => Op::Write,
        other => return Err(format!("unknown op `{other}`")),
    };
    let hex = fields[2]
        .strip_prefix("0x")
        .or_else(|| fields[2].strip_prefix("0X"))
        .ok_or_else(|| format!("address `{}` must be hex with a 0x prefix", fields[2]))?;
    let addr = u64::from_str_radix(hex, 16).map_err(|e| format!("bad address `{}`: {e}", fields[2]))?;
    let size = fields[3].parse::<u32>().map_err(|e| format!("bad size `{}`: {e}", fields[3]))?;
    let rec = TraceRecord { stream, op, addr, size };
    rec.validate(capacity)?;
    Ok(Some(rec))
}

/// Parse and validate a whole trace. Errors carry 1-based line numbers.
pub fn parse_trace(input: &str, capacity: u64) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        match parse_line(line, capacity) {
            Ok(Some(r)) => out.push(r),
            Ok(None) => {}
            Err(msg) => return Err(Error::Trace { line: i + 1, msg }),
        }
    }
    Ok(out)
}

/// Validate every line, collecting all errors instead of stopping at the first.
pub fn validate_trace(input: &str, capacity: u64) -> (usize, Vec<Error>) {
    let mut records = 0;
    let mut errors = Vec::new();
    for (i, line) in input.lines().enumerate() {
        match parse_line(line, capacity) {
            Ok(Some(_)) => records += 1,
            Ok(None) => {}
            Err(msg) => errors.push(Error::Trace { line: i + 1, msg }),
        }
    }
    (records, errors)
}

pub fn serialize_trace(records: &[TraceRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 20);
    for r in records {
        writeln!(s, "{} {} {:#x} {}", r.stream, op_char(r.op), r.addr, r.size).expect("write to String");
    }
    s
}
