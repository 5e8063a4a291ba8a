//! Request streams: a line-oriented trace format and synthetic generators.

mod synth;
mod trace;

pub use synth::{generate, Generator, SyntheticPattern, ZIPF_LINE_BYTES};
pub use trace::{parse_trace, serialize_trace, validate_trace, TraceRecord, SECTOR_BYTES};
