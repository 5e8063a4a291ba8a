//! Cycle-level simulator of a hybrid DRAM + storage-class-memory main
//! memory where DRAM acts as a direct-mapped cache in front of SCM.

pub mod bypass;
pub mod config;
pub mod dram_cache;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod l2_ctc;
pub mod power;
pub mod report;
pub mod sweep;
pub mod timing;
pub mod traffic;
pub mod workload;

pub use error::{Error, Result};

/// Memory bus cycles (1 ns at 1 GHz).
pub type Cycle = u64;
