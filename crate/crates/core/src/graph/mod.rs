//! Tanner-graph structure: girth, short cycles with EMD/ACE, the QC cycle
//! condition and bounded trapping-set search.

mod cycles;
mod qc_chain;
mod tanner;
mod trapping;

use std::io::Write;

use serde::Serialize;

pub use cycles::{ace, emd, emd_spectrum, enumerate_cycles, CycleRecord, MAX_CYCLE_LEN};
pub use qc_chain::{chains_satisfying, qc_cycle_condition, qc_girth, qc_girth_chain, ChainStep};
pub use tanner::TannerGraph;
pub use trapping::{odd_checks, trapping_sets, TrappingSetReport, MAX_TS_SIZE};

use crate::error::Result;

/// Writes one JSON document per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut sink: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut sink, item)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}
