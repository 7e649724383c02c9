//! QC-LDPC construction and analysis, Ising ground-state geometry, Bethe
//! permanents, Nishimori temperature estimation and masked sparse
//! factorization of square matrices.

pub mod bench;
pub mod bethe;
pub mod cli;
pub mod construct;
pub mod data;
pub mod error;
pub mod factor;
pub mod fmt;
pub mod graph;
pub mod ising;
pub mod nishimori;
pub mod qc;

pub use error::{Error, Result};
