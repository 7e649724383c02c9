//! Parity-check and mask constructions: PEG with ACE, simulated annealing
//! over QC shifts, Chord masks, square factorization masks and the fixture
//! atlas.

mod atlas;
mod masks;
mod peg;
mod sa;

pub use atlas::{atlas, atlas_names, AtlasEntry};
pub use masks::{chord_mask, chord_offsets_mask, square_ldpc_mask, square_qc_mask, square_qc_mask_weighted, square_qc_mask_with, Mask, MaskKind};
pub use peg::{peg_ace, PegConfig};
pub use sa::{sa_emd, SaConfig, SaResult};
pub(crate) use masks::ceil_log2;
