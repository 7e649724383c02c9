//! Circulant-based parity-check representations.

mod exponent;
mod sparse;

pub use exponent::{circulant, ExponentMatrix, Protograph};
pub use sparse::SparseBinaryMatrix;
