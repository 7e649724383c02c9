use serde::{Deserialize, Serialize};

use super::{peg_ace, sa_emd, PegConfig, SaConfig};
use crate::error::{Error, Result};
use crate::qc::{ExponentMatrix, SparseBinaryMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Chord,
    LdpcPeg,
    QcSa,
    Product,
}

impl MaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MaskKind::Chord => "chord",
            MaskKind::LdpcPeg => "ldpc_peg",
            MaskKind::QcSa => "qc_sa",
            MaskKind::Product => "product",
        }
    }
}

/// Square sparsity pattern for one factor, tagged with how it was built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    pub matrix: SparseBinaryMatrix,
    pub kind: MaskKind,
}

impl Mask {
    pub fn new(matrix: SparseBinaryMatrix, kind: MaskKind) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::domain("masks must be square"));
        }
        Ok(Mask { matrix, kind })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Adds any missing diagonal ones.
    pub fn with_diagonal(self) -> Self {
        let n = self.n();
        let matrix = self
            .matrix
            .union(&SparseBinaryMatrix::identity(n))
            .expect("same shape");
        Mask { matrix, kind: self.kind }
    }

    pub fn contains_diagonal(&self) -> bool {
        (0..self.n()).all(|i| self.matrix.get(i, i))
    }

    /// Union of two mask families of the same order.
    pub fn product(a: &Mask, b: &Mask) -> Result<Self> {
        Ok(Mask {
            matrix: a.matrix.union(&b.matrix)?,
            kind: MaskKind::Product,
        })
    }

    pub fn from_exponent(e: &ExponentMatrix, kind: MaskKind) -> Result<Self> {
        Mask::new(e.expand(), kind)
    }
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

/// Chord mask: row `i` has ones at `(i + 2^k) mod N` for `k < log2 N`.
pub fn chord_mask(n: usize) -> Result<Mask> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::domain(format!("chord mask needs a power of two >= 2, got {n}")));
    }
    chord_offsets_mask(n)
}

/// Chord pattern for any `N >= 2`, with `ceil(log2 N)` offsets `2^k mod N`.
pub fn chord_offsets_mask(n: usize) -> Result<Mask> {
    if n < 2 {
        return Err(Error::domain("chord mask needs N >= 2"));
    }
    let hops = ceil_log2(n);
    let entries = (0..n).flat_map(|i| (0..hops).map(move |k| (i, (i + (1 << k)) % n)));
    Mask::new(SparseBinaryMatrix::from_entries(n, n, entries)?, MaskKind::Chord)
}

/// PEG/ACE mask on an `N x N` rate-zero layout, plus the diagonal.
pub fn square_ldpc_mask(n: usize, degree: Option<usize>, seed: u64) -> Result<Mask> {
    let degree = degree.unwrap_or_else(|| ceil_log2(n).max(1));
    if degree == 0 || degree > n {
        return Err(Error::Construction(format!("degree {degree} infeasible for N = {n}")));
    }
    let h = peg_ace(&PegConfig::regular(n, n, degree, seed))?;
    Ok(Mask::new(h, MaskKind::LdpcPeg)?.with_diagonal())
}

/// Annealed QC mask with default schedule (2000 steps, target girth 6).
pub fn square_qc_mask(n: usize, lift: usize, seed: u64) -> Result<Mask> {
    square_qc_mask_with(n, lift, seed, 2000, 6)
}

/// Annealed QC mask on a full `(N/L) x (N/L)` protograph whose cells carry
/// enough shifts to reach about `ceil(log2 N)` ones per row, plus the diagonal.
pub fn square_qc_mask_with(n: usize, lift: usize, seed: u64, steps: usize, target_girth: usize) -> Result<Mask> {
    if lift == 0 || n == 0 || n % lift != 0 {
        return Err(Error::domain(format!("L = {lift} does not divide N = {n}")));
    }
    let b = n / lift;
    let k = ceil_log2(n).max(1);
    square_qc_mask_weighted(n, lift, k.div_ceil(b).clamp(1, lift), seed, steps, target_girth)
}

/// Annealed QC mask with `shifts` circulants in every cell of the full
/// `(N/L) x (N/L)` protograph, plus the diagonal.
pub fn square_qc_mask_weighted(
    n: usize,
    lift: usize,
    shifts: usize,
    seed: u64,
    steps: usize,
    target_girth: usize,
) -> Result<Mask> {
    if lift == 0 || n == 0 || n % lift != 0 {
        return Err(Error::domain(format!("L = {lift} does not divide N = {n}")));
    }
    if shifts == 0 || shifts > lift {
        return Err(Error::domain(format!("{shifts} shifts per cell do not fit L = {lift}")));
    }
    let b = n / lift;
    let w = shifts;
    let mut cfg = SaConfig::new(b, b, lift, target_girth, steps, seed);
    cfg.cell_weights = Some(vec![w; b * b]);
    let r = sa_emd(&cfg)?;
    Ok(Mask::from_exponent(&r.matrix, MaskKind::QcSa)?.with_diagonal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TannerGraph;

    fn boolean_power(m: &SparseBinaryMatrix, k: usize) -> SparseBinaryMatrix {
        let mut acc = m.clone();
        for _ in 1..k {
            acc = acc.bool_product(m).unwrap();
        }
        acc
    }

    #[test]
    fn chord_examples() {
        let c = chord_mask(2).unwrap();
        assert_eq!(c.nnz(), 2);
        assert!(c.matrix.get(0, 1) && c.matrix.get(1, 0));
        let c = chord_mask(16).unwrap();
        assert_eq!(c.nnz(), 64);
        assert_eq!(boolean_power(&c.matrix, 4).nnz(), 256);
        assert!(matches!(chord_mask(12), Err(Error::Domain(_))));
    }

    #[test]
    fn chord_general_offsets() {
        let c = chord_offsets_mask(12).unwrap();
        assert_eq!(c.nnz(), 12 * 4);
    }

    #[test]
    fn ldpc_masks() {
        let m = square_ldpc_mask(16, Some(4), 0).unwrap();
        assert!((64..=80).contains(&m.nnz()));
        assert!(m.contains_diagonal());
        let m = square_ldpc_mask(4, Some(1), 0).unwrap();
        let offdiag = m.nnz() - 4;
        assert!(offdiag <= 4);
        let perm_part: Vec<usize> = m.matrix.col_weights();
        assert!(perm_part.iter().all(|&w| (1..=2).contains(&w)));
    }

    #[test]
    fn ldpc_mask_n100_girth_six() {
        let m = square_ldpc_mask(100, Some(6), 1).unwrap();
        // the diagonal is added after PEG, so check the PEG core
        let core = peg_ace(&PegConfig::regular(100, 100, 6, 1)).unwrap();
        assert!(TannerGraph::from_matrix(&core).girth().unwrap() >= 6);
        assert!(m.nnz() >= 600);
    }

    #[test]
    fn qc_masks() {
        let m = square_qc_mask(1, 1, 0).unwrap();
        assert_eq!(m.matrix.to_dense(), vec![vec![1]]);
        assert!(square_qc_mask(10, 4, 0).is_err());
        let m = square_qc_mask_with(64, 16, 3, 300, 6).unwrap();
        assert_eq!(m.n(), 64);
        assert!(m.contains_diagonal());
    }
}
