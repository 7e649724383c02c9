use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qc::{ExponentMatrix, SparseBinaryMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtlasEntry {
    Exponent(ExponentMatrix),
    Binary(SparseBinaryMatrix),
}

impl AtlasEntry {
    pub fn as_exponent(&self) -> Option<&ExponentMatrix> {
        match self {
            AtlasEntry::Exponent(e) => Some(e),
            AtlasEntry::Binary(_) => None,
        }
    }

    /// Binary parity-check form (expanded for exponent matrices).
    pub fn to_binary(&self) -> SparseBinaryMatrix {
        match self {
            AtlasEntry::Exponent(e) => e.expand(),
            AtlasEntry::Binary(h) => h.clone(),
        }
    }
}

const NAMES: &[&str] = &[
    "eq1_h",
    "mega4",
    "multi_edge_h2",
    "tanner_2x3_L7",
    "tanner_3x4_L26",
    "particles5_space_L31",
    "pentagon_L11",
    "carbon48",
    "carbon48_collapsed",
    "projective85",
    "projective85_pre",
    "multigraph_product_L205",
    "webkb_h2_L65",
];

pub fn atlas_names() -> &'static [&'static str] {
    NAMES
}

fn single(lift: usize, rows: &[&[usize]]) -> ExponentMatrix {
    let table = rows
        .iter()
        .map(|r| r.iter().map(|&s| vec![s]).collect())
        .collect();
    ExponentMatrix::from_table(lift, table).expect("fixture is valid")
}

fn multi(lift: usize, rows: &[&[&[usize]]]) -> ExponentMatrix {
    let table = rows
        .iter()
        .map(|r| r.iter().map(|c| c.to_vec()).collect())
        .collect();
    ExponentMatrix::from_table(lift, table).expect("fixture is valid")
}

/// Verbatim matrices used as fixtures, by stable name.
pub fn atlas(name: &str) -> Result<AtlasEntry> {
    let e = match name {
        "eq1_h" => {
            return Ok(AtlasEntry::Binary(SparseBinaryMatrix::from_dense(&[
                vec![1, 0, 1, 1, 1],
                vec![1, 1, 0, 0, 0],
                vec![0, 1, 1, 1, 1],
            ])?))
        }
        "mega4" => {
            return Ok(AtlasEntry::Binary(SparseBinaryMatrix::from_dense(&[
                vec![1, 1, 1, 1],
                vec![0, 1, 1, 1],
                vec![0, 0, 1, 1],
                vec![0, 0, 0, 1],
            ])?))
        }
        // the source leaves L open; 38 is the smallest lift holding shift 37
        "multi_edge_h2" => multi(
            38,
            &[
                &[&[1, 2, 7], &[9], &[23], &[], &[]],
                &[&[12, 37], &[19], &[], &[32], &[11, 12]],
                &[&[], &[], &[33], &[], &[]],
            ],
        ),
        "tanner_2x3_L7" => single(7, &[&[1, 2, 4], &[6, 5, 3]]),
        "tanner_3x4_L26" => single(26, &[&[1, 5, 25, 21], &[9, 19, 17, 11], &[3, 15, 23, 11]]),
        "particles5_space_L31" => single(
            31,
            &[&[1, 2, 4, 8, 16], &[5, 10, 20, 9, 18], &[25, 19, 7, 14, 28]],
        ),
        "pentagon_L11" => single(11, &[&[10, 9, 8, 7, 6], &[1, 2, 3, 4, 5]]),
        "carbon48" => single(
            48,
            &[
                &[24, 24, 36, 36, 36, 36],
                &[1, 7, 13, 19, 25, 31],
                &[23, 17, 47, 41, 35, 29],
            ],
        ),
        // the two non-radial rows after collapsing along the radius
        "carbon48_collapsed" => multi(
            48,
            &[&[&[1, 7, 13, 19, 25, 31]], &[&[23, 17, 47, 41, 35, 29]]],
        ),
        "projective85" => multi(
            85,
            &[
                &[&[0, 24, 40, 71, 84]],
                &[&[1, 49, 58, 81, 84]],
                &[&[3, 14, 32, 78, 84]],
                &[&[16, 33, 50, 67, 84]],
            ],
        ),
        // radial shift k is left open in the source; 0 is used here
        "projective85_pre" => single(
            85,
            &[&[0, 0, 0, 0, 0], &[0, 24, 40, 71, 84], &[1, 49, 58, 81, 84]],
        ),
        "multigraph_product_L205" => multi(205, &[&[&[0, 2, 3, 65, 70, 85, 97, 154]]]),
        "webkb_h2_L65" => multi(
            65,
            &[
                &[&[1, 26, 50], &[2, 19, 49], &[5, 13, 42]],
                &[&[5, 58], &[5, 60], &[4, 60]],
                &[&[4, 18, 48], &[23, 28, 61], &[1, 4, 53]],
            ],
        ),
        _ => return Err(Error::Lookup(name.to_string())),
    };
    Ok(AtlasEntry::Exponent(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in atlas_names() {
            atlas(name).unwrap();
        }
        assert!(matches!(atlas("nope"), Err(Error::Lookup(_))));
    }

    #[test]
    fn mega4_is_upper_triangular() {
        let h = atlas("mega4").unwrap().to_binary();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h.get(i, j), j >= i);
            }
        }
    }

    #[test]
    fn tanner_and_carbon_shapes() {
        let e = atlas("tanner_2x3_L7").unwrap();
        let e = e.as_exponent().unwrap();
        assert_eq!(e.cell(1, 2), &[3]);
        let c = atlas("carbon48").unwrap();
        let c = c.as_exponent().unwrap();
        assert_eq!((c.rows(), c.cols(), c.lift()), (3, 6, 48));
        assert_eq!(c.cell(2, 2), &[47]);
    }

    #[test]
    fn published_factorization_masks() {
        let p = atlas("multigraph_product_L205").unwrap().to_binary();
        assert_eq!((p.nrows(), p.nnz()), (205, 8 * 205));
        let w = atlas("webkb_h2_L65").unwrap().to_binary();
        assert_eq!((w.nrows(), w.ncols()), (195, 195));
        assert_eq!(w.nnz(), 24 * 65);
    }
}
