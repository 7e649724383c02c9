//! Row-major sparse 0/1 matrices and the alist interchange format.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse binary matrix stored as sorted column lists per row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseBinaryMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseBinaryMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseBinaryMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseBinaryMatrix {
            nrows: n,
            ncols: n,
            rows: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from per-row column lists. Lists must be strictly
    /// increasing and in range.
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.len() != nrows {
            return Err(Error::domain(format!(
                "expected {nrows} rows, got {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
            if let Some(&c) = row.last() {
                if c >= ncols {
                    return Err(Error::domain(format!(
                        "row {i}: column {c} out of range for {ncols} columns"
                    )));
                }
            }
        }
        Ok(SparseBinaryMatrix { nrows, ncols, rows })
    }

    /// Builds a matrix from arbitrary (row, col) coordinates; duplicates collapse.
    pub fn from_entries(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut rows = vec![Vec::new(); nrows];
        for (r, c) in entries {
            if r >= nrows || c >= ncols {
                return Err(Error::domain(format!(
                    "entry ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            rows[r].push(c);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        Ok(SparseBinaryMatrix { nrows, ncols, rows })
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let nrows = dense.len();
        let ncols = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != ncols) {
            return Err(Error::domain("ragged dense matrix"));
        }
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(SparseBinaryMatrix { nrows, ncols, rows })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.ncols];
        for row in &self.rows {
            for &c in row {
                w[c] += 1;
            }
        }
        w
    }

    /// Per-column sorted row lists.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.ncols];
        for (i, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(i);
            }
        }
        cols
    }

    pub fn transpose(&self) -> Self {
        SparseBinaryMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            rows: self.columns(),
        }
    }

    /// Boolean (OR-AND) matrix product.
    pub fn bool_product(&self, other: &SparseBinaryMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::domain(format!(
                "shape mismatch {}x{} * {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut mark = vec![false; other.ncols];
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = Vec::new();
                for &k in row {
                    for &j in &other.rows[k] {
                        if !mark[j] {
                            mark[j] = true;
                            out.push(j);
                        }
                    }
                }
                for &j in &out {
                    mark[j] = false;
                }
                out.sort_unstable();
                out
            })
            .collect();
        Ok(SparseBinaryMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            rows,
        })
    }

    /// Entrywise OR with another matrix of the same shape.
    pub fn union(&self, other: &SparseBinaryMatrix) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::domain("shape mismatch in union"));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut r: Vec<usize> = a.iter().chain(b).copied().collect();
                r.sort_unstable();
                r.dedup();
                r
            })
            .collect();
        Ok(SparseBinaryMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        })
    }

    /// True when every row and every column holds exactly one 1.
    pub fn is_permutation(&self) -> bool {
        self.is_square()
            && self.rows.iter().all(|r| r.len() == 1)
            && self.col_weights().iter().all(|&w| w == 1)
    }

    /// Applies `out[row_perm[i]][col_perm[j]] = self[i][j]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Self> {
        if row_perm.len() != self.nrows || col_perm.len() != self.ncols {
            return Err(Error::domain("permutation length mismatch"));
        }
        SparseBinaryMatrix::from_entries(
            self.nrows,
            self.ncols,
            self.rows
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().map(move |&j| (row_perm[i], col_perm[j]))),
        )
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0u8; self.ncols];
                for &c in r {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    /// GF(2) syndrome `H x` for a support set given as column indices.
    pub fn syndrome_of_support(&self, support: &[usize]) -> Vec<u8> {
        let mut x = vec![false; self.ncols];
        for &c in support {
            x[c] = !x[c];
        }
        self.rows
            .iter()
            .map(|r| (r.iter().filter(|&&c| x[c]).count() % 2) as u8)
            .collect()
    }

    /// Writes the matrix in alist layout: `n m`, `max_col_deg max_row_deg`,
    /// column degrees, row degrees, then 1-indexed column and row adjacency.
    pub fn write_alist<W: Write>(&self, mut sink: W) -> Result<()> {
        let cols = self.columns();
        let col_deg: Vec<usize> = cols.iter().map(Vec::len).collect();
        let row_deg = self.row_weights();
        writeln!(sink, "{} {}", self.ncols, self.nrows)?;
        writeln!(
            sink,
            "{} {}",
            col_deg.iter().max().copied().unwrap_or(0),
            row_deg.iter().max().copied().unwrap_or(0)
        )?;
        writeln!(sink, "{}", join(col_deg.iter()))?;
        writeln!(sink, "{}", join(row_deg.iter()))?;
        for c in &cols {
            writeln!(sink, "{}", join(c.iter().map(|i| i + 1)))?;
        }
        for r in &self.rows {
            writeln!(sink, "{}", join(r.iter().map(|j| j + 1)))?;
        }
        Ok(())
    }

    /// Parses alist text. Zero padding in adjacency lines is tolerated.
    pub fn read_alist<R: BufRead>(source: R) -> Result<Self> {
        let lines: Vec<String> = source.lines().collect::<std::io::Result<_>>()?;
        let mut cursor = 0usize;
        let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
            let idx = cursor;
            cursor += 1;
            let text = lines
                .get(idx)
                .ok_or_else(|| Error::parse(idx + 1, format!("missing {what}")))?;
            let nums = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::parse(idx + 1, format!("bad integer `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((idx + 1, nums))
        };

        let (ln, header) = next_line("header")?;
        let [n, m] = header[..] else {
            return Err(Error::parse(ln, "expected `n m`"));
        };
        let (ln, maxes) = next_line("max degrees")?;
        let [max_col, max_row] = maxes[..] else {
            return Err(Error::parse(ln, "expected `max_col_deg max_row_deg`"));
        };
        let (ln_cd, col_deg) = next_line("column degrees")?;
        if col_deg.len() != n {
            return Err(Error::parse(ln_cd, format!("expected {n} column degrees")));
        }
        let (ln_rd, row_deg) = next_line("row degrees")?;
        if row_deg.len() != m {
            return Err(Error::parse(ln_rd, format!("expected {m} row degrees")));
        }
        if col_deg.iter().max().copied().unwrap_or(0) != max_col {
            return Err(Error::parse(ln_cd, "column degrees disagree with max_col_deg"));
        }
        if row_deg.iter().max().copied().unwrap_or(0) != max_row {
            return Err(Error::parse(ln_rd, "row degrees disagree with max_row_deg"));
        }

        let mut entries = Vec::new();
        for (c, &deg) in col_deg.iter().enumerate() {
            let (ln, list) = next_line("column adjacency")?;
            let list: Vec<usize> = list.into_iter().filter(|&v| v != 0).collect();
            if list.len() != deg {
                return Err(Error::parse(
                    ln,
                    format!("column {} lists {} entries, degree says {deg}", c + 1, list.len()),
                ));
            }
            for r in list {
                if r > m {
                    return Err(Error::parse(ln, format!("row index {r} exceeds {m}")));
                }
                entries.push((r - 1, c));
            }
        }
        let by_cols = SparseBinaryMatrix::from_entries(m, n, entries.iter().copied())?;
        if by_cols.nnz() != entries.len() {
            return Err(Error::parse(0, "duplicate entries in column adjacency"));
        }
        for (r, &deg) in row_deg.iter().enumerate() {
            let (ln, list) = next_line("row adjacency")?;
            let mut list: Vec<usize> = list.into_iter().filter(|&v| v != 0).collect();
            if list.len() != deg {
                return Err(Error::parse(
                    ln,
                    format!("row {} lists {} entries, degree says {deg}", r + 1, list.len()),
                ));
            }
            if list.iter().any(|&c| c > n) {
                return Err(Error::parse(ln, format!("column index exceeds {n}")));
            }
            list.iter_mut().for_each(|c| *c -= 1);
            list.sort_unstable();
            if list != by_cols.rows[r] {
                return Err(Error::parse(
                    ln,
                    format!("row {} adjacency disagrees with column lists", r + 1),
                ));
            }
        }
        Ok(by_cols)
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(h: &SparseBinaryMatrix) -> SparseBinaryMatrix {
        let mut buf = Vec::new();
        h.write_alist(&mut buf).unwrap();
        SparseBinaryMatrix::read_alist(&buf[..]).unwrap()
    }

    #[test]
    fn identity_alist_round_trip() {
        let h = SparseBinaryMatrix::identity(2);
        let mut buf = Vec::new();
        h.write_alist(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "2 2\n1 1\n1 1\n1 1\n1\n2\n1\n2\n");
        assert_eq!(roundtrip(&h), h);
    }

    #[test]
    fn alist_degree_mismatch_is_parse_error() {
        let text = "2 2\n1 1\n1 1\n1 1\n1 2\n2\n1\n2\n";
        match SparseBinaryMatrix::read_alist(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn alist_row_column_disagreement_is_parse_error() {
        let text = "2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n";
        assert!(matches!(
            SparseBinaryMatrix::read_alist(text.as_bytes()),
            Err(Error::Parse { line: 7, .. })
        ));
    }

    #[test]
    fn alist_accepts_zero_padding_and_empty_columns() {
        let h = SparseBinaryMatrix::from_rows(2, 3, vec![vec![0, 2], vec![2]]).unwrap();
        assert_eq!(roundtrip(&h), h);
        let padded = "3 2\n2 2\n1 0 2\n2 1\n1 0\n0 0\n1 2\n1 3\n3 0\n";
        assert_eq!(SparseBinaryMatrix::read_alist(padded.as_bytes()).unwrap(), h);
    }

    #[test]
    fn from_rows_rejects_unsorted() {
        assert!(SparseBinaryMatrix::from_rows(1, 3, vec![vec![2, 1]]).is_err());
        assert!(SparseBinaryMatrix::from_rows(1, 3, vec![vec![3]]).is_err());
    }

    #[test]
    fn bool_product_of_permutations() {
        let p = SparseBinaryMatrix::from_rows(3, 3, vec![vec![1], vec![2], vec![0]]).unwrap();
        let p2 = p.bool_product(&p).unwrap();
        assert_eq!(p2.rows(), &[vec![2], vec![0], vec![1]]);
        assert!(p2.is_permutation());
    }

    #[test]
    fn syndrome_of_all_ones_pair() {
        let h = SparseBinaryMatrix::from_dense(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(h.syndrome_of_support(&[0, 1]), vec![0, 0]);
        assert_eq!(h.syndrome_of_support(&[0]), vec![1, 1]);
    }
}
