//! Circulant permutation matrices, exponent (shift) matrices and protographs.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::SparseBinaryMatrix;
use crate::error::{Error, Result};

/// `lift x lift` circulant permutation matrix: entry (i, j) is 1 iff
/// `j == (i + shift) mod lift`.
pub fn circulant(shift: usize, lift: usize) -> Result<SparseBinaryMatrix> {
    if lift == 0 {
        return Err(Error::domain("circulant size must be at least 1"));
    }
    if shift >= lift {
        return Err(Error::domain(format!(
            "shift {shift} outside [0, {lift})"
        )));
    }
    SparseBinaryMatrix::from_rows(
        lift,
        lift,
        (0..lift).map(|i| vec![(i + shift) % lift]).collect(),
    )
}

/// Block matrix of circulant sums. Each cell holds a sorted set of distinct
/// shifts in `[0, lift)`; an empty cell is the zero block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    lift: usize,
    cells: Vec<Vec<usize>>,
}

impl ExponentMatrix {
    /// `cells` is row-major with `rows * cols` entries.
    pub fn new(rows: usize, cols: usize, lift: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("exponent matrix needs at least one row and column"));
        }
        if lift == 0 {
            return Err(Error::domain("circulant size must be at least 1"));
        }
        if cells.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        let mut cells = cells;
        for (k, cell) in cells.iter_mut().enumerate() {
            if let Some(&s) = cell.iter().find(|&&s| s >= lift) {
                return Err(Error::domain(format!(
                    "cell ({}, {}): shift {s} outside [0, {lift})",
                    k / cols,
                    k % cols
                )));
            }
            cell.sort_unstable();
            if cell.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::domain(format!(
                    "cell ({}, {}): repeated shift",
                    k / cols,
                    k % cols
                )));
            }
        }
        Ok(ExponentMatrix {
            rows,
            cols,
            lift,
            cells,
        })
    }

    /// Builds from a nested table, `table[i][j]` being the shift set of cell (i, j).
    pub fn from_table(lift: usize, table: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("ragged exponent table"));
        }
        ExponentMatrix::new(rows, cols, lift, table.into_iter().flatten().collect())
    }

    /// Single-edge form using `-1` for the zero block.
    pub fn from_signed(lift: usize, table: &[Vec<i64>]) -> Result<Self> {
        let table = table
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&a| match a {
                        -1 => Ok(Vec::new()),
                        a if a >= 0 => Ok(vec![a as usize]),
                        a => Err(Error::domain(format!("invalid exponent {a}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ExponentMatrix::from_table(lift, table)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    pub fn cell(&self, i: usize, j: usize) -> &[usize] {
        &self.cells[i * self.cols + j]
    }

    pub fn weight(&self, i: usize, j: usize) -> usize {
        self.cell(i, j).len()
    }

    pub fn is_multi_edge(&self) -> bool {
        self.cells.iter().any(|c| c.len() > 1)
    }

    /// Total number of circulant terms, i.e. edges of the protograph multigraph.
    pub fn edge_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// Returns a copy with cell (i, j) replaced.
    pub fn with_cell(&self, i: usize, j: usize, shifts: Vec<usize>) -> Result<Self> {
        let mut cells = self.cells.clone();
        cells[i * self.cols + j] = shifts;
        ExponentMatrix::new(self.rows, self.cols, self.lift, cells)
    }

    /// Expands to the `(rows*lift) x (cols*lift)` binary parity-check matrix.
    pub fn expand(&self) -> SparseBinaryMatrix {
        let l = self.lift;
        let rows = (0..self.rows * l)
            .map(|r| {
                let (bi, t) = (r / l, r % l);
                let mut out = Vec::new();
                for bj in 0..self.cols {
                    let mut block: Vec<usize> =
                        self.cell(bi, bj).iter().map(|s| bj * l + (t + s) % l).collect();
                    block.sort_unstable();
                    out.extend(block);
                }
                out
            })
            .collect();
        SparseBinaryMatrix::from_rows(self.rows * l, self.cols * l, rows)
            .expect("expansion yields sorted in-range rows")
    }

    pub fn protograph(&self) -> Protograph {
        Protograph {
            rows: self.rows,
            cols: self.cols,
            bits: self
                .cells
                .iter()
                .map(|c| u8::from(!c.is_empty()))
                .collect(),
        }
    }

    /// Writes `m n L` then one line per block row; cells are `-` or comma-joined shifts.
    pub fn write_text<W: Write>(&self, mut sink: W) -> Result<()> {
        write!(sink, "{self}")?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(source: R) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut cells = Vec::new();
        let mut seen_rows = 0usize;
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let ln = idx + 1;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = text.split_whitespace().collect();
            match header {
                None => {
                    let nums = tokens
                        .iter()
                        .map(|t| {
                            t.parse::<usize>()
                                .map_err(|_| Error::parse(ln, format!("bad header value `{t}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let [m, n, l] = nums[..] else {
                        return Err(Error::parse(ln, "expected header `m n L`"));
                    };
                    if m == 0 || n == 0 || l == 0 {
                        return Err(Error::parse(ln, "dimensions must be positive"));
                    }
                    header = Some((m, n, l));
                }
                Some((m, n, l)) => {
                    if seen_rows == m {
                        return Err(Error::parse(ln, format!("more than {m} block rows")));
                    }
                    if tokens.len() != n {
                        return Err(Error::parse(
                            ln,
                            format!("expected {n} cells, found {}", tokens.len()),
                        ));
                    }
                    for tok in tokens {
                        cells.push(parse_cell(tok, l, ln)?);
                    }
                    seen_rows += 1;
                }
            }
        }
        let (m, n, l) = header.ok_or_else(|| Error::parse(0, "empty exponent file"))?;
        if seen_rows != m {
            return Err(Error::parse(0, format!("expected {m} block rows, found {seen_rows}")));
        }
        ExponentMatrix::new(m, n, l, cells).map_err(|e| Error::parse(0, e))
    }
}

fn parse_cell(tok: &str, lift: usize, ln: usize) -> Result<Vec<usize>> {
    if tok == "-" {
        return Ok(Vec::new());
    }
    let mut shifts = Vec::new();
    for part in tok.split(',') {
        let s: usize = part
            .parse()
            .map_err(|_| Error::parse(ln, format!("bad shift `{part}`")))?;
        if s >= lift {
            return Err(Error::parse(ln, format!("shift {s} not below L = {lift}")));
        }
        if shifts.contains(&s) {
            return Err(Error::parse(ln, format!("repeated shift {s}")));
        }
        shifts.push(s);
    }
    Ok(shifts)
}

impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.rows, self.cols, self.lift)?;
        for i in 0..self.rows {
            let line: Vec<String> = (0..self.cols)
                .map(|j| {
                    let c = self.cell(i, j);
                    if c.is_empty() {
                        "-".to_string()
                    } else {
                        c.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
                    }
                })
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// 0/1 base matrix marking the non-empty cells of an exponent matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protograph {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl Protograph {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.cols + j]
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.bits.chunks(self.cols).map(<[u8]>::to_vec).collect()
    }
}
