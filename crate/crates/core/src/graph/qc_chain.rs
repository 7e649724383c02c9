use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qc::ExponentMatrix;

/// One visit of a chain: block row, block column and the chosen shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainStep {
    pub row: usize,
    pub col: usize,
    pub shift: usize,
}

impl ChainStep {
    pub fn new(row: usize, col: usize, shift: usize) -> Self {
        ChainStep { row, col, shift }
    }
}

/// Checks that `chain` is a closed alternating block walk and returns
/// whether its alternating shift sum vanishes mod `L`.
///
/// Step `k -> k+1` stays in one block row for even `k` and in one block
/// column for odd `k`; the last step closes back to the first through a
/// column. Consecutive visits may share a cell only through different
/// shifts (otherwise the walk would backtrack).
pub fn qc_cycle_condition(e: &ExponentMatrix, chain: &[ChainStep]) -> Result<bool> {
    let len = chain.len();
    if len < 4 || len % 2 == 1 {
        return Err(Error::domain(format!("chain length {len} must be even and >= 4")));
    }
    for (k, s) in chain.iter().enumerate() {
        if s.row >= e.rows() || s.col >= e.cols() {
            return Err(Error::domain(format!("step {k} outside the block grid")));
        }
        let cell = e.cell(s.row, s.col);
        if cell.is_empty() {
            return Err(Error::domain(format!(
                "step {k} visits empty cell ({}, {})",
                s.row, s.col
            )));
        }
        if !cell.contains(&s.shift) {
            return Err(Error::domain(format!(
                "step {k}: shift {} not in cell ({}, {})",
                s.shift, s.row, s.col
            )));
        }
    }
    for k in 0..len {
        let (a, b) = (chain[k], chain[(k + 1) % len]);
        let linked = if k % 2 == 0 { a.row == b.row } else { a.col == b.col };
        if !linked {
            return Err(Error::domain(format!("steps {k} and {} are not aligned", (k + 1) % len)));
        }
        if a == b {
            return Err(Error::domain(format!("chain backtracks at step {k}")));
        }
    }
    let l = e.lift() as i64;
    let sum: i64 = chain
        .iter()
        .enumerate()
        .map(|(k, s)| if k % 2 == 0 { s.shift as i64 } else { -(s.shift as i64) })
        .sum();
    Ok(sum.rem_euclid(l) == 0)
}

/// Shortest chain satisfying the cycle condition, i.e. a witness for the
/// girth of `e.expand()`. `None` when the expansion is a forest.
///
/// Breadth-first search over non-backtracking walks of the protograph
/// multigraph, with states `(node, incoming edge, shift sum mod L)`.
pub fn qc_girth_chain(e: &ExponentMatrix) -> Option<Vec<ChainStep>> {
    let (m, n, l) = (e.rows(), e.cols(), e.lift());
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..n {
            for &s in e.cell(i, j) {
                edges.push(ChainStep::new(i, j, s));
            }
        }
    }
    // incidence by node: checks 0..m, variables m..m+n
    let mut incident = vec![Vec::new(); m + n];
    for (k, st) in edges.iter().enumerate() {
        incident[st.row].push(k);
        incident[m + st.col].push(k);
    }
    let ne = edges.len();
    let state = |node: usize, edge: usize, volt: usize| (node * (ne + 1) + edge) * l + volt;
    let n_states = (m + n) * (ne + 1) * l;

    let mut best: Option<Vec<ChainStep>> = None;
    for start in m..m + n {
        let mut parent = vec![usize::MAX; n_states];
        let mut depth = vec![u32::MAX; n_states];
        let s0 = state(start, ne, 0);
        depth[s0] = 0;
        let mut queue = VecDeque::from([s0]);
        let limit = best.as_ref().map_or(usize::MAX, Vec::len);
        let mut found = None;
        'bfs: while let Some(cur) = queue.pop_front() {
            let d = depth[cur] as usize;
            if d + 1 >= limit {
                break;
            }
            let volt = cur % l;
            let edge_in = (cur / l) % (ne + 1);
            let node = cur / l / (ne + 1);
            for &k in &incident[node] {
                if k == edge_in {
                    continue;
                }
                let st = edges[k];
                let (next, nv) = if node >= m {
                    (st.row, (volt + l - st.shift) % l)
                } else {
                    (m + st.col, (volt + st.shift) % l)
                };
                let ns = state(next, k, nv);
                if depth[ns] != u32::MAX {
                    continue;
                }
                depth[ns] = (d + 1) as u32;
                parent[ns] = cur;
                if next == start && nv == 0 {
                    found = Some(ns);
                    break 'bfs;
                }
                queue.push_back(ns);
            }
        }
        if let Some(mut s) = found {
            let mut chain = Vec::new();
            while s != s0 {
                chain.push(edges[(s / l) % (ne + 1)]);
                s = parent[s];
            }
            chain.reverse();
            best = Some(chain);
        }
    }
    best
}

/// Girth of `e.expand()` from the chain search.
pub fn qc_girth(e: &ExponentMatrix) -> Option<usize> {
    qc_girth_chain(e).map(|c| c.len())
}

/// Every chain of exactly `len` visits satisfying the cycle condition,
/// by exhaustive enumeration. Exponential; meant as a test oracle.
pub fn chains_satisfying(e: &ExponentMatrix, len: usize) -> Result<Vec<Vec<ChainStep>>> {
    if len < 4 || len % 2 == 1 {
        return Err(Error::domain("chain length must be even and >= 4"));
    }
    let mut edges = Vec::new();
    for i in 0..e.rows() {
        for j in 0..e.cols() {
            for &s in e.cell(i, j) {
                edges.push(ChainStep::new(i, j, s));
            }
        }
    }
    let mut out = Vec::new();
    let mut chain = Vec::with_capacity(len);
    for &first in &edges {
        chain.push(first);
        grow(e, &edges, len, &mut chain, &mut out)?;
        chain.pop();
    }
    Ok(out)
}

fn grow(
    e: &ExponentMatrix,
    edges: &[ChainStep],
    len: usize,
    chain: &mut Vec<ChainStep>,
    out: &mut Vec<Vec<ChainStep>>,
) -> Result<()> {
    if chain.len() == len {
        let closes = chain[len - 1].col == chain[0].col && chain[len - 1] != chain[0];
        if closes && qc_cycle_condition(e, chain)? {
            out.push(chain.clone());
        }
        return Ok(());
    }
    let last = *chain.last().unwrap();
    let by_row = chain.len() % 2 == 1;
    for &next in edges {
        let aligned = if by_row { next.row == last.row } else { next.col == last.col };
        if aligned && next != last {
            chain.push(next);
            grow(e, edges, len, chain, out)?;
            chain.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TannerGraph;

    #[test]
    fn two_by_two_l7_no_four_cycle() {
        let e = ExponentMatrix::from_signed(7, &[vec![1, 2], vec![6, 5]]).unwrap();
        let chain = [
            ChainStep::new(0, 0, 1),
            ChainStep::new(0, 1, 2),
            ChainStep::new(1, 1, 5),
            ChainStep::new(1, 0, 6),
        ];
        assert!(!qc_cycle_condition(&e, &chain).unwrap());
        assert_ne!(TannerGraph::from_matrix(&e.expand()).girth(), Some(4));
    }

    #[test]
    fn all_zero_shifts_close_every_chain() {
        let e = ExponentMatrix::from_signed(3, &[vec![0, 0], vec![0, 0]]).unwrap();
        let chain = [
            ChainStep::new(0, 0, 0),
            ChainStep::new(0, 1, 0),
            ChainStep::new(1, 1, 0),
            ChainStep::new(1, 0, 0),
        ];
        assert!(qc_cycle_condition(&e, &chain).unwrap());
        assert_eq!(qc_girth(&e), Some(4));
    }

    #[test]
    fn shbf_row_twelve_chain() {
        // hexagonal block walk: zero diagonal, one gauge row on the cyclic
        // superdiagonal, so the 12-chain sum is minus the row sum
        for row in [[1usize, 7, 13, 19, 25, 31], [23, 17, 47, 41, 35, 29]] {
            let mut table = vec![vec![vec![]; 6]; 6];
            for k in 0..6 {
                table[k][k] = vec![0];
                table[k][(k + 1) % 6] = vec![row[k]];
            }
            let e = ExponentMatrix::from_table(48, table).unwrap();
            let mut chain = Vec::new();
            for k in 0..6 {
                chain.push(ChainStep::new(k, k, 0));
                chain.push(ChainStep::new(k, (k + 1) % 6, row[k]));
            }
            assert!(qc_cycle_condition(&e, &chain).unwrap());
            assert_eq!(qc_girth(&e), Some(12));
        }
    }

    #[test]
    fn empty_cell_is_domain_error() {
        let e = ExponentMatrix::from_signed(3, &[vec![0, -1], vec![0, 0]]).unwrap();
        let chain = [
            ChainStep::new(0, 0, 0),
            ChainStep::new(0, 1, 0),
            ChainStep::new(1, 1, 0),
            ChainStep::new(1, 0, 0),
        ];
        assert!(matches!(qc_cycle_condition(&e, &chain), Err(Error::Domain(_))));
    }

    #[test]
    fn backtracking_chain_rejected() {
        let e = ExponentMatrix::from_signed(3, &[vec![0, 1], vec![0, 0]]).unwrap();
        let chain = [
            ChainStep::new(0, 0, 0),
            ChainStep::new(0, 0, 0),
            ChainStep::new(1, 0, 0),
            ChainStep::new(1, 1, 0),
        ];
        assert!(qc_cycle_condition(&e, &chain).is_err());
    }

    #[test]
    fn multi_edge_cell_gives_four_cycle_when_half_lift_apart() {
        let e = ExponentMatrix::from_table(6, vec![vec![vec![1, 4]]]).unwrap();
        assert_eq!(qc_girth(&e), Some(4));
        assert_eq!(TannerGraph::from_matrix(&e.expand()).girth(), Some(4));
        let e = ExponentMatrix::from_table(7, vec![vec![vec![1, 4]]]).unwrap();
        assert_eq!(qc_girth(&e), TannerGraph::from_matrix(&e.expand()).girth());
    }

    #[test]
    fn tanner_code_girth_and_witness() {
        let e = ExponentMatrix::from_signed(7, &[vec![1, 2, 4], vec![6, 5, 3]]).unwrap();
        let chain = qc_girth_chain(&e).unwrap();
        assert!(qc_cycle_condition(&e, &chain).unwrap());
        assert_eq!(Some(chain.len()), TannerGraph::from_matrix(&e.expand()).girth());
    }

    #[test]
    fn exhaustive_chains_agree_with_bfs() {
        let e = ExponentMatrix::from_signed(5, &[vec![0, 1, 3], vec![2, 0, 4]]).unwrap();
        let g = qc_girth(&e).unwrap();
        for len in (4..g).step_by(2) {
            assert!(chains_satisfying(&e, len).unwrap().is_empty());
        }
        assert!(!chains_satisfying(&e, g).unwrap().is_empty());
    }

    #[test]
    fn forest_protograph_has_no_chain() {
        let e = ExponentMatrix::from_signed(4, &[vec![0, 1, -1], vec![-1, 2, 3]]).unwrap();
        assert_eq!(qc_girth(&e), None);
        assert_eq!(TannerGraph::from_matrix(&e.expand()).girth(), None);
    }
}
