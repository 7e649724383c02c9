use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TannerGraph;
use crate::error::{Error, Result};

/// Longest cycle length accepted by [`enumerate_cycles`].
pub const MAX_CYCLE_LEN: usize = 12;

/// One simple cycle of a Tanner graph.
///
/// `vnodes[k]` is joined to `cnodes[k]`, which is joined to `vnodes[k + 1]`
/// (cyclically). The root `vnodes[0]` is the smallest variable node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub length: usize,
    pub vnodes: Vec<usize>,
    pub cnodes: Vec<usize>,
    pub emd: usize,
    pub ace: i64,
}

/// Checks outside the cycle that see exactly one of its variable nodes.
pub fn emd(g: &TannerGraph, vnodes: &[usize]) -> usize {
    let mut touch: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in vnodes {
        for &c in g.vn_neighbors(v) {
            *touch.entry(c).or_default() += 1;
        }
    }
    touch.values().filter(|&&k| k == 1).count()
}

/// Sum of `deg(v) - 2` over the variable nodes.
pub fn ace(g: &TannerGraph, vnodes: &[usize]) -> i64 {
    vnodes.iter().map(|&v| g.vn_degree(v) as i64 - 2).sum()
}

/// All simple cycles of length at most `max_len`, each reported once.
///
/// Order is deterministic: by root, then DFS order over sorted adjacency.
pub fn enumerate_cycles(g: &TannerGraph, max_len: usize) -> Result<Vec<CycleRecord>> {
    if max_len % 2 == 1 || max_len > MAX_CYCLE_LEN {
        return Err(Error::domain(format!(
            "max_len must be even and at most {MAX_CYCLE_LEN}, got {max_len}"
        )));
    }
    let mut out = Vec::new();
    let half = max_len / 2;
    if half < 2 {
        return Ok(out);
    }
    let mut on_path_v = vec![false; g.vn_count()];
    let mut on_path_c = vec![false; g.cn_count()];
    for root in 0..g.vn_count() {
        let mut walk = Walk {
            g,
            root,
            half,
            vs: vec![root],
            cs: Vec::new(),
            on_v: &mut on_path_v,
            on_c: &mut on_path_c,
            out: &mut out,
        };
        walk.on_v[root] = true;
        walk.extend();
        walk.on_v[root] = false;
    }
    Ok(out)
}

struct Walk<'a> {
    g: &'a TannerGraph,
    root: usize,
    half: usize,
    vs: Vec<usize>,
    cs: Vec<usize>,
    on_v: &'a mut [bool],
    on_c: &'a mut [bool],
    out: &'a mut Vec<CycleRecord>,
}

impl Walk<'_> {
    // Path is vs[0] c cs[0] vs[1] ... vs[last]; choose the next check.
    fn extend(&mut self) {
        let v = *self.vs.last().unwrap();
        for &c in self.g.vn_neighbors(v) {
            if self.on_c[c] {
                continue;
            }
            // closing check: must touch the root and give a cycle of >= 2 VNs
            if self.vs.len() >= 2 && self.g.cn_neighbors(c).binary_search(&self.root).is_ok() {
                // each cycle is met in both orientations; keep the one whose
                // first check is smaller than its closing check
                if self.cs[0] < c {
                    let mut cnodes = self.cs.clone();
                    cnodes.push(c);
                    self.out.push(CycleRecord {
                        length: 2 * self.vs.len(),
                        vnodes: self.vs.clone(),
                        cnodes,
                        emd: emd(self.g, &self.vs),
                        ace: ace(self.g, &self.vs),
                    });
                }
            }
            if self.vs.len() == self.half {
                continue;
            }
            self.on_c[c] = true;
            self.cs.push(c);
            for &w in self.g.cn_neighbors(c) {
                if w <= self.root || self.on_v[w] {
                    continue;
                }
                self.on_v[w] = true;
                self.vs.push(w);
                self.extend();
                self.vs.pop();
                self.on_v[w] = false;
            }
            self.cs.pop();
            self.on_c[c] = false;
        }
    }
}

/// Histogram of cycles by `(length, emd)`.
pub fn emd_spectrum(g: &TannerGraph, max_len: usize) -> Result<BTreeMap<(usize, usize), usize>> {
    let mut hist = BTreeMap::new();
    for c in enumerate_cycles(g, max_len)? {
        *hist.entry((c.length, c.emd)).or_default() += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::{ExponentMatrix, SparseBinaryMatrix};

    fn graph(d: &[Vec<u8>]) -> TannerGraph {
        TannerGraph::from_matrix(&SparseBinaryMatrix::from_dense(d).unwrap())
    }

    #[test]
    fn all_ones_2x2_single_four_cycle() {
        let g = graph(&[vec![1, 1], vec![1, 1]]);
        let cycles = enumerate_cycles(&g, 12).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!((cycles[0].length, cycles[0].ace, cycles[0].emd), (4, 0, 0));
        let spec = emd_spectrum(&g, 4).unwrap();
        assert_eq!(spec.into_iter().collect::<Vec<_>>(), vec![((4, 0), 1)]);
    }

    #[test]
    fn all_ones_2x3_three_four_cycles() {
        let g = graph(&[vec![1, 1, 1], vec![1, 1, 1]]);
        let cycles = enumerate_cycles(&g, 4).unwrap();
        assert_eq!(cycles.len(), 3);
        for c in &cycles {
            assert_eq!(c.ace, 0);
            // both checks see both cycle VNs
            assert_eq!(c.emd, 0);
        }
    }

    #[test]
    fn eight_cycle_detected() {
        // VNs 0..4 on a ring through checks 0..4
        let g = graph(&[
            vec![1, 1, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 1],
            vec![1, 0, 0, 1],
        ]);
        let cycles = enumerate_cycles(&g, 12).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].length, 8);
        assert_eq!(cycles[0].vnodes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn guards() {
        let g = graph(&[vec![1]]);
        assert!(enumerate_cycles(&g, 7).is_err());
        assert!(enumerate_cycles(&g, 14).is_err());
        assert!(emd_spectrum(&graph(&[vec![1, 1, 0], vec![0, 1, 1]]), 12)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn shortest_enumerated_cycle_is_girth() {
        let e = ExponentMatrix::from_signed(7, &[vec![1, 2, 4], vec![6, 5, 3]]).unwrap();
        let g = TannerGraph::from_matrix(&e.expand());
        let shortest = enumerate_cycles(&g, 12)
            .unwrap()
            .iter()
            .map(|c| c.length)
            .min();
        assert_eq!(shortest, g.girth());
    }

    #[test]
    fn emd_never_exceeds_ace() {
        let e = ExponentMatrix::from_signed(5, &[vec![0, 1, 2], vec![0, 2, 4], vec![0, 3, 1]])
            .unwrap();
        let g = TannerGraph::from_matrix(&e.expand());
        for c in enumerate_cycles(&g, 8).unwrap() {
            assert!(c.emd as i64 <= c.ace, "{c:?}");
        }
    }
}
