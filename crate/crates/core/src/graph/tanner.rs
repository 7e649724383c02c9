use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qc::SparseBinaryMatrix;

/// Bipartite variable/check adjacency of a parity-check matrix.
///
/// Variable nodes are columns, check nodes are rows. Both adjacency lists
/// are sorted; parallel edges cannot occur because the source is 0/1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TannerGraph {
    vn_count: usize,
    cn_count: usize,
    vn_adj: Vec<Vec<usize>>,
    cn_adj: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn from_matrix(h: &SparseBinaryMatrix) -> Self {
        TannerGraph {
            vn_count: h.ncols(),
            cn_count: h.nrows(),
            vn_adj: h.columns(),
            cn_adj: h.rows().to_vec(),
        }
    }

    pub fn vn_count(&self) -> usize {
        self.vn_count
    }

    pub fn cn_count(&self) -> usize {
        self.cn_count
    }

    pub fn edge_count(&self) -> usize {
        self.cn_adj.iter().map(Vec::len).sum()
    }

    pub fn vn_neighbors(&self, v: usize) -> &[usize] {
        &self.vn_adj[v]
    }

    pub fn cn_neighbors(&self, c: usize) -> &[usize] {
        &self.cn_adj[c]
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        self.vn_adj[v].len()
    }

    pub fn cn_degree(&self, c: usize) -> usize {
        self.cn_adj[c].len()
    }

    /// Unified node id: variable nodes first, then checks.
    fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let (list, offset) = if node < self.vn_count {
            (&self.vn_adj[node], self.vn_count)
        } else {
            (&self.cn_adj[node - self.vn_count], 0)
        };
        list.iter().map(move |&x| x + offset)
    }

    /// Shortest cycle through any node, or `None` for a forest.
    ///
    /// Every cycle contains a variable node, so BFS roots are limited to
    /// those. The per-root bound `d(u) + d(w) + 1` is exact for the minimum
    /// over all roots.
    pub fn girth(&self) -> Option<usize> {
        (0..self.vn_count)
            .into_par_iter()
            .filter_map(|root| self.shortest_cycle_from(root))
            .min()
    }

    fn shortest_cycle_from(&self, root: usize) -> Option<usize> {
        let total = self.vn_count + self.cn_count;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        let mut best: Option<usize> = None;
        while let Some(u) = queue.pop_front() {
            if let Some(b) = best {
                if 2 * dist[u] >= b {
                    break;
                }
            }
            for w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq1() -> SparseBinaryMatrix {
        SparseBinaryMatrix::from_dense(&[
            vec![1, 0, 1, 1, 1],
            vec![1, 1, 0, 0, 0],
            vec![0, 1, 1, 1, 1],
        ])
        .unwrap()
    }

    #[test]
    fn tanner_counts() {
        let g = TannerGraph::from_matrix(&eq1());
        assert_eq!((g.vn_count(), g.cn_count(), g.edge_count()), (5, 3, 10));
        let g = TannerGraph::from_matrix(&SparseBinaryMatrix::identity(3));
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.girth(), None);
        let g = TannerGraph::from_matrix(&SparseBinaryMatrix::zeros(2, 3));
        assert_eq!((g.edge_count(), g.girth()), (0, None));
    }

    #[test]
    fn adjacency_is_symmetric() {
        let g = TannerGraph::from_matrix(&eq1());
        for v in 0..g.vn_count() {
            for &c in g.vn_neighbors(v) {
                assert!(g.cn_neighbors(c).contains(&v));
            }
        }
    }

    #[test]
    fn girth_small_cases() {
        let ones = SparseBinaryMatrix::from_dense(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(TannerGraph::from_matrix(&ones).girth(), Some(4));
        let tree = SparseBinaryMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(TannerGraph::from_matrix(&tree).girth(), None);
        assert_eq!(TannerGraph::from_matrix(&eq1()).girth(), Some(4));
    }
}
