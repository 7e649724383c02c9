use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qc::SparseBinaryMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PegConfig {
    pub n: usize,
    pub m: usize,
    pub col_degrees: Vec<usize>,
    pub seed: u64,
    /// Maximum BFS depth (in check layers) explored per edge; 0 means unbounded.
    pub ace_depth: usize,
}

impl PegConfig {
    pub fn regular(n: usize, m: usize, degree: usize, seed: u64) -> Self {
        PegConfig {
            n,
            m,
            col_degrees: vec![degree; n],
            seed,
            ace_depth: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Construction("PEG needs at least one row and column".into()));
        }
        if self.col_degrees.len() != self.n {
            return Err(Error::Construction(format!(
                "{} column degrees for {} columns",
                self.col_degrees.len(),
                self.n
            )));
        }
        if let Some(&d) = self.col_degrees.iter().find(|&&d| d == 0 || d > self.m) {
            return Err(Error::Construction(format!(
                "column degree {d} infeasible with {} checks",
                self.m
            )));
        }
        Ok(())
    }
}

/// Progressive edge growth with ACE tie-breaking.
///
/// Columns are filled in order. The first edge of a column goes to a
/// least-loaded check. Each further edge goes to a check outside the
/// variable node's current neighbourhood tree if one exists (no new cycle);
/// otherwise to one of the checks reached last, which makes the created
/// cycle as long as possible. Ties: largest ACE of the created cycle, then
/// lowest check degree, then lowest position in a seeded ordering of checks.
pub fn peg_ace(cfg: &PegConfig) -> Result<SparseBinaryMatrix> {
    cfg.validate()?;
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rank: Vec<usize> = (0..m).collect();
    rank.shuffle(&mut rng);

    let mut vn_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cn_adj: Vec<Vec<usize>> = vec![Vec::new(); m];

    for v in 0..n {
        let target = cfg.col_degrees[v];
        for _ in 0..target {
            let cands = candidates(&vn_adj, &cn_adj, v, target, cfg.ace_depth, m);
            let pick = cands
                .into_iter()
                .max_by(|a, b| {
                    a.1.cmp(&b.1)
                        .then(cn_adj[b.0].len().cmp(&cn_adj[a.0].len()))
                        .then(rank[b.0].cmp(&rank[a.0]))
                })
                .map(|(c, _)| c)
                .ok_or_else(|| Error::Construction(format!("no free check for column {v}")))?;
            vn_adj[v].push(pick);
            cn_adj[pick].push(v);
        }
    }
    let entries = vn_adj
        .iter()
        .enumerate()
        .flat_map(|(v, cs)| cs.iter().map(move |&c| (c, v)));
    SparseBinaryMatrix::from_entries(m, n, entries)
}

/// Candidate checks with their ACE score (`i64::MAX` when no cycle forms).
fn candidates(
    vn_adj: &[Vec<usize>],
    cn_adj: &[Vec<usize>],
    v: usize,
    target: usize,
    depth_cap: usize,
    m: usize,
) -> Vec<(usize, i64)> {
    if vn_adj[v].is_empty() {
        return (0..m).map(|c| (c, i64::MAX)).collect();
    }
    let vdeg = |u: usize| -> i64 {
        if u == v {
            target as i64
        } else {
            vn_adj[u].len() as i64
        }
    };
    // level[c]: BFS layer of check c; ace[c]: best path ACE along shortest paths
    let mut level = vec![usize::MAX; m];
    let mut ace = vec![i64::MIN; m];
    let mut seen_v = vec![false; vn_adj.len()];
    seen_v[v] = true;
    let mut layer: Vec<usize> = vn_adj[v].clone();
    for &c in &layer {
        level[c] = 0;
        ace[c] = vdeg(v) - 2;
    }
    let mut reached = layer.len();
    let mut depth = 0;
    loop {
        let mut next: Vec<usize> = Vec::new();
        let mut grown = Vec::new();
        for &c in &layer {
            for &u in &cn_adj[c] {
                if seen_v[u] {
                    continue;
                }
                grown.push(u);
                let via = ace[c] + vdeg(u) - 2;
                for &c2 in &vn_adj[u] {
                    if level[c2] == usize::MAX {
                        level[c2] = depth + 1;
                        ace[c2] = via;
                        next.push(c2);
                    } else if level[c2] == depth + 1 && via > ace[c2] {
                        ace[c2] = via;
                    }
                }
            }
        }
        for u in grown {
            seen_v[u] = true;
        }
        let unreached = || -> Vec<(usize, i64)> {
            (0..m)
                .filter(|&c| level[c] == usize::MAX)
                .map(|c| (c, i64::MAX))
                .collect()
        };
        if next.is_empty() {
            // the tree stopped growing: unreached checks close no cycle
            return unreached();
        }
        if reached + next.len() == m {
            return next.into_iter().map(|c| (c, ace[c])).collect();
        }
        if depth_cap > 0 && depth + 1 >= depth_cap {
            return unreached();
        }
        reached += next.len();
        layer = next;
        depth += 1;
    }
}
