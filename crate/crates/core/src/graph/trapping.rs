use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{enumerate_cycles, TannerGraph, MAX_CYCLE_LEN};
use crate::error::{Error, Result};

/// Largest trapping-set size searched.
pub const MAX_TS_SIZE: usize = 8;

const MAX_WITNESSES: usize = 16;
const MAX_SEEDS: usize = 20_000;

/// Trapping sets TS(a, b) found by the bounded search.
///
/// `multiplicity` counts distinct variable-node sets found and is only a
/// lower bound on the true count (`lower_bound` is always set).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrappingSetReport {
    pub a: usize,
    pub b: usize,
    pub multiplicity: usize,
    pub witnesses: Vec<Vec<usize>>,
    pub lower_bound: bool,
}

/// Checks with odd degree in the subgraph induced by `vnodes`.
pub fn odd_checks(g: &TannerGraph, vnodes: &[usize]) -> Vec<usize> {
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in vnodes {
        for &c in g.vn_neighbors(v) {
            *deg.entry(c).or_default() += 1;
        }
    }
    deg.into_iter()
        .filter(|&(_, d)| d % 2 == 1)
        .map(|(c, _)| c)
        .collect()
}

/// Seeded cycle-expansion search for TS(a, b) with `a <= a_max`, `b <= b_max`.
///
/// Each short cycle seeds a set of variable nodes. The set then grows one
/// node at a time, always adding the neighbour that minimises the number of
/// odd checks (ties go to the lexicographically smallest resulting set).
/// Every set met along the way is recorded.
pub fn trapping_sets(g: &TannerGraph, a_max: usize, b_max: usize) -> Result<Vec<TrappingSetReport>> {
    if a_max > MAX_TS_SIZE {
        return Err(Error::domain(format!("a_max {a_max} exceeds the search guard {MAX_TS_SIZE}")));
    }
    let max_len = (2 * a_max).min(MAX_CYCLE_LEN) & !1;
    let seeds: Vec<Vec<usize>> = if max_len >= 4 {
        let mut s: Vec<Vec<usize>> = enumerate_cycles(g, max_len)?
            .into_iter()
            .map(|c| {
                let mut v = c.vnodes;
                v.sort_unstable();
                v
            })
            .collect();
        s.sort();
        s.dedup();
        s.truncate(MAX_SEEDS);
        s
    } else {
        Vec::new()
    };

    let mut found: BTreeMap<(usize, usize), BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut record = |set: &[usize], b: usize| {
        if set.len() <= a_max && b <= b_max {
            found.entry((set.len(), b)).or_default().insert(set.to_vec());
        }
    };
    for seed in seeds {
        let mut set = seed;
        record(&set, odd_checks(g, &set).len());
        while set.len() < a_max {
            let Some((next, b)) = best_extension(g, &set) else {
                break;
            };
            set = next;
            record(&set, b);
        }
    }

    Ok(found
        .into_iter()
        .map(|((a, b), sets)| TrappingSetReport {
            a,
            b,
            multiplicity: sets.len(),
            witnesses: sets.into_iter().take(MAX_WITNESSES).collect(),
            lower_bound: true,
        })
        .collect())
}

fn best_extension(g: &TannerGraph, set: &[usize]) -> Option<(Vec<usize>, usize)> {
    let members: BTreeSet<usize> = set.iter().copied().collect();
    let candidates: BTreeSet<usize> = odd_checks(g, set)
        .into_iter()
        .flat_map(|c| g.cn_neighbors(c).iter().copied())
        .filter(|v| !members.contains(v))
        .collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    for v in candidates {
        let mut next = set.to_vec();
        next.push(v);
        next.sort_unstable();
        let b = odd_checks(g, &next).len();
        let better = match &best {
            None => true,
            Some((bb, bs)) => (b, &next) < (*bb, bs),
        };
        if better {
            best = Some((b, next));
        }
    }
    best.map(|(b, s)| (s, b))
}
