//! Ising ground-state geometry as QC exponent matrices: circulant pairs,
//! LCM row combining, toroidal cells, radial collapse and the SHBF gauge.

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qc::{ExponentMatrix, SparseBinaryMatrix};

/// Charged particles at integer coordinates (rational distances pre-scaled).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticleConfig {
    pub dim: usize,
    pub positions: Vec<Vec<i64>>,
    pub charges: Vec<u64>,
}

impl ParticleConfig {
    pub fn new(dim: usize, positions: Vec<Vec<i64>>, charges: Vec<u64>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::domain("particle dimension must be 1 or 2"));
        }
        if positions.len() != charges.len() || positions.iter().any(|p| p.len() != dim) {
            return Err(Error::domain("positions and charges disagree in shape"));
        }
        if charges.contains(&0) {
            return Err(Error::domain("charges must be positive"));
        }
        let mut sorted = positions.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("particle positions must be distinct"));
        }
        Ok(ParticleConfig { dim, positions, charges })
    }

    /// Absolute coordinate along `axis` for every particle.
    pub fn projections(&self, axis: usize) -> Vec<usize> {
        self.positions.iter().map(|p| p[axis].unsigned_abs() as usize).collect()
    }

    /// Two-row toroidal cell from the X and Y projections.
    pub fn toroidal_cell(&self) -> Result<ExponentMatrix> {
        if self.dim != 2 {
            return Err(Error::domain("a toroidal cell needs planar particles"));
        }
        toroidal_cell(&self.projections(0), &self.projections(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundStateSet {
    pub e: usize,
    pub pairs: Vec<(usize, usize)>,
}

/// Circulant pairs minimising the field energy between charges at
/// distances `r1` and `r3`: circulant size `e = r1 + r3`, pairs
/// `(n1, e - n1)` for `1 <= n1 < e`.
pub fn pair_ground_states(r1: usize, r3: usize) -> Result<GroundStateSet> {
    if r1 == 0 || r3 == 0 {
        return Err(Error::domain("distances must be positive"));
    }
    let e = r1 + r3;
    Ok(GroundStateSet {
        e,
        pairs: (1..e).map(|n1| (n1, e - n1)).collect(),
    })
}

/// Brings rows over different circulant sizes to the common size
/// `L' = lcm(L_i)`, scaling each shift by `L' / L_i`, and concatenates them.
pub fn lcm_combine(rows: &[(Vec<usize>, usize)]) -> Result<(Vec<usize>, usize)> {
    if rows.is_empty() {
        return Err(Error::domain("nothing to combine"));
    }
    let mut lift = 1usize;
    for (shifts, l) in rows {
        if *l == 0 {
            return Err(Error::domain("circulant size must be positive"));
        }
        if let Some(s) = shifts.iter().find(|&&s| s >= *l) {
            return Err(Error::domain(format!("shift {s} not below {l}")));
        }
        lift = lift.lcm(l);
    }
    let shifts = rows
        .iter()
        .flat_map(|(shifts, l)| shifts.iter().map(move |&s| s * (lift / l)))
        .collect();
    Ok((shifts, lift))
}

/// 2 x k exponent matrix of a planar cell on a torus. Row sizes are the
/// projection sums; both rows are lifted to their LCM.
pub fn toroidal_cell(xs: &[usize], ys: &[usize]) -> Result<ExponentMatrix> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::domain("need matching non-empty X and Y projections"));
    }
    if xs.iter().chain(ys).any(|&v| v == 0) {
        return Err(Error::domain("projections must be positive"));
    }
    let lx: usize = xs.iter().sum();
    let ly: usize = ys.iter().sum();
    let lift = lx.lcm(&ly);
    let row = |vals: &[usize], size: usize| -> Vec<Vec<usize>> {
        vals.iter().map(|&v| vec![(v * (lift / size)) % lift]).collect()
    };
    ExponentMatrix::from_table(lift, vec![row(xs, lx), row(ys, ly)])
}

/// Result of collapsing an exponent matrix along its radial row.
///
/// The radial row becomes `copies` identity blocks of size `block`
/// side by side (`block * copies = L`); every other row becomes a single
/// multi-edge circulant of size `L` holding all of its shifts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapsedMatrix {
    pub block: usize,
    pub copies: usize,
    pub rest: ExponentMatrix,
}

impl CollapsedMatrix {
    pub fn expand(&self) -> SparseBinaryMatrix {
        let l = self.rest.lift();
        let mut rows: Vec<Vec<usize>> = (0..self.block)
            .map(|i| (0..self.copies).map(|c| c * self.block + i).collect())
            .collect();
        rows.extend(self.rest.expand().rows().iter().cloned());
        SparseBinaryMatrix::from_rows(rows.len(), l, rows).expect("collapsed rows are valid")
    }
}

pub fn collapse_radial(e: &ExponentMatrix, radial_row: usize) -> Result<CollapsedMatrix> {
    let (m, n, l) = (e.rows(), e.cols(), e.lift());
    if radial_row >= m {
        return Err(Error::domain(format!("row {radial_row} outside {m} rows")));
    }
    if m < 2 {
        return Err(Error::domain("nothing left after removing the radial row"));
    }
    if l % n != 0 {
        return Err(Error::domain(format!(
            "circulant size {l} is not divisible by the {n} radial blocks"
        )));
    }
    let mut table = Vec::new();
    for i in (0..m).filter(|&i| i != radial_row) {
        let mut shifts: Vec<usize> = (0..n).flat_map(|j| e.cell(i, j).iter().copied()).collect();
        let total = shifts.len();
        shifts.sort_unstable();
        shifts.dedup();
        if shifts.len() != total {
            return Err(Error::domain(format!(
                "row {i} repeats a shift; the collapsed circulants would cancel"
            )));
        }
        table.push(vec![shifts]);
    }
    Ok(CollapsedMatrix {
        block: l / n,
        copies: n,
        rest: ExponentMatrix::from_table(l, table)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub modulus: usize,
    pub rows: Vec<bool>,
    pub cols: Vec<bool>,
}

impl GaugeReport {
    pub fn all_rows(&self) -> bool {
        self.rows.iter().all(|&b| b)
    }
}

/// Per row and per column: does the sum of all shifts vanish mod `modulus`
/// (default `L`)?
pub fn shbf_gauge_check(e: &ExponentMatrix, modulus: Option<usize>) -> Result<GaugeReport> {
    let modulus = modulus.unwrap_or(e.lift());
    if modulus == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    let cell_sum = |i: usize, j: usize| e.cell(i, j).iter().sum::<usize>();
    Ok(GaugeReport {
        modulus,
        rows: (0..e.rows())
            .map(|i| (0..e.cols()).map(|j| cell_sum(i, j)).sum::<usize>() % modulus == 0)
            .collect(),
        cols: (0..e.cols())
            .map(|j| (0..e.rows()).map(|i| cell_sum(i, j)).sum::<usize>() % modulus == 0)
            .collect(),
    })
}

/// Largest multiplier tried when searching for an admissible circulant size.
pub const SHELL_SEARCH_CAP: usize = 10_000;

/// Smallest circulant size divisible by every radius, by their sum and by
/// the particle count (so the invariance step `k / N` is integral).
pub fn admissible_size(radii: &[usize]) -> Result<usize> {
    if radii.is_empty() || radii.contains(&0) {
        return Err(Error::domain("radii must be a non-empty list of positive integers"));
    }
    let total: usize = radii.iter().sum();
    let base = radii.iter().fold(total, |acc, &r| acc.lcm(&r));
    (1..=SHELL_SEARCH_CAP)
        .map(|a| a * base)
        .find(|k| k % radii.len() == 0)
        .ok_or_else(|| Error::Construction("no admissible circulant size within the search cap".into()))
}

/// Three-row spherical shell matrix (r, phi, theta) for particles at the
/// given radii. The radial row holds `k * r_i / sum(r)`; the angular rows
/// are arithmetic progressions whose offset (and, if needed, step
/// multiple of `k / N`) is searched in a seeded order until every row
/// passes the gauge.
pub fn spherical_shell_matrix(radii: &[usize], seed: u64) -> Result<ExponentMatrix> {
    let k = admissible_size(radii)?;
    let n = radii.len();
    let total: usize = radii.iter().sum();
    let s = k / n;
    let radial: Vec<usize> = radii.iter().map(|&r| (k * r / total) % k).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets: Vec<usize> = (0..k).collect();
    offsets.shuffle(&mut rng);
    let progression = |a0: usize, step: usize, up: bool| -> Vec<usize> {
        (0..n)
            .map(|j| {
                let d = (j * step) % k;
                if up {
                    (a0 + d) % k
                } else {
                    (a0 + k - d) % k
                }
            })
            .collect()
    };
    let gauge_ok = |row: &[usize]| row.iter().sum::<usize>() % k == 0;
    let find = |up: bool, avoid: Option<&Vec<usize>>| -> Option<Vec<usize>> {
        for c in 1..=n.max(1) {
            let step = (c * s).max(1);
            for &a0 in &offsets {
                let row = progression(a0, step, up);
                if gauge_ok(&row) && avoid != Some(&row) {
                    return Some(row);
                }
            }
        }
        None
    };
    let phi = find(true, None)
        .ok_or_else(|| Error::Construction("no gauge-satisfying phi row".into()))?;
    let theta = find(false, Some(&phi))
        .or_else(|| find(false, None))
        .ok_or_else(|| Error::Construction("no gauge-satisfying theta row".into()))?;
    let cells = |row: &[usize]| row.iter().map(|&v| vec![v]).collect::<Vec<_>>();
    ExponentMatrix::from_table(k, vec![cells(&radial), cells(&phi), cells(&theta)])
}

/// Validity predicate of the shell generator: every row passes the gauge.
pub fn is_valid_shell(e: &ExponentMatrix) -> bool {
    shbf_gauge_check(e, None).map(|r| r.all_rows()).unwrap_or(false)
}
