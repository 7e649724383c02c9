//! Approximating a square matrix by a product of sparse square factors
//! with fixed masks, and the truncated SVD baseline at a matched budget.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{chord_offsets_mask, square_ldpc_mask, square_qc_mask_weighted, Mask, MaskKind};
use crate::error::{Error, Result};
use crate::construct::ceil_log2;
use crate::qc::SparseBinaryMatrix;

/// Non-zero budget shared by the sparse factorisation and the TSVD baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub n: usize,
    /// Number of factors.
    pub m: usize,
    /// Target non-zeros per row of each factor.
    pub k: usize,
    pub tsvd_rank: usize,
}

impl Budget {
    /// `M = K = ceil(log2 N)` and `r = ceil(K^2 / 2)`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("budget needs N >= 2, got {n}")));
        }
        let k = ceil_log2(n);
        Ok(Budget {
            n,
            m: k,
            k,
            tsvd_rank: (k * k).div_ceil(2).min(n),
        })
    }

    /// `N M K`, the nominal sparse-factor total.
    pub fn sf_nnz(&self) -> usize {
        self.n * self.m * self.k
    }

    /// `2 N r + r` stored numbers of a rank-`r` SVD.
    pub fn tsvd_nnz(&self) -> usize {
        2 * self.n * self.tsvd_rank + self.tsvd_rank
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tsvd {
    /// Leading `r` left singular vectors as columns.
    pub u: DMatrix<f64>,
    /// All singular values, non-increasing.
    pub singular: Vec<f64>,
    pub v: DMatrix<f64>,
    pub rank: usize,
    /// `sqrt(sum_{i > r} sigma_i^2)`.
    pub error: f64,
}

impl Tsvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular[..self.rank]));
        &self.u * s * self.v.transpose()
    }
}

/// Best rank-`r` approximation in Frobenius norm.
pub fn tsvd(x: &DMatrix<f64>, r: usize) -> Result<Tsvd> {
    let n = x.nrows();
    if x.ncols() != n {
        return Err(Error::domain("tsvd expects a square matrix"));
    }
    if r == 0 || r > n {
        return Err(Error::domain(format!("rank {r} outside 1..={n}")));
    }
    let svd = x.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let singular: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_r = DMatrix::from_fn(n, r, |i, c| u[(i, order[c])]);
    let v_r = DMatrix::from_fn(n, r, |i, c| vt[(order[c], i)]);
    let error = singular[r..].iter().map(|s| s * s).sum::<f64>().sqrt();
    Ok(Tsvd {
        u: u_r,
        singular,
        v: v_r,
        rank: r,
        error,
    })
}

/// Row-compressed view of a mask; values follow the same order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Pattern {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl Pattern {
    fn of(m: &SparseBinaryMatrix) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::with_capacity(m.nnz());
        for r in m.rows() {
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        Pattern { row_ptr, cols }
    }

    fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Factors `W_1 .. W_M` whose product approximates the target; values are
/// aligned with each mask's non-zeros in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSet {
    pub masks: Vec<Mask>,
    pub values: Vec<Vec<f64>>,
}

impl FactorSet {
    pub fn new(masks: Vec<Mask>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_masks(&masks)?;
        if values.len() != masks.len() || masks.iter().zip(&values).any(|(m, v)| m.nnz() != v.len()) {
            return Err(Error::domain("values must align with mask non-zeros"));
        }
        Ok(FactorSet { masks, values })
    }

    pub fn n(&self) -> usize {
        self.masks[0].n()
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.masks.iter().map(Mask::nnz).sum()
    }

    pub fn factor(&self, m: usize) -> DMatrix<f64> {
        let n = self.n();
        let mut w = DMatrix::zeros(n, n);
        let mut k = 0;
        for (i, row) in self.masks[m].matrix.rows().iter().enumerate() {
            for &j in row {
                w[(i, j)] = self.values[m][k];
                k += 1;
            }
        }
        w
    }

    /// `W_1 W_2 ... W_M`.
    pub fn product(&self) -> DMatrix<f64> {
        (1..self.len()).fold(self.factor(0), |acc, m| acc * self.factor(m))
    }

    /// Conjugates every factor by the permutation `i -> p[i]`, so the
    /// product becomes `P X P^T`.
    pub fn permuted(&self, p: &[usize]) -> Result<Self> {
        let mut masks = Vec::with_capacity(self.len());
        let mut values = Vec::with_capacity(self.len());
        for (mask, vals) in self.masks.iter().zip(&self.values) {
            let pm = mask.matrix.permuted(p, p)?;
            let mut at = HashMap::new();
            let mut k = 0;
            for (i, row) in mask.matrix.rows().iter().enumerate() {
                for &j in row {
                    at.insert((p[i], p[j]), vals[k]);
                    k += 1;
                }
            }
            let v = pm
                .rows()
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
                .map(|key| at[&key])
                .collect();
            masks.push(Mask::new(pm, mask.kind)?);
            values.push(v);
        }
        FactorSet::new(masks, values)
    }

    fn flat(&self) -> Vec<f64> {
        self.values.concat()
    }

    fn with_flat(&self, v: &[f64]) -> FactorSet {
        let mut values = Vec::with_capacity(self.len());
        let mut at = 0;
        for m in &self.masks {
            values.push(v[at..at + m.nnz()].to_vec());
            at += m.nnz();
        }
        FactorSet {
            masks: self.masks.clone(),
            values,
        }
    }
}

fn check_masks(masks: &[Mask]) -> Result<()> {
    let Some(first) = masks.first() else {
        return Err(Error::domain("at least one factor is required"));
    };
    if masks.iter().any(|m| m.n() != first.n()) {
        return Err(Error::domain("all masks must share the same order"));
    }
    Ok(())
}

/// Values uniform in `[1/K, 1/K + 1e-2]`, `K` the mean row count of the masks.
pub fn sf_init(masks: &[Mask], seed: u64) -> Result<FactorSet> {
    check_masks(masks)?;
    let total: usize = masks.iter().map(Mask::nnz).sum();
    let k = total as f64 / (masks.len() * masks[0].n()) as f64;
    let lo = if k > 0.0 { 1.0 / k } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = masks
        .iter()
        .map(|m| (0..m.nnz()).map(|_| lo + 1e-2 * rng.random::<f64>()).collect())
        .collect();
    FactorSet::new(masks.to_vec(), values)
}

/// Objective and gradient by reverse accumulation along the chain. The
/// suffix products `S_m = W_m ... W_M` are built right to left and the
/// left adjoints `U_m = W_{m-1}^T ... W_1^T (-2E)` left to right, so
/// every step is a sparse-times-dense product.
struct Engine {
    n: usize,
    x: Vec<f64>,
    pats: Vec<Pattern>,
    offsets: Vec<usize>,
    suffix: Vec<Vec<f64>>,
    u: Vec<f64>,
    u_next: Vec<f64>,
}

impl Engine {
    fn new(x: &DMatrix<f64>, fs: &FactorSet) -> Result<Self> {
        let n = fs.n();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::domain(format!("target is {}x{}, factors are {n}x{n}", x.nrows(), x.ncols())));
        }
        let pats: Vec<Pattern> = fs.masks.iter().map(|m| Pattern::of(&m.matrix)).collect();
        let mut offsets = vec![0];
        for p in &pats {
            offsets.push(offsets.last().unwrap() + p.nnz());
        }
        Ok(Engine {
            n,
            x: (0..n * n).map(|k| x[(k / n, k % n)]).collect(),
            suffix: vec![vec![0.0; n * n]; pats.len()],
            pats,
            offsets,
            u: vec![0.0; n * n],
            u_next: vec![0.0; n * n],
        })
    }

    fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn eval(&mut self, v: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let (n, mm) = (self.n, self.pats.len());
        for m in (0..mm).rev() {
            let (pat, vals) = (&self.pats[m], &v[self.offsets[m]..self.offsets[m + 1]]);
            let (head, tail) = self.suffix.split_at_mut(m + 1);
            let out = &mut head[m];
            out.iter_mut().for_each(|o| *o = 0.0);
            for i in 0..n {
                let orow = &mut out[i * n..(i + 1) * n];
                for k in pat.row_ptr[i]..pat.row_ptr[i + 1] {
                    let (c, w) = (pat.cols[k], vals[k]);
                    if m + 1 == mm {
                        orow[c] += w;
                    } else {
                        let src = &tail[0][c * n..(c + 1) * n];
                        orow.iter_mut().zip(src).for_each(|(o, s)| *o += w * s);
                    }
                }
            }
        }
        let mut f = 0.0;
        for ((u, p), x) in self.u.iter_mut().zip(&self.suffix[0]).zip(&self.x) {
            let e = x - p;
            f += e * e;
            *u = -2.0 * e;
        }
        let Some(g) = grad else {
            return f;
        };
        for m in 0..mm {
            let (pat, vals) = (&self.pats[m], &v[self.offsets[m]..self.offsets[m + 1]]);
            let gm = &mut g[self.offsets[m]..self.offsets[m + 1]];
            for i in 0..n {
                let urow = &self.u[i * n..(i + 1) * n];
                for k in pat.row_ptr[i]..pat.row_ptr[i + 1] {
                    let j = pat.cols[k];
                    gm[k] = if m + 1 == mm {
                        urow[j]
                    } else {
                        let srow = &self.suffix[m + 1][j * n..(j + 1) * n];
                        urow.iter().zip(srow).map(|(a, b)| a * b).sum()
                    };
                }
            }
            if m + 1 < mm {
                self.u_next.iter_mut().for_each(|o| *o = 0.0);
                for i in 0..n {
                    for k in pat.row_ptr[i]..pat.row_ptr[i + 1] {
                        let (c, w) = (pat.cols[k], vals[k]);
                        let (src, dst) = (&self.u[i * n..(i + 1) * n], &mut self.u_next[c * n..(c + 1) * n]);
                        dst.iter_mut().zip(src).for_each(|(d, s)| *d += w * s);
                    }
                }
                std::mem::swap(&mut self.u, &mut self.u_next);
            }
        }
        f
    }
}

/// `||X - W_1 ... W_M||_F^2` and its gradient restricted to each mask.
pub fn sf_objective_grad(x: &DMatrix<f64>, fs: &FactorSet) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut eng = Engine::new(x, fs)?;
    let mut g = vec![0.0; eng.dim()];
    let f = eng.eval(&fs.flat(), Some(&mut g));
    Ok((f, fs.with_flat(&g).values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfOptions {
    pub iters: usize,
    pub memory: usize,
    pub armijo: f64,
    pub shrink: f64,
    /// Stop when the objective fell by less than `stall_tol` (relative)
    /// over the last `stall_window` accepted iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl SfOptions {
    pub fn new(iters: usize) -> Self {
        SfOptions {
            iters,
            memory: 10,
            armijo: 1e-4,
            shrink: 0.5,
            stall_window: 50,
            stall_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub factors: FactorSet,
    /// Objective at the start and after every accepted step.
    pub history: Vec<f64>,
    pub final_fnorm: f64,
    pub iterations: usize,
    pub elapsed: f64,
}

pub fn sf_optimize(x: &DMatrix<f64>, masks: &[Mask], iters: usize, seed: u64) -> Result<FactorizationResult> {
    sf_optimize_from(x, sf_init(masks, seed)?, SfOptions::new(iters))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking over all mask values.
pub fn sf_optimize_from(x: &DMatrix<f64>, start: FactorSet, opts: SfOptions) -> Result<FactorizationResult> {
    if opts.iters == 0 {
        return Err(Error::domain("at least one iteration is required"));
    }
    let t0 = Instant::now();
    let mut eng = Engine::new(x, &start)?;
    let dim = eng.dim();
    let mut v = start.flat();
    let mut g = vec![0.0; dim];
    let mut f = eng.eval(&v, Some(&mut g));
    if !f.is_finite() {
        return Err(Error::NonFinite(format!("objective {f} at the initial point")));
    }
    let mut history = vec![f];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let (mut v_new, mut g_new, mut d) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut iterations = 0;
    while iterations < opts.iters && f > 0.0 {
        // two-loop recursion
        d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = mem.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.clear();
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = -dot(&g, &g);
            if slope == 0.0 {
                break;
            }
        }
        let mut step = if mem.is_empty() { (1.0 / (-slope).sqrt()).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            v_new.iter_mut().zip(&v).zip(&d).for_each(|((o, a), b)| *o = a + step * b);
            let fn_ = eng.eval(&v_new, Some(&mut g_new));
            if fn_.is_finite() && fn_ <= f + opts.armijo * step * slope {
                accepted = Some(fn_);
                break;
            }
            step *= opts.shrink;
        }
        let Some(fn_) = accepted else {
            if mem.is_empty() {
                break;
            }
            mem.clear();
            continue;
        };
        let s: Vec<f64> = v_new.iter().zip(&v).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if mem.len() == opts.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut v, &mut v_new);
        std::mem::swap(&mut g, &mut g_new);
        f = fn_;
        history.push(f);
        iterations += 1;
        if history.len() > opts.stall_window {
            let old = history[history.len() - 1 - opts.stall_window];
            if old - f <= opts.stall_tol * old {
                break;
            }
        }
    }
    Ok(FactorizationResult {
        factors: start.with_flat(&v),
        history,
        final_fnorm: f.sqrt(),
        iterations,
        elapsed: t0.elapsed().as_secs_f64(),
    })
}

/// Factorisation methods compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tsvd,
    SfChord,
    SfLdpcPeg,
    SfQcSa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tsvd, Method::SfChord, Method::SfLdpcPeg, Method::SfQcSa];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tsvd => "tsvd",
            Method::SfChord => "sf_chord",
            Method::SfLdpcPeg => "sf_ldpc_peg",
            Method::SfQcSa => "sf_qc_sa",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Lookup(format!("unknown method {s:?}")))
    }

    pub fn mask_name(self) -> &'static str {
        match self {
            Method::Tsvd => "none",
            Method::SfChord => MaskKind::Chord.as_str(),
            Method::SfLdpcPeg => MaskKind::LdpcPeg.as_str(),
            Method::SfQcSa => MaskKind::QcSa.as_str(),
        }
    }
}

/// The `M` identical masks a sparse method uses under `budget`. Masks that
/// get a diagonal top-up carry `K - 1` structured ones per row so the total
/// stays within the TSVD count.
pub fn masks_for(method: Method, budget: &Budget, seed: u64) -> Result<Vec<Mask>> {
    let n = budget.n;
    let inner = budget.k.saturating_sub(1).max(1);
    let mask = match method {
        Method::Tsvd => return Err(Error::domain("tsvd uses no mask")),
        Method::SfChord => chord_offsets_mask(n)?,
        Method::SfLdpcPeg => square_ldpc_mask(n, Some(inner), seed)?,
        Method::SfQcSa => {
            // b x b protograph, w shifts per cell, maximising b * w <= K - 1
            let (b, w) = (1..=inner)
                .filter(|b| n % b == 0)
                .map(|b| (b, inner / b))
                .max_by_key(|&(b, w)| (b * w, b))
                .expect("b = 1 always divides");
            square_qc_mask_weighted(n, n / b, w, seed, 2000, 6)?
        }
    };
    Ok(vec![mask; budget.m])
}

/// Two masks whose product has rank at most `r`: an `N x r` block of
/// columns times an `r x N` block of rows.
pub fn rank_masks(n: usize, r: usize) -> Result<Vec<Mask>> {
    if r == 0 || r > n {
        return Err(Error::domain(format!("rank {r} outside 1..={n}")));
    }
    let left = SparseBinaryMatrix::from_entries(n, n, (0..n).flat_map(|i| (0..r).map(move |j| (i, j))))?;
    let right = SparseBinaryMatrix::from_entries(n, n, (0..r).flat_map(|i| (0..n).map(move |j| (i, j))))?;
    Ok(vec![Mask::new(left, MaskKind::Product)?, Mask::new(right, MaskKind::Product)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::chord_mask;

    fn random_matrix(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5)
    }

    fn full_mask(n: usize) -> Mask {
        let m = SparseBinaryMatrix::from_entries(n, n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))).unwrap();
        Mask::new(m, MaskKind::Product).unwrap()
    }

    #[test]
    fn budget_examples() {
        let b = Budget::new(256).unwrap();
        assert_eq!((b.m, b.k, b.tsvd_rank), (8, 8, 32));
        assert_eq!(b.sf_nnz(), 256 * 64);
        assert!(b.tsvd_nnz() >= b.sf_nnz());
        let b = Budget::new(16).unwrap();
        assert_eq!((b.m, b.k, b.tsvd_rank, b.sf_nnz()), (4, 4, 8, 256));
        assert!(Budget::new(1).is_err());
    }

    #[test]
    fn tsvd_examples() {
        let x = DMatrix::from_fn(5, 5, |i, j| (i + 1) as f64 * (j as f64 - 2.0));
        assert!(tsvd(&x, 1).unwrap().error < 1e-12);
        let t = tsvd(&DMatrix::identity(4, 4), 2).unwrap();
        assert!((t.error - 2f64.sqrt()).abs() < 1e-12);
        assert!(tsvd(&x, 0).is_err() && tsvd(&x, 6).is_err());
        let x = random_matrix(8, 1);
        let t = tsvd(&x, 3).unwrap();
        assert!(((x.clone() - t.reconstruct()).norm() - t.error).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = DMatrix::from_fn(8, 3, |_, _| rng.random::<f64>());
            let b = DMatrix::from_fn(3, 8, |_, _| rng.random::<f64>());
            assert!(t.error <= (x.clone() - a * b).norm());
        }
    }

    #[test]
    fn init_range_and_seeding() {
        let masks = vec![chord_mask(16).unwrap(); 4];
        let a = sf_init(&masks, 3).unwrap();
        assert!(a.values.iter().flatten().all(|&v| (0.25..=0.26).contains(&v)));
        assert_eq!(a, sf_init(&masks, 3).unwrap());
        assert_ne!(a, sf_init(&masks, 4).unwrap());
    }

    #[test]
    fn gradient_closed_form_and_zero() {
        let x = random_matrix(6, 3);
        let fs = sf_init(&[full_mask(6)], 1).unwrap();
        let (f, g) = sf_objective_grad(&x, &fs).unwrap();
        let w = fs.factor(0);
        assert!((f - (x.clone() - &w).norm_squared()).abs() < 1e-12);
        for (k, (i, j)) in (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).enumerate() {
            assert!((g[0][k] + 2.0 * (x[(i, j)] - w[(i, j)])).abs() < 1e-12);
        }
        let fs = sf_init(&vec![chord_mask(8).unwrap(); 3], 5).unwrap();
        let (f, g) = sf_objective_grad(&fs.product(), &fs).unwrap();
        assert!(f < 1e-24 && g.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let masks = vec![chord_mask(8).unwrap(); 3];
        let mut fs = sf_init(&masks, 9).unwrap();
        let x = random_matrix(8, 10);
        let (_, g) = sf_objective_grad(&x, &fs).unwrap();
        let h = 1e-6;
        let scale = g.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for m in 0..3 {
            for k in (0..fs.values[m].len()).step_by(5) {
                let orig = fs.values[m][k];
                fs.values[m][k] = orig + h;
                let fp = sf_objective_grad(&x, &fs).unwrap().0;
                fs.values[m][k] = orig - h;
                let fm = sf_objective_grad(&x, &fs).unwrap().0;
                fs.values[m][k] = orig;
                assert!(((fp - fm) / (2.0 * h) - g[m][k]).abs() / scale < 1e-5);
            }
        }
    }

    #[test]
    fn optimizer_is_monotone_and_respects_masks() {
        let masks = vec![chord_mask(8).unwrap(); 3];
        let x = random_matrix(8, 4);
        let r = sf_optimize(&x, &masks, 300, 0).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.final_fnorm - (x - r.factors.product()).norm()).abs() < 1e-9);
        for m in 0..3 {
            let w = r.factors.factor(m);
            for i in 0..8 {
                for j in 0..8 {
                    if !masks[m].matrix.get(i, j) {
                        assert_eq!(w[(i, j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_target_is_reachable() {
        let masks = vec![chord_mask(8).unwrap(); 2];
        let r = sf_optimize(&DMatrix::zeros(8, 8), &masks, 2000, 1).unwrap();
        assert!(r.final_fnorm < 1e-6, "{}", r.final_fnorm);
    }

    #[test]
    fn realizable_target_is_recovered() {
        let masks = masks_for(Method::SfLdpcPeg, &Budget::new(16).unwrap(), 2).unwrap();
        let truth = sf_init(&masks, 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = FactorSet::new(
            truth.masks.clone(),
            truth.values.iter().map(|v| v.iter().map(|_| rng.random::<f64>()).collect()).collect(),
        )
        .unwrap();
        let x = truth.product();
        let r = sf_optimize(&x, &masks, 5000, 0).unwrap();
        assert!(r.final_fnorm < 1e-6 * x.norm(), "{} vs {}", r.final_fnorm, x.norm());
    }

    #[test]
    fn permutation_equivariance() {
        let masks = vec![chord_mask(8).unwrap(); 3];
        let x = random_matrix(8, 12);
        let p = [3usize, 7, 0, 5, 1, 6, 2, 4];
        let px = DMatrix::from_fn(8, 8, |i, j| {
            let (a, b) = (p.iter().position(|&v| v == i).unwrap(), p.iter().position(|&v| v == j).unwrap());
            x[(a, b)]
        });
        let start = sf_init(&masks, 2).unwrap();
        let a = sf_optimize_from(&x, start.clone(), SfOptions::new(25)).unwrap();
        let b = sf_optimize_from(&px, start.permuted(&p).unwrap(), SfOptions::new(25)).unwrap();
        // permuting reorders every floating-point sum, so the trajectories
        // agree to rounding amplified over the run rather than bit for bit
        assert_eq!(a.history.len(), b.history.len());
        for (u, v) in a.history.iter().zip(&b.history) {
            assert!((u - v).abs() <= 1e-10 * u.abs(), "{u} vs {v}");
        }
    }

    #[test]
    fn budget_parity_for_masks() {
        for n in [16usize, 32, 64] {
            let b = Budget::new(n).unwrap();
            for method in [Method::SfChord, Method::SfLdpcPeg, Method::SfQcSa] {
                let total: usize = masks_for(method, &b, 0).unwrap().iter().map(Mask::nnz).sum();
                let nominal = b.sf_nnz();
                assert!(total.abs_diff(nominal) <= n * b.k, "{method:?} {total} vs {nominal}");
                assert!(b.tsvd_nnz() >= total, "{method:?} {total} > {}", b.tsvd_nnz());
            }
        }
    }

    #[test]
    fn rank_restricted_never_beats_tsvd() {
        let x = random_matrix(10, 6);
        let t = tsvd(&x, 3).unwrap();
        let r = sf_optimize(&x, &rank_masks(10, 3).unwrap(), 2000, 0).unwrap();
        assert!(t.error <= r.final_fnorm + 1e-12);
    }
}
