//! Spin-glass instances on Erdős–Rényi graphs, the weighted
//! non-backtracking matrix, the Bethe-Hessian and Nishimori temperature
//! estimation from its smallest eigenvalue.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sci;

/// Orders up to this use a dense eigensolver; larger ones use Lanczos.
pub const DENSE_MAX: usize = 400;
/// Grid size of the coarse β scan.
pub const SCAN_POINTS: usize = 64;
pub const DEFAULT_BETA_HI: f64 = 3.0;

/// Undirected simple graph with nonzero couplings, edges stored `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (a, b, j) in edges {
            if a == b {
                return Err(Error::domain(format!("self-loop at {a}")));
            }
            let (i, k) = (a.min(b), a.max(b));
            if k >= n {
                return Err(Error::domain(format!("edge ({a},{b}) outside {n} nodes")));
            }
            if j == 0.0 || !j.is_finite() {
                return Err(Error::domain(format!("coupling on ({i},{k}) must be finite and nonzero")));
            }
            if !seen.insert((i, k)) {
                return Err(Error::domain(format!("duplicate edge ({i},{k})")));
            }
            out.push((i, k, j));
        }
        Ok(WeightedGraph { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, j, _) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Same edges with every coupling mapped through `f`.
    pub fn map_couplings(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        WeightedGraph::new(self.n, self.edges.iter().map(|&(i, j, w)| (i, j, f(w))).collect())
    }

    /// Header `n m`, then one `i j J` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.edges.len())?;
        for &(i, j, c) in &self.edges {
            writeln!(w, "{i} {j} {c:?}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let header = header?;
        let hv: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(ln, format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let [n, m] = hv[..] else {
            return Err(Error::parse(ln, "header must be `n m`"));
        };
        let mut edges = Vec::with_capacity(m);
        for (ln, line) in lines {
            let line = line?;
            let t: Vec<&str> = line.split_whitespace().collect();
            let [a, b, c] = t[..] else {
                return Err(Error::parse(ln, "expected `i j J`"));
            };
            let bad = |what: &str| Error::parse(ln, format!("bad {what}"));
            edges.push((
                a.parse().map_err(|_| bad("node"))?,
                b.parse().map_err(|_| bad("node"))?,
                c.parse().map_err(|_| bad("coupling"))?,
            ));
        }
        if edges.len() != m {
            return Err(Error::parse(ln, format!("header says {m} edges, found {}", edges.len())));
        }
        WeightedGraph::new(n, edges)
    }
}

/// Symmetric coupling density `p0(|x|)` tilted by `exp(beta_n x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CouplingFamily {
    /// `J = ±s` with `P(+s) / P(-s) = exp(2 beta_n s)`.
    TwoPoint { s: f64 },
    /// Gaussian `p0` of width `sigma`; the tilt makes `J ~ N(beta_n sigma^2, sigma^2)`.
    GaussianSym { sigma: f64 },
}

impl CouplingFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingFamily::TwoPoint { .. } => "two_point",
            CouplingFamily::GaussianSym { .. } => "gaussian_sym",
        }
    }

    fn check(&self, beta_n: f64) -> Result<()> {
        let scale = match *self {
            CouplingFamily::TwoPoint { s } => s,
            CouplingFamily::GaussianSym { sigma } => sigma,
        };
        if !(scale > 0.0 && scale.is_finite()) || !(beta_n >= 0.0 && beta_n.is_finite()) {
            return Err(Error::domain(format!(
                "{} with scale {scale} and beta_n {beta_n} cannot be normalised",
                self.name()
            )));
        }
        Ok(())
    }

    fn draw(&self, beta_n: f64, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            CouplingFamily::TwoPoint { s } => {
                // P(+s) = e^{bs} / (e^{bs} + e^{-bs})
                let p_plus = 1.0 / (1.0 + (-2.0 * beta_n * s).exp());
                if rng.random::<f64>() < p_plus {
                    s
                } else {
                    -s
                }
            }
            CouplingFamily::GaussianSym { sigma } => {
                let d = Normal::new(beta_n * sigma * sigma, sigma).expect("sigma checked");
                loop {
                    let x = d.sample(rng);
                    if x != 0.0 {
                        return x;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassSample {
    pub graph: WeightedGraph,
    pub beta_n: f64,
    pub family: CouplingFamily,
}

/// Erdős–Rényi graph with edge probability `avg_degree / (n - 1)` and
/// i.i.d. tilted couplings.
pub fn sample_spin_glass(
    n: usize,
    avg_degree: f64,
    family: CouplingFamily,
    beta_n: f64,
    seed: u64,
) -> Result<SpinGlassSample> {
    if n < 2 {
        return Err(Error::domain("need at least two nodes"));
    }
    if !(avg_degree >= 0.0 && avg_degree < n as f64) {
        return Err(Error::domain(format!("average degree {avg_degree} must lie in [0, {n})")));
    }
    family.check(beta_n)?;
    let p = avg_degree / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, family.draw(beta_n, &mut rng)));
            }
        }
    }
    Ok(SpinGlassSample {
        graph: WeightedGraph::new(n, edges)?,
        beta_n,
        family,
    })
}

/// Directed edge `2e` is `i -> j` and `2e + 1` is `j -> i` for edge `e = (i, j)`.
fn directed(g: &WeightedGraph) -> Vec<(usize, usize, f64)> {
    g.edges.iter().flat_map(|&(i, j, w)| [(i, j, w), (j, i, w)]).collect()
}

/// `B[(ij),(kl)] = [j == k] [i != l] w_kl`, indexed by directed edges.
pub fn non_backtracking(g: &WeightedGraph) -> DMatrix<f64> {
    let d = directed(g);
    let mut out_of = vec![Vec::new(); g.n];
    for (idx, &(k, _, _)) in d.iter().enumerate() {
        out_of[k].push(idx);
    }
    let mut b = DMatrix::zeros(d.len(), d.len());
    for (r, &(i, j, _)) in d.iter().enumerate() {
        for &c in &out_of[j] {
            let (_, l, w) = d[c];
            if l != i {
                b[(r, c)] = w;
            }
        }
    }
    b
}

/// Sparse symmetric matrix: diagonal plus off-diagonal pairs `(i, j, v)`, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparse {
    pub diag: Vec<f64>,
    pub off: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for &(i, j, v) in &self.off {
            m[(i, j)] += v;
            m[(j, i)] += v;
        }
        m
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for &(i, j, v) in &self.off {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }

    /// Smallest eigenvalue: dense for small orders, restarted Lanczos otherwise.
    pub fn lambda_min(&self) -> f64 {
        let n = self.n();
        if n <= DENSE_MAX {
            return SymmetricEigen::new(self.to_dense()).eigenvalues.min();
        }
        lanczos_min(self, 1e-9)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Lanczos with full reorthogonalisation, restarted from the current Ritz
/// vector until its residual drops below `tol * ||A||`.
fn lanczos_min(a: &SymSparse, tol: f64) -> f64 {
    let n = a.n();
    let k_max = n.min(150);
    let scale = a.diag.iter().map(|d| d.abs()).fold(1.0, f64::max)
        + a.off.iter().map(|o| o.2.abs()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut start);
    let mut best = f64::INFINITY;
    let mut w = vec![0.0; n];
    for _restart in 0..60 {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut last_beta = 0.0;
        for k in 0..k_max {
            a.apply(&basis[k], &mut w);
            let ak = dot(&w, &basis[k]);
            alpha.push(ak);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bk = normalize(&mut w);
            last_beta = bk;
            if k + 1 == k_max || bk < 1e-12 * scale {
                break;
            }
            beta.push(bk);
            basis.push(w.clone());
        }
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        best = best.min(theta);
        let s = eig.eigenvectors.column(idx);
        let residual = (last_beta * s[m - 1]).abs();
        if residual <= tol * scale || m == n {
            return theta;
        }
        start = vec![0.0; n];
        for (v, &c) in basis.iter().zip(s.iter()) {
            start.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
        }
        normalize(&mut start);
    }
    best
}

fn hessian_from(g: &WeightedGraph, omega: impl Fn(f64) -> (f64, f64)) -> SymSparse {
    // omega(J) yields (diagonal increment, off-diagonal value) per edge
    let mut diag = vec![1.0; g.n];
    let mut off = Vec::with_capacity(g.edges.len());
    for &(i, j, w) in &g.edges {
        let (d, o) = omega(w);
        diag[i] += d;
        diag[j] += d;
        off.push((i, j, o));
    }
    SymSparse { diag, off }
}

/// `H(x)_ij = (1 + sum_k w_ik^2 / (x^2 - w_ik^2)) [i == j] - x w_ij / (x^2 - w_ij^2)`.
pub fn bethe_hessian_x_sparse(g: &WeightedGraph, x: f64) -> Result<SymSparse> {
    if let Some(&(i, j, w)) = g.edges.iter().find(|&&(_, _, w)| x * x == w * w) {
        return Err(Error::domain(format!("x = {x} is a pole of edge ({i},{j}) with weight {w}")));
    }
    Ok(hessian_from(g, |w| {
        let den = x * x - w * w;
        (w * w / den, -x * w / den)
    }))
}

pub fn bethe_hessian_x(g: &WeightedGraph, x: f64) -> Result<DMatrix<f64>> {
    Ok(bethe_hessian_x_sparse(g, x)?.to_dense())
}

/// Bethe-Hessian at `x = 1` with `w = tanh(beta J)`, written with
/// `t^2 / (1 - t^2) = sinh^2` and `t / (1 - t^2) = sinh cosh` so large
/// `beta J` stays finite.
pub fn bethe_hessian_beta_sparse(g: &WeightedGraph, beta: f64) -> Result<SymSparse> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(hessian_from(g, |j| {
        let (s, c) = ((beta * j).sinh(), (beta * j).cosh());
        (s * s, -s * c)
    }))
}

pub fn bethe_hessian_beta(g: &WeightedGraph, beta: f64) -> Result<DMatrix<f64>> {
    Ok(bethe_hessian_beta_sparse(g, beta)?.to_dense())
}

fn log_det(m: DMatrix<f64>) -> (f64, f64) {
    // (sign, ln |det|)
    let lu = m.lu();
    let u = lu.u();
    let mut sign = if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if d < 0.0 {
            sign = -sign;
        }
        acc += d.abs().ln();
    }
    (sign, acc)
}

/// Relative gap `|L - R| / max(|L|, |R|, 1)` between
/// `det(x I - B)` and `det H(x) * prod (x^2 - w^2)`.
pub fn verify_ihara_bass(g: &WeightedGraph, x: f64) -> Result<f64> {
    let h = bethe_hessian_x(g, x)?;
    let b = non_backtracking(g);
    let m2 = b.nrows();
    let (sl, ll) = log_det(DMatrix::identity(m2, m2) * x - b);
    let (mut sr, mut lr) = log_det(h);
    for &(_, _, w) in &g.edges {
        let f = x * x - w * w;
        if f < 0.0 {
            sr = -sr;
        }
        lr += f.abs().ln();
    }
    let top = ll.max(lr).max(0.0);
    let l = sl * (ll - top).exp();
    let r = sr * (lr - top).exp();
    Ok((l - r).abs() / l.abs().max(r.abs()).max((-top).exp()))
}

/// Smallest Bethe-Hessian eigenvalue as a function of β.
pub fn lambda_min_at(g: &WeightedGraph, beta: f64) -> Result<f64> {
    Ok(bethe_hessian_beta_sparse(g, beta)?.lambda_min())
}

/// `(beta, lambda_min)` pairs, evaluated in parallel.
pub fn beta_trace(g: &WeightedGraph, betas: &[f64]) -> Result<Vec<(f64, f64)>> {
    betas
        .par_iter()
        .map(|&b| Ok((b, lambda_min_at(g, b)?)))
        .collect()
}

pub fn write_trace_csv<W: Write>(trace: &[(f64, f64)], mut w: W) -> Result<()> {
    writeln!(w, "beta,lambda_min")?;
    for &(b, l) in trace {
        writeln!(w, "{},{}", sci(b), sci(l))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NishimoriEstimate {
    pub beta_hat: f64,
    pub method: EstimateMethod,
    /// Coarse scan used to bracket the root.
    pub trace: Vec<(f64, f64)>,
    /// Bisection bracket at termination; `f(lo) * f(hi) <= 0`.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    /// Rightmost sign change of `lambda_min`, refined by bisection.
    Root,
    /// No sign change; `lambda_min` touches down near zero and its
    /// minimiser is reported.
    Tangent,
}

/// Largest interior minimum of `lambda_min` still read as a touch-down.
pub const TANGENT_TOL: f64 = 0.05;

fn golden_min(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Largest root of `beta -> lambda_min(H_beta)` in `(0, beta_hi]`.
///
/// A 64-point scan brackets sign changes and bisection refines the
/// rightmost one. When the scan sees no sign change, the curve is minimised
/// around its lowest grid point, since the dip below zero near the
/// Nishimori point can be narrower than the grid spacing. If that minimum
/// stays positive but within [`TANGENT_TOL`] of zero, the minimiser itself
/// is returned; otherwise the instance is reported paramagnetic.
pub fn estimate_beta_nishimori(g: &WeightedGraph, beta_hi: f64, tol: f64) -> Result<NishimoriEstimate> {
    if !(beta_hi > 0.0 && beta_hi.is_finite()) || !(tol > 0.0) {
        return Err(Error::domain("beta_hi and tol must be positive"));
    }
    let f = |b: f64| lambda_min_at(g, b);
    let grid: Vec<f64> = (1..=SCAN_POINTS).map(|k| beta_hi * k as f64 / SCAN_POINTS as f64).collect();
    let trace = beta_trace(g, &grid)?;
    let crossing = (1..trace.len()).rev().find(|&k| trace[k - 1].1 * trace[k].1 <= 0.0);
    let (mut lo, mut hi, mut flo) = match crossing {
        Some(k) => (trace[k - 1].0, trace[k].0, trace[k - 1].1),
        None => {
            let k = (0..trace.len())
                .min_by(|&a, &b| trace[a].1.total_cmp(&trace[b].1))
                .expect("grid is non-empty");
            let a = if k == 0 { 0.0 } else { trace[k - 1].0 };
            let b = trace[(k + 1).min(trace.len() - 1)].0;
            let (bm, fm) = golden_min(&f, a, b, tol)?;
            if fm > 0.0 {
                let interior = k > 0 && k + 1 < trace.len();
                if interior && fm < TANGENT_TOL {
                    return Ok(NishimoriEstimate {
                        beta_hat: bm,
                        method: EstimateMethod::Tangent,
                        trace,
                        bracket: (bm, bm),
                    });
                }
                return Err(Error::Estimation("paramagnetic at all scanned β".into()));
            }
            // the minimiser sits left of the rightmost root inside [bm, b]
            let fb = f(b)?;
            if fb < 0.0 {
                return Err(Error::Estimation("paramagnetic at all scanned β".into()));
            }
            (bm, b, fm)
        }
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(NishimoriEstimate {
        beta_hat: 0.5 * (lo + hi),
        method: EstimateMethod::Root,
        trace,
        bracket: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(w: f64) -> WeightedGraph {
        WeightedGraph::new(3, vec![(0, 1, w), (1, 2, w), (0, 2, w)]).unwrap()
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> WeightedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = BTreeSet::new();
        while set.len() < m {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        let edges = set
            .into_iter()
            .map(|(a, b)| (a, b, rng.random_range(0.1..0.9) * if rng.random::<bool>() { 1.0 } else { -1.0 }))
            .collect();
        WeightedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(WeightedGraph::new(2, vec![(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        let g = WeightedGraph::new(3, vec![(2, 0, 1.5)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2, 1.5)]);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = random_graph(8, 10, 3);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(WeightedGraph::read_edge_list(&buf[..]).unwrap(), g);
        assert!(WeightedGraph::read_edge_list(&b"3 2\n0 1 1.0\n"[..]).is_err());
    }

    #[test]
    fn two_point_tilt() {
        let s = sample_spin_glass(2, 1.0, CouplingFamily::TwoPoint { s: 1.0 }, 0.5, 0).unwrap();
        assert_eq!(s.graph.edges().len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fam = CouplingFamily::TwoPoint { s: 1.0 };
        let draws = 100_000;
        let plus = (0..draws).filter(|_| fam.draw(0.5, &mut rng) > 0.0).count();
        // P(+1) / P(-1) = e^{2 * 0.5}, so P(+1) = e / (e + 1) ~ 0.731
        let e = 1f64.exp();
        assert!((plus as f64 / draws as f64 - e / (e + 1.0)).abs() < 0.01);
        let plus = (0..draws).filter(|_| fam.draw(0.0, &mut rng) > 0.0).count();
        assert!((plus as f64 / draws as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampler_degree_and_errors() {
        let s = sample_spin_glass(1000, 5.0, CouplingFamily::GaussianSym { sigma: 1.0 }, 0.3, 7).unwrap();
        let mean = 2.0 * s.graph.edges().len() as f64 / 1000.0;
        assert!((mean - 5.0).abs() < 0.3, "{mean}");
        assert!(sample_spin_glass(10, 3.0, CouplingFamily::TwoPoint { s: -1.0 }, 0.5, 0).is_err());
        assert!(sample_spin_glass(10, 3.0, CouplingFamily::GaussianSym { sigma: 0.0 }, 0.5, 0).is_err());
        assert!(sample_spin_glass(1, 0.0, CouplingFamily::TwoPoint { s: 1.0 }, 0.5, 0).is_err());
    }

    #[test]
    fn non_backtracking_examples() {
        let single = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(non_backtracking(&single), DMatrix::zeros(2, 2));
        let b = non_backtracking(&triangle(1.0));
        let rho = b.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((rho - 1.0).abs() < 1e-9);
        let g = random_graph(9, 14, 5);
        let b = non_backtracking(&g);
        let d = directed(&g);
        for (r, &(i, k, _)) in d.iter().enumerate() {
            let expect: f64 = d.iter().filter(|e| e.0 == k && e.1 != i).map(|e| e.2).sum();
            assert!((b.row(r).sum() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn hessian_examples() {
        let single = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let h = bethe_hessian_x(&single, 2.0).unwrap();
        assert!((h[(0, 0)] - (1.0 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((h[(0, 1)] + 2.0 / 3.0).abs() < 1e-15);
        assert!(bethe_hessian_x(&single, 1.0).is_err());
        let h = bethe_hessian_x(&triangle(0.7), 1e9).unwrap();
        assert!((h - DMatrix::identity(3, 3)).abs().max() < 1e-8);
    }

    #[test]
    fn beta_hessian_matches_x_form() {
        let g = random_graph(10, 18, 2);
        let beta = 0.8;
        let tg = g.map_couplings(|j| (beta * j).tanh()).unwrap();
        let a = bethe_hessian_beta(&g, beta).unwrap();
        let b = bethe_hessian_x(&tg, 1.0).unwrap();
        assert!((a.clone() - b).abs().max() < 1e-10);
        assert_eq!(a.transpose(), a);
        assert_eq!(bethe_hessian_beta(&g, 0.0).unwrap(), DMatrix::identity(10, 10));
        assert_eq!(lambda_min_at(&g, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn ihara_bass_examples() {
        let single = WeightedGraph::new(2, vec![(0, 1, 0.6)]).unwrap();
        assert!(verify_ihara_bass(&single, 1.3).unwrap() < 1e-12);
        assert!(verify_ihara_bass(&triangle(1.0), 3.0).unwrap() < 1e-10);
        let g = random_graph(10, 20, 9);
        assert!(verify_ihara_bass(&g, 1.5).unwrap() < 1e-8);
        let g = random_graph(12, 22, 10);
        assert!(verify_ihara_bass(&g, 1.7).unwrap() < 1e-8);
    }

    #[test]
    fn gauge_flip_preserves_spectrum() {
        let g = random_graph(12, 24, 4);
        let flipped = WeightedGraph::new(
            12,
            g.edges().iter().map(|&(i, j, w)| (i, j, if i == 3 || j == 3 { -w } else { w })).collect(),
        )
        .unwrap();
        let mut a: Vec<f64> = SymmetricEigen::new(bethe_hessian_beta(&g, 1.1).unwrap()).eigenvalues.iter().copied().collect();
        let mut b: Vec<f64> = SymmetricEigen::new(bethe_hessian_beta(&flipped, 1.1).unwrap()).eigenvalues.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let s = sample_spin_glass(500, 4.0, CouplingFamily::TwoPoint { s: 1.0 }, 0.6, 3).unwrap();
        let h = bethe_hessian_beta_sparse(&s.graph, 0.6).unwrap();
        let dense = SymmetricEigen::new(h.to_dense()).eigenvalues.min();
        assert!((lanczos_min(&h, 1e-9) - dense).abs() < 1e-6);
    }

    #[test]
    fn tree_has_no_root() {
        let edges = (1..40).map(|k| ((k - 1) / 2, k, if k % 3 == 0 { -1.0 } else { 1.0 })).collect();
        let g = WeightedGraph::new(40, edges).unwrap();
        assert!(matches!(estimate_beta_nishimori(&g, 3.0, 1e-4), Err(Error::Estimation(_))));
    }

    #[test]
    fn estimate_scales_with_couplings() {
        let s = sample_spin_glass(300, 5.0, CouplingFamily::TwoPoint { s: 1.0 }, 0.6, 11).unwrap();
        let est = estimate_beta_nishimori(&s.graph, 3.0, 1e-6).unwrap();
        let (lo, hi) = est.bracket;
        assert!(lambda_min_at(&s.graph, lo).unwrap() * lambda_min_at(&s.graph, hi).unwrap() <= 0.0);
        // H depends on beta J only, so J -> 2J and beta -> beta / 2 agree
        let g2 = s.graph.map_couplings(|j| 2.0 * j).unwrap();
        let h1 = bethe_hessian_beta(&s.graph, 0.9).unwrap();
        let h2 = bethe_hessian_beta(&g2, 0.45).unwrap();
        assert_eq!(h1, h2);
        let est2 = estimate_beta_nishimori(&g2, 1.5, 0.5e-6).unwrap();
        assert!((est2.beta_hat * 2.0 - est.beta_hat).abs() < 1e-5);
    }

    #[test]
    fn trace_csv_format() {
        let mut buf = Vec::new();
        write_trace_csv(&[(0.5, -1e-3)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "beta,lambda_min\n5.000000e-01,-1.000000e-03\n");
    }
}
