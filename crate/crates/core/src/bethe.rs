//! Permanents: exact (Ryser), Bethe approximation by sum-product belief
//! propagation over the row/column assignment model, max-product matching
//! and the cycle index of the symmetric group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted by [`permanent_exact`].
pub const EXACT_MAX_N: usize = 20;

/// Log-domain cap on message ratios; keeps forced assignments finite.
const LOG_CAP: f64 = 600.0;

/// Square matrix with non-negative finite entries, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonNegMatrix {
    n: usize,
    data: Vec<f64>,
}

impl NonNegMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::domain(format!("expected {n}x{n} entries, got {}", data.len())));
        }
        if data.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::domain("entries must be finite and non-negative"));
        }
        Ok(NonNegMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("matrix must be square"));
        }
        NonNegMatrix::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn has_zero_line(&self) -> bool {
        let n = self.n;
        (0..n).any(|i| (0..n).all(|j| self.get(i, j) == 0.0))
            || (0..n).any(|j| (0..n).all(|i| self.get(i, j) == 0.0))
    }
}

/// Ryser's inclusion-exclusion formula with Gray-code subset updates.
pub fn permanent_exact(w: &NonNegMatrix) -> Result<f64> {
    let n = w.n();
    if n > EXACT_MAX_N {
        return Err(Error::domain(format!("order {n} exceeds the exact limit {EXACT_MAX_N}")));
    }
    let mut row_sums = vec![0.0f64; n];
    let mut total = 0.0;
    let mut subset: u64 = 0;
    for k in 1..(1u64 << n) {
        // Gray code: flip the lowest set bit position of k
        let j = k.trailing_zeros() as usize;
        let adding = subset & (1 << j) == 0;
        subset ^= 1 << j;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += w.get(i, j);
            } else {
                *s -= w.get(i, j);
            }
        }
        let prod: f64 = row_sums.iter().product();
        let sign = if (n - subset.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * prod;
    }
    Ok(total.max(0.0))
}

/// Pseudo-marginals of the assignment model.
///
/// `x[i][j] = b(x_i = j)`, `y[j][i] = b(y_j = i)`, and
/// `pair[(i * n + j) * n * n + a * n + b] = b(x_i = a, y_j = b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub n: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub pair: Vec<f64>,
}

impl BeliefState {
    fn pair_at(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        let n = self.n;
        self.pair[(i * n + j) * n * n + a * n + b]
    }

    /// Beliefs of a probability mixture of permutations (`perm[i]` is the
    /// column of row `i`). These are exact marginals, hence consistent.
    pub fn from_permutation_mixture(n: usize, mixture: &[(f64, Vec<usize>)]) -> Result<Self> {
        let total: f64 = mixture.iter().map(|(p, _)| p).sum();
        if mixture.is_empty() || (total - 1.0).abs() > 1e-9 || mixture.iter().any(|(p, _)| *p < 0.0) {
            return Err(Error::domain("mixture weights must be non-negative and sum to 1"));
        }
        let mut x = vec![vec![0.0; n]; n];
        let mut y = vec![vec![0.0; n]; n];
        let mut pair = vec![0.0; n * n * n * n];
        for (p, perm) in mixture {
            let mut inv = vec![usize::MAX; n];
            for (i, &c) in perm.iter().enumerate() {
                if c >= n || inv[c] != usize::MAX {
                    return Err(Error::domain("mixture entry is not a permutation"));
                }
                inv[c] = i;
            }
            for i in 0..n {
                x[i][perm[i]] += p;
                y[i][inv[i]] += p;
                for j in 0..n {
                    pair[(i * n + j) * n * n + perm[i] * n + inv[j]] += p;
                }
            }
        }
        Ok(BeliefState { n, x, y, pair })
    }

    fn check(&self, tol: f64) -> Result<()> {
        let n = self.n;
        if self.x.len() != n || self.y.len() != n || self.pair.len() != n * n * n * n {
            return Err(Error::domain("belief shapes do not match the order"));
        }
        if self.pair.iter().chain(self.x.iter().flatten()).chain(self.y.iter().flatten()).any(|&v| v < -tol || !v.is_finite()) {
            return Err(Error::domain("beliefs must be finite and non-negative"));
        }
        for i in 0..n {
            for j in 0..n {
                let mut mass = 0.0;
                for a in 0..n {
                    let row: f64 = (0..n).map(|b| self.pair_at(i, j, a, b)).sum();
                    if (row - self.x[i][a]).abs() > tol {
                        return Err(Error::domain(format!("pair ({i},{j}) inconsistent with b(x_{i})")));
                    }
                    mass += row;
                }
                for b in 0..n {
                    let col: f64 = (0..n).map(|a| self.pair_at(i, j, a, b)).sum();
                    if (col - self.y[j][b]).abs() > tol {
                        return Err(Error::domain(format!("pair ({i},{j}) inconsistent with b(y_{j})")));
                    }
                }
                if (mass - 1.0).abs() > tol {
                    return Err(Error::domain("pairwise beliefs must carry unit mass"));
                }
            }
        }
        Ok(())
    }
}

fn xlogx(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// Bethe free energy of the assignment model with `phi = sqrt(W)`:
/// average energy of the pair factors and unary potentials, plus pairwise
/// entropies, minus `(n - 1)` times each variable entropy.
pub fn bethe_free_energy(b: &BeliefState, w: &NonNegMatrix) -> Result<f64> {
    let n = w.n();
    if b.n != n {
        return Err(Error::domain("belief order differs from the matrix"));
    }
    b.check(1e-8)?;
    let mut energy = 0.0;
    let mut pair_h = 0.0;
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for c in 0..n {
                    let v = b.pair_at(i, j, a, c);
                    if v <= 0.0 {
                        continue;
                    }
                    // psi(x_i = a, y_j = c) = 1 iff (a == j) == (c == i)
                    if (a == j) != (c == i) {
                        return Ok(f64::INFINITY);
                    }
                    pair_h += xlogx(v);
                }
            }
        }
    }
    let mut node_h = 0.0;
    for i in 0..n {
        for j in 0..n {
            for (v, wv) in [(b.x[i][j], w.get(i, j)), (b.y[j][i], w.get(i, j))] {
                if v > 0.0 {
                    if wv == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    energy -= v * 0.5 * wv.ln();
                    node_h += xlogx(v);
                }
            }
        }
    }
    Ok(energy + pair_h - (n as f64 - 1.0) * node_h)
}

/// Bethe free energy in the doubly-stochastic parametrisation,
/// `-sum g ln W + sum g ln g - sum (1-g) ln (1-g)`.
pub fn bethe_free_energy_gamma(gamma: &[Vec<f64>], w: &NonNegMatrix) -> f64 {
    let n = w.n();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = gamma[i][j];
            if g > 0.0 {
                if w.get(i, j) == 0.0 {
                    return f64::INFINITY;
                }
                f -= g * w.get(i, j).ln();
            }
            f += xlogx(g) - xlogx(1.0 - g);
        }
    }
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpResult {
    pub f_bethe: f64,
    pub perm_bethe: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest change of a row or column belief in the last iteration.
    pub residual: f64,
    /// `gamma[i][j] = b(x_i = j)` at the final iterate.
    pub gamma: Vec<Vec<f64>>,
    #[serde(skip)]
    pub beliefs: Option<BeliefState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

fn logsumexp(vals: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = vals.filter(|x| *x > f64::NEG_INFINITY).collect();
    let Some(&m) = v.iter().max_by(|a, b| a.total_cmp(b)) else {
        return f64::NEG_INFINITY;
    };
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Message ratios in log form: `nu[i][j]` from row `i` to column `j`,
/// `mu[j][i]` from column `j` to row `i`; `-inf` off the support.
struct Messages {
    nu: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
}

enum Combine {
    Sum,
    Max,
}

fn update(lw: &[Vec<f64>], incoming: &[Vec<f64>], transpose: bool, how: &Combine) -> Vec<Vec<f64>> {
    // computes out[i][j] = lw(i,j) - comb_{k != j} (lw(i,k) + incoming[k][i])
    // with lw read transposed for column-to-row messages
    let n = lw.len();
    let lwv = |i: usize, j: usize| if transpose { lw[j][i] } else { lw[i][j] };
    let mut out = vec![vec![f64::NEG_INFINITY; n]; n];
    for i in 0..n {
        let terms: Vec<f64> = (0..n).map(|k| lwv(i, k) + incoming[k][i]).collect();
        for j in 0..n {
            if lwv(i, j) == f64::NEG_INFINITY {
                continue;
            }
            let others = terms.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &t)| t);
            let den = match how {
                Combine::Sum => logsumexp(others),
                Combine::Max => others.fold(f64::NEG_INFINITY, f64::max),
            };
            out[i][j] = (lwv(i, j) - den).clamp(-LOG_CAP, LOG_CAP);
        }
    }
    out
}

fn damp(old: &mut [Vec<f64>], new: &[Vec<f64>], alpha: f64) {
    for (o_row, n_row) in old.iter_mut().zip(new) {
        for (o, &nv) in o_row.iter_mut().zip(n_row) {
            if *o != f64::NEG_INFINITY {
                *o += alpha * (nv - *o);
            }
        }
    }
}

fn finite_mean(m: &[Vec<f64>]) -> f64 {
    let (s, c) = m.iter().flatten().filter(|v| v.is_finite()).fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    s / c.max(1) as f64
}

fn shift(m: &mut [Vec<f64>], t: f64) {
    m.iter_mut().flatten().filter(|v| v.is_finite()).for_each(|v| *v = (*v + t).clamp(-LOG_CAP, LOG_CAP));
}

/// Row beliefs `b_i(j) ~ sqrt(W_ij) mu_{j->i}` followed by column beliefs
/// `b_j(i) ~ sqrt(W_ij) nu_{i->j}`, flattened.
fn marginals(lw: &[Vec<f64>], msg: &Messages) -> Vec<f64> {
    let n = lw.len();
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        out.extend(normalize_log(&(0..n).map(|j| lw[i][j] + msg.mu[j][i]).collect::<Vec<_>>()));
    }
    for j in 0..n {
        out.extend(normalize_log(&(0..n).map(|i| lw[i][j] + msg.nu[i][j]).collect::<Vec<_>>()));
    }
    out
}

fn run_messages(w: &NonNegMatrix, alpha: f64, tol: f64, max_iter: usize, how: Combine) -> (Messages, usize, f64, bool) {
    let n = w.n();
    // log sqrt(W)
    let lw: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * w.get(i, j).ln()).collect())
        .collect();
    let init = |i: usize, j: usize| if w.get(i, j) > 0.0 { 0.0 } else { f64::NEG_INFINITY };
    let mut msg = Messages {
        nu: (0..n).map(|i| (0..n).map(|j| init(i, j)).collect()).collect(),
        mu: (0..n).map(|j| (0..n).map(|i| init(i, j)).collect()).collect(),
    };
    let mut residual = f64::INFINITY;
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        let nu_new = update(&lw, &msg.mu, false, &how);
        let mu_new = update(&lw, &msg.nu, true, &how);
        let before = marginals(&lw, &msg);
        damp(&mut msg.nu, &nu_new, alpha);
        damp(&mut msg.mu, &mu_new, alpha);
        // (ln nu - t, ln mu + t) leaves every belief unchanged; pinning it
        // keeps the iteration from drifting along that neutral direction
        let t = 0.5 * (finite_mean(&msg.nu) - finite_mean(&msg.mu));
        shift(&mut msg.nu, -t);
        shift(&mut msg.mu, t);
        // messages may run off along directions the beliefs do not see, so
        // convergence is judged on the beliefs
        residual = marginals(&lw, &msg).iter().zip(&before).fold(0.0, |r, (a, b)| r.max((a - b).abs()));
        if residual < tol {
            return (msg, iters, residual, true);
        }
    }
    (msg, iters, residual, false)
}

fn normalize_log(v: &[f64]) -> Vec<f64> {
    let z = logsumexp(v.iter().copied());
    v.iter().map(|&x| if x == f64::NEG_INFINITY { 0.0 } else { (x - z).exp() }).collect()
}

fn beliefs_from(w: &NonNegMatrix, msg: &Messages) -> BeliefState {
    let n = w.n();
    let lw = |i: usize, j: usize| 0.5 * w.get(i, j).ln();
    let mut pair = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            let mut logs = vec![f64::NEG_INFINITY; n * n];
            logs[j * n + i] = w.get(i, j).ln();
            for a in (0..n).filter(|&a| a != j) {
                for c in (0..n).filter(|&c| c != i) {
                    logs[a * n + c] = lw(i, a) + msg.mu[a][i] + lw(c, j) + msg.nu[c][j];
                }
            }
            let p = normalize_log(&logs);
            pair[(i * n + j) * n * n..(i * n + j + 1) * n * n].copy_from_slice(&p);
        }
    }
    // single marginals from the (0, 0) .. pair tables keep exact consistency
    // at a fixed point; average over partners elsewhere
    let mut x = vec![vec![0.0; n]; n];
    let mut y = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for c in 0..n {
                    let v = pair[(i * n + j) * n * n + a * n + c] / n as f64;
                    x[i][a] += v;
                    y[j][c] += v;
                }
            }
        }
    }
    BeliefState { n, x, y, pair }
}

/// Sum-product belief propagation on the assignment model, with
/// log-domain damping `ln m <- ln m + alpha (ln m_new - ln m)`.
///
/// A zero row or column short-circuits to the exact permanent 0.
pub fn bp_sum_product(w: &NonNegMatrix, opts: BpOptions) -> Result<BpResult> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::domain(format!("damping {} outside (0, 1]", opts.damping)));
    }
    let n = w.n();
    if w.has_zero_line() {
        return Ok(BpResult {
            f_bethe: f64::INFINITY,
            perm_bethe: 0.0,
            iterations: 0,
            converged: true,
            residual: 0.0,
            gamma: vec![vec![0.0; n]; n],
            beliefs: None,
        });
    }
    let (msg, iterations, residual, converged) =
        run_messages(w, opts.damping, opts.tol, opts.max_iter, Combine::Sum);
    let beliefs = beliefs_from(w, &msg);
    let gamma = beliefs.x.clone();
    let f_bethe = bethe_free_energy(&beliefs, w).unwrap_or_else(|_| bethe_free_energy_gamma(&gamma, w));
    Ok(BpResult {
        f_bethe,
        perm_bethe: (-f_bethe).exp(),
        iterations,
        converged,
        residual,
        gamma,
        beliefs: Some(beliefs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingResult {
    /// Log message ratios row-to-column (`nu`) and column-to-row (`mu`).
    pub nu: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    /// Normalised row beliefs `b(x_i = j)`.
    pub beliefs: Vec<Vec<f64>>,
    /// Row-wise argmax of the beliefs.
    pub assignment: Vec<usize>,
    pub is_permutation: bool,
    pub converged: bool,
    pub iterations: usize,
}

/// Max-product form of the ratio messages: every sum over competitors is
/// replaced by its largest term, which is the low-temperature limit. The
/// row-wise belief argmax then marks a maximum-product permutation.
pub fn minsum_matching(w: &NonNegMatrix, tol: f64, max_iter: usize) -> Result<MatchingResult> {
    let n = w.n();
    if w.has_zero_line() {
        return Err(Error::domain("a zero row or column admits no matching"));
    }
    let (msg, iterations, _, converged) = run_messages(w, 0.5, tol, max_iter, Combine::Max);
    let beliefs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let logs: Vec<f64> = (0..n).map(|j| 0.5 * w.get(i, j).ln() + msg.mu[j][i]).collect();
            normalize_log(&logs)
        })
        .collect();
    let assignment: Vec<usize> = beliefs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(j, _)| j)
                .unwrap_or(0)
        })
        .collect();
    let mut seen = vec![false; n];
    let is_permutation = assignment.iter().all(|&j| !std::mem::replace(&mut seen[j], true));
    Ok(MatchingResult {
        nu: msg.nu,
        mu: msg.mu,
        beliefs,
        assignment,
        is_permutation,
        converged,
        iterations,
    })
}

/// Cycle index of the symmetric group, `Z(S_M)`, evaluated at
/// `a[0] = a_1, ..., a[M-1] = a_M` by `Z(S_M) = (1/M) sum_l a_l Z(S_{M-l})`.
pub fn cycle_index(m: usize, a: &[f64]) -> Result<f64> {
    if a.len() < m {
        return Err(Error::domain(format!("need {m} variables, got {}", a.len())));
    }
    let mut z = vec![1.0f64; m + 1];
    for k in 1..=m {
        z[k] = (1..=k).map(|l| a[l - 1] * z[k - l]).sum::<f64>() / k as f64;
    }
    Ok(z[m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[Vec<f64>]) -> NonNegMatrix {
        NonNegMatrix::from_rows(rows).unwrap()
    }

    fn random(n: usize, rng: &mut ChaCha8Rng) -> NonNegMatrix {
        NonNegMatrix::new(n, (0..n * n).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_perm(w: &NonNegMatrix) -> f64 {
        permutations(w.n())
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| w.get(i, j)).product::<f64>())
            .sum()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(permanent_exact(&m(&[vec![1.0, 1.0], vec![1.0, 1.0]])).unwrap(), 2.0);
        let id: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        assert_eq!(permanent_exact(&m(&id)).unwrap(), 1.0);
        assert!((permanent_exact(&m(&vec![vec![1.0; 3]; 3])).unwrap() - 6.0).abs() < 1e-12);
        assert!(permanent_exact(&NonNegMatrix::new(21, vec![1.0; 441]).unwrap()).is_err());
    }

    #[test]
    fn exact_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=6 {
            let w = random(n, &mut rng);
            let (a, b) = (permanent_exact(&w).unwrap(), brute_perm(&w));
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn bp_single_entry_is_exact() {
        let r = bp_sum_product(&m(&[vec![3.5]]), BpOptions::default()).unwrap();
        assert!((r.perm_bethe - 3.5).abs() < 1e-12);
    }

    #[test]
    fn bp_bounds_two_by_two() {
        let w = m(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let r = bp_sum_product(&w, BpOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.perm_bethe <= 2.0 * (1.0 + 1e-9));
        // internal consistency between the two parametrisations
        let g = bethe_free_energy_gamma(&r.gamma, &w);
        assert!((g - r.f_bethe).abs() < 1e-8, "{g} vs {}", r.f_bethe);
        let fb = bethe_free_energy(r.beliefs.as_ref().unwrap(), &w).unwrap();
        assert!((fb - r.f_bethe).abs() < 1e-12);
    }

    #[test]
    fn bp_acyclic_support_is_exact() {
        let w = m(&[vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 0.5]]);
        let r = bp_sum_product(&w, BpOptions::default()).unwrap();
        assert!((r.perm_bethe - 3.0).abs() < 3.0 * 1e-9, "{}", r.perm_bethe);
    }

    #[test]
    fn bp_random_five_by_five_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut ok = 0;
        for _ in 0..100 {
            let w = random(5, &mut rng);
            let r = bp_sum_product(&w, BpOptions::default()).unwrap();
            ok += usize::from(r.converged);
            assert!(r.perm_bethe <= permanent_exact(&w).unwrap() * (1.0 + 1e-9));
        }
        assert!(ok >= 95, "{ok}");
    }

    #[test]
    fn zero_row_short_circuits() {
        let r = bp_sum_product(&m(&[vec![0.0, 0.0], vec![1.0, 1.0]]), BpOptions::default()).unwrap();
        assert_eq!(r.perm_bethe, 0.0);
        assert_eq!(permanent_exact(&m(&[vec![0.0, 0.0], vec![1.0, 1.0]])).unwrap(), 0.0);
    }

    #[test]
    fn free_energy_examples() {
        let b = BeliefState::from_permutation_mixture(1, &[(1.0, vec![0])]).unwrap();
        assert_eq!(bethe_free_energy(&b, &m(&[vec![1.0]])).unwrap(), 0.0);
        let w = m(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let uniform = BeliefState::from_permutation_mixture(2, &[(0.5, vec![0, 1]), (0.5, vec![1, 0])]).unwrap();
        let fu = bethe_free_energy(&uniform, &w).unwrap();
        let r = bp_sum_product(&w, BpOptions::default()).unwrap();
        assert!(fu.is_finite() && fu >= r.f_bethe - 1e-9);
        let mut bad = uniform.clone();
        bad.x[0][0] = 0.9;
        assert!(bethe_free_energy(&bad, &w).is_err());
    }

    #[test]
    fn fixed_point_beats_random_mixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = random(4, &mut rng);
        let r = bp_sum_product(&w, BpOptions::default()).unwrap();
        let perms = permutations(4);
        for _ in 0..50 {
            let k = rng.random_range(1..6);
            let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
            let s: f64 = weights.iter().sum();
            let mix: Vec<(f64, Vec<usize>)> = weights
                .iter()
                .map(|&p| (p / s, perms[rng.random_range(0..perms.len())].clone()))
                .collect();
            let b = BeliefState::from_permutation_mixture(4, &mix).unwrap();
            assert!(bethe_free_energy(&b, &w).unwrap() >= r.f_bethe - 1e-9);
        }
    }

    #[test]
    fn matching_examples() {
        let r = minsum_matching(&m(&[vec![2.0, 1.0], vec![1.0, 2.0]]), 1e-10, 1000).unwrap();
        assert_eq!(r.assignment, vec![0, 1]);
        let n = 5;
        let w: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.01 + f64::from(u8::from(i == j))).collect()).collect();
        let r = minsum_matching(&m(&w), 1e-10, 1000).unwrap();
        assert_eq!(r.assignment, (0..n).collect::<Vec<_>>());
        let p = [2usize, 0, 3, 1];
        let w: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| f64::from(u8::from(p[i] == j))).collect()).collect();
        let r = minsum_matching(&m(&w), 1e-10, 1000).unwrap();
        assert_eq!(r.assignment, p.to_vec());
        assert!(r.beliefs.iter().zip(p).all(|(row, j)| row[j] > 0.999));
    }

    #[test]
    fn matching_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=6 {
            let w = random(n, &mut rng);
            let best = permutations(n)
                .into_iter()
                .max_by(|a, b| {
                    let pa: f64 = a.iter().enumerate().map(|(i, &j)| w.get(i, j)).product();
                    let pb: f64 = b.iter().enumerate().map(|(i, &j)| w.get(i, j)).product();
                    pa.total_cmp(&pb)
                })
                .unwrap();
            let r = minsum_matching(&w, 1e-12, 5000).unwrap();
            if r.converged {
                assert_eq!(r.assignment, best);
            }
        }
    }

    #[test]
    fn cycle_index_examples() {
        assert_eq!(cycle_index(0, &[]).unwrap(), 1.0);
        assert_eq!(cycle_index(1, &[3.0]).unwrap(), 3.0);
        let (a1, a2, a3) = (2.0, 5.0, 7.0);
        assert!((cycle_index(2, &[a1, a2]).unwrap() - (a1 * a1 + a2) / 2.0).abs() < 1e-12);
        let s3 = (a1 * a1 * a1 + 3.0 * a1 * a2 + 2.0 * a3) / 6.0;
        assert!((cycle_index(3, &[a1, a2, a3]).unwrap() - s3).abs() < 1e-12);
        // all a_l = 1 counts one orbit
        assert!((cycle_index(6, &[1.0; 6]).unwrap() - 1.0).abs() < 1e-12);
    }
}
