//! Benchmark driver: every method on every dataset at a matched budget.

use std::time::Instant;

use rayon::prelude::*;

use crate::data::{load_dataset, Dataset, DatasetSpec, Report, ReportRow};
use crate::error::{Error, Result};
use crate::factor::{masks_for, sf_optimize, tsvd, Budget, Method};

/// A dataset already in memory or one still to be loaded from disk.
#[derive(Debug, Clone)]
pub enum BenchSource {
    Ready(Dataset),
    File(DatasetSpec),
}

impl BenchSource {
    pub fn name(&self) -> &str {
        match self {
            BenchSource::Ready(d) => &d.name,
            BenchSource::File(s) => &s.name,
        }
    }

    pub fn declared_n(&self) -> usize {
        match self {
            BenchSource::Ready(d) => d.n(),
            BenchSource::File(s) => s.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub iters: usize,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    /// When false the `seconds` column is written as zero so reports are
    /// byte-identical between runs.
    pub timing: bool,
}

impl BenchConfig {
    pub fn new(methods: Vec<Method>, iters: usize) -> Self {
        BenchConfig {
            methods,
            iters,
            seeds: vec![0],
            jobs: 1,
            timing: true,
        }
    }
}

/// One row per (dataset, method, seed), ordered as the inputs. Datasets
/// that fail to load or methods that fail to run yield rows with mask
/// `skipped` and a `nan` error; the run carries on.
pub fn benchmark(sources: &[BenchSource], cfg: &BenchConfig) -> Result<Report> {
    if cfg.iters == 0 || cfg.seeds.is_empty() || cfg.methods.is_empty() {
        return Err(Error::domain("benchmark needs iters >= 1, a seed and a method"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    let loaded: Vec<std::result::Result<Dataset, String>> = sources
        .iter()
        .map(|s| match s {
            BenchSource::Ready(d) => Ok(d.clone()),
            BenchSource::File(spec) => load_dataset(spec).map_err(|e| e.to_string()),
        })
        .collect();
    let tasks: Vec<(usize, Method, u64)> = (0..sources.len())
        .flat_map(|d| cfg.methods.iter().flat_map(move |&m| cfg.seeds.iter().map(move |&s| (d, m, s))))
        .collect();
    let rows = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(d, method, seed)| {
                let skipped = || {
                    ReportRow::new(sources[d].name(), sources[d].declared_n(), method.as_str(), "skipped", 0, 0, seed, f64::NAN, f64::NAN)
                };
                let Ok(ds) = &loaded[d] else {
                    return skipped();
                };
                run_one(ds, method, cfg.iters, seed, cfg.timing).unwrap_or_else(|_| skipped())
            })
            .collect()
    });
    Ok(Report { rows })
}

fn run_one(ds: &Dataset, method: Method, iters: usize, seed: u64, timing: bool) -> Result<ReportRow> {
    let budget = Budget::new(ds.n())?;
    let t0 = Instant::now();
    let (err, nnz, done) = match method {
        Method::Tsvd => (tsvd(&ds.matrix, budget.tsvd_rank)?.error, budget.tsvd_nnz(), 0),
        _ => {
            let masks = masks_for(method, &budget, seed)?;
            let res = sf_optimize(&ds.matrix, &masks, iters, seed)?;
            (res.final_fnorm, res.factors.nnz(), res.iterations)
        }
    };
    let secs = if timing { t0.elapsed().as_secs_f64() } else { 0.0 };
    Ok(ReportRow::new(&ds.name, ds.n(), method.as_str(), method.mask_name(), nnz, done, seed, err, secs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{chessboard, DatasetKind};
    use std::path::PathBuf;

    #[test]
    fn skipped_rows_and_order() {
        let sources = vec![
            BenchSource::File(DatasetSpec {
                name: "missing".into(),
                kind: DatasetKind::Network,
                source: PathBuf::from("/nonexistent/x.mtx"),
                n: 10,
            }),
            BenchSource::Ready(Dataset {
                name: "cb".into(),
                kind: DatasetKind::Image,
                matrix: chessboard(16, 4),
            }),
        ];
        let mut cfg = BenchConfig::new(vec![Method::Tsvd, Method::SfChord], 20);
        cfg.timing = false;
        cfg.jobs = 2;
        let rep = benchmark(&sources, &cfg).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert!(rep.rows[..2].iter().all(|r| r.mask == "skipped" && r.fnorm_error.is_none()));
        assert_eq!(rep.rows[2].method, "tsvd");
        assert!(rep.rows[2].fnorm_error.unwrap() < 1e-9);
        assert_eq!(rep.rows[3].mask, "chord");
        assert_eq!(benchmark(&sources, &cfg).unwrap(), rep);
    }
}
