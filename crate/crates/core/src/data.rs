//! Dataset loaders (MatrixMarket, CSV covariance, PGM images), offline
//! synthetic stand-ins for each dataset kind, and benchmark reports.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fmt::sci;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    DenseGraph,
    Network,
    SurfaceMesh,
    Covariance,
    Image,
}

/// Registry entry: where a dataset lives and what order it must have.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub kind: DatasetKind,
    pub source: PathBuf,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub datasets: Vec<DatasetSpec>,
}

impl Registry {
    /// Reads a registry; relative sources resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reg: Registry = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut reg.datasets {
            if d.source.is_relative() {
                d.source = base.join(&d.source);
            }
        }
        Ok(reg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub kind: DatasetKind,
    pub matrix: DMatrix<f64>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Loads a registry entry; images become gradient magnitudes, `.csv`
/// covariance sources become sample covariances.
pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let ext = spec.source.extension().and_then(|e| e.to_str()).unwrap_or("");
    let matrix = match (spec.kind, ext) {
        (DatasetKind::Image, _) => gradient_magnitude(&load_image_gray(&spec.source)?),
        (DatasetKind::Covariance, "csv") => covariance_from_csv(&spec.source)?,
        _ => load_matrix_market(&spec.source)?,
    };
    if matrix.nrows() != spec.n {
        return Err(Error::domain(format!(
            "{} has order {}, registry says {}",
            spec.name,
            matrix.nrows(),
            spec.n
        )));
    }
    Ok(Dataset {
        name: spec.name.clone(),
        kind: spec.kind,
        matrix,
    })
}

pub fn load_matrix_market(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

/// Coordinate or array storage; general, symmetric or skew-symmetric.
pub fn parse_matrix_market<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut lines = r.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let banner = banner?.to_lowercase();
    let tok: Vec<&str> = banner.split_whitespace().collect();
    if tok.len() < 5 || tok[0] != "%%matrixmarket" || tok[1] != "matrix" {
        return Err(Error::parse(1, "missing %%MatrixMarket matrix banner"));
    }
    let (format, field, symmetry) = (tok[2], tok[3], tok[4]);
    if !matches!(format, "coordinate" | "array") {
        return Err(Error::parse(1, format!("unsupported format {format}")));
    }
    if !matches!(field, "real" | "integer" | "pattern" | "double") {
        return Err(Error::parse(1, format!("unsupported field {field}")));
    }
    let sign = match symmetry {
        "general" => None,
        "symmetric" => Some(1.0),
        "skew-symmetric" => Some(-1.0),
        s => return Err(Error::parse(1, format!("unsupported symmetry {s}"))),
    };
    let mut body = lines.filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim_start().starts_with('%') && !s.trim().is_empty()));
    let (ln, size) = body.next().ok_or_else(|| Error::parse(1, "missing size line"))?;
    let dims: Vec<usize> = size?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(ln, format!("bad size token {t:?}"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match dims[..] {
        [r, c, _] if format == "coordinate" => (r, c),
        [r, c] if format == "array" => (r, c),
        _ => return Err(Error::parse(ln, "malformed size line")),
    };
    if rows != cols {
        return Err(Error::parse(ln, format!("matrix is {rows}x{cols}, not square")));
    }
    let n = rows;
    let mut m = DMatrix::zeros(n, n);
    let num = |ln: usize, t: &str| t.parse::<f64>().map_err(|_| Error::parse(ln, format!("bad number {t:?}")));
    if format == "coordinate" {
        let nnz = dims[2];
        let mut seen = 0;
        for (ln, line) in body {
            let line = line?;
            let t: Vec<&str> = line.split_whitespace().collect();
            let (i, j, v) = match (field, &t[..]) {
                ("pattern", [i, j, ..]) => (i, j, 1.0),
                (_, [i, j, v, ..]) => (i, j, num(ln, v)?),
                _ => return Err(Error::parse(ln, "expected `i j value`")),
            };
            let idx = |s: &str| match s.parse::<usize>() {
                Ok(k) if (1..=n).contains(&k) => Ok(k - 1),
                _ => Err(Error::parse(ln, format!("index {s:?} outside 1..={n}"))),
            };
            let (i, j) = (idx(i)?, idx(j)?);
            m[(i, j)] += v;
            if let Some(s) = sign {
                if i != j {
                    m[(j, i)] += s * v;
                }
            }
            seen += 1;
        }
        if seen != nnz {
            return Err(Error::parse(ln, format!("expected {nnz} entries, found {seen}")));
        }
    } else {
        // column-major; symmetric storage lists the lower triangle only
        let cells: Vec<(usize, usize)> = match sign {
            None => (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).collect(),
            Some(1.0) => (0..n).flat_map(|j| (j..n).map(move |i| (i, j))).collect(),
            Some(_) => (0..n).flat_map(|j| (j + 1..n).map(move |i| (i, j))).collect(),
        };
        let mut values = Vec::with_capacity(cells.len());
        for (ln, line) in body {
            for t in line?.split_whitespace() {
                values.push(num(ln, t)?);
            }
        }
        if values.len() != cells.len() {
            return Err(Error::parse(ln, format!("expected {} values, found {}", cells.len(), values.len())));
        }
        for (&(i, j), v) in cells.iter().zip(values) {
            m[(i, j)] = v;
            if let Some(s) = sign {
                m[(j, i)] = s * v;
            }
        }
    }
    Ok(m)
}

pub fn write_matrix_market<W: Write>(m: &DMatrix<f64>, mut w: W) -> Result<()> {
    let n = m.nrows();
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != 0.0)
        .map(|(i, j)| (i, j, m[(i, j)]))
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {v:?}", i + 1, j + 1)?;
    }
    Ok(())
}

pub fn covariance_from_csv(path: &Path) -> Result<DMatrix<f64>> {
    parse_covariance_csv(File::open(path)?)
}

/// Unbiased sample covariance of the columns. A first row with no
/// numeric cell is taken as a header.
pub fn parse_covariance_csv<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(k + 1, e))?;
        if k == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .map_err(|_| Error::parse(k + 1, format!("column {}: non-numeric cell {cell:?}", c + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::domain("covariance needs at least two rows"));
    }
    let d = rows[0].len();
    let data = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    Ok(covariance(&data))
}

/// Unbiased covariance of the columns of `data` (rows are instances).
pub fn covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let (s, d) = data.shape();
    let mean = data.row_mean();
    let centered = DMatrix::from_fn(s, d, |i, j| data[(i, j)] - mean[j]);
    let c = centered.transpose() * &centered / (s as f64 - 1.0);
    // exact symmetry
    DMatrix::from_fn(d, d, |i, j| if i <= j { c[(i, j)] } else { c[(j, i)] })
}

/// Square 8-bit grayscale PGM (P5 or P2), scaled to `[0, 1]`.
pub fn load_image_gray(path: &Path) -> Result<DMatrix<f64>> {
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| Error::domain(format!("cannot decode {}: {e}", path.display())))?;
    let image::DynamicImage::ImageLuma8(g) = img else {
        return Err(Error::domain(format!("{} is not 8-bit grayscale", path.display())));
    };
    let (w, h) = g.dimensions();
    if w != h {
        return Err(Error::domain(format!("image is {w}x{h}, not square")));
    }
    let n = w as usize;
    Ok(DMatrix::from_fn(n, n, |i, j| f64::from(g.get_pixel(j as u32, i as u32)[0]) / 255.0))
}

/// Writes values in `[0, 1]` as a binary PGM.
pub fn save_image_gray(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let (h, w) = m.shape();
    let img = image::GrayImage::from_fn(w as u32, h as u32, |x, y| {
        image::Luma([(m[(y as usize, x as usize)].clamp(0.0, 1.0) * 255.0).round() as u8])
    });
    img.save_with_format(path, image::ImageFormat::Pnm)
        .map_err(|e| Error::domain(format!("cannot write {}: {e}", path.display())))
}

/// `sqrt(Gx^2 + Gy^2)` with central differences and replicated borders.
pub fn gradient_magnitude(img: &DMatrix<f64>) -> DMatrix<f64> {
    let (h, w) = img.shape();
    let at = |i: isize, j: isize| img[(i.clamp(0, h as isize - 1) as usize, j.clamp(0, w as isize - 1) as usize)];
    DMatrix::from_fn(h, w, |i, j| {
        let (i, j) = (i as isize, j as isize);
        let gx = (at(i, j + 1) - at(i, j - 1)) / 2.0;
        let gy = (at(i + 1, j) - at(i - 1, j)) / 2.0;
        (gx * gx + gy * gy).sqrt()
    })
}

/// Similarity to dissimilarity: `d_ij = sqrt(s_ii + s_jj - s_ji - s_ij)`.
pub fn similarity_to_dissimilarity(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    DMatrix::from_fn(n, n, |i, j| (s[(i, i)] + s[(j, j)] - s[(j, i)] - s[(i, j)]).max(0.0).sqrt())
}

/// Chessboard of `cells x cells` squares on an `n x n` grid (rank <= 2).
pub fn chessboard(n: usize, cells: usize) -> DMatrix<f64> {
    let side = n.div_ceil(cells.max(1)).max(1);
    DMatrix::from_fn(n, n, |i, j| f64::from(u8::from((i / side + j / side) % 2 == 0)))
}

/// Photo-like 8-bit image: smooth shading, hard-edged shapes and grain.
pub fn photo_like(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| (rng.random::<f64>() * nf, rng.random::<f64>() * nf, nf * (0.1 + 0.3 * rng.random::<f64>()), rng.random::<f64>() - 0.5))
        .collect();
    let discs: Vec<(f64, f64, f64, f64)> = (0..12)
        .map(|_| (rng.random::<f64>() * nf, rng.random::<f64>() * nf, nf * (0.03 + 0.12 * rng.random::<f64>()), 0.6 * rng.random::<f64>() - 0.3))
        .collect();
    let rects: Vec<(f64, f64, f64, f64, f64)> = (0..8)
        .map(|_| {
            let (a, b) = (rng.random::<f64>() * nf, rng.random::<f64>() * nf);
            (a, b, a + nf * 0.25 * rng.random::<f64>(), b + nf * 0.25 * rng.random::<f64>(), 0.5 * rng.random::<f64>() - 0.25)
        })
        .collect();
    let grain: Vec<f64> = (0..n * n).map(|_| 0.04 * (rng.random::<f64>() - 0.5)).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let (y, x) = (i as f64, j as f64);
        let mut v = 0.5;
        for &(cy, cx, r, a) in &blobs {
            v += a * (-((y - cy).powi(2) + (x - cx).powi(2)) / (2.0 * r * r)).exp();
        }
        for &(cy, cx, r, a) in &discs {
            if (y - cy).powi(2) + (x - cx).powi(2) < r * r {
                v += a;
            }
        }
        for &(y0, x0, y1, x1, a) in &rects {
            if (y0..y1).contains(&y) && (x0..x1).contains(&x) {
                v += a;
            }
        }
        ((v + grain[i * n + j]).clamp(0.0, 1.0) * 255.0).round() / 255.0
    })
}

/// Random symmetric 0/1 adjacency with `edges` undirected edges.
pub fn er_network(n: usize, edges: usize, seed: u64) -> Result<DMatrix<f64>> {
    if edges > n * (n - 1) / 2 {
        return Err(Error::domain(format!("{edges} edges do not fit {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    let mut placed = 0;
    while placed < edges {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && m[(a, b)] == 0.0 {
            m[(a, b)] = 1.0;
            m[(b, a)] = 1.0;
            placed += 1;
        }
    }
    Ok(m)
}

/// Graph Laplacian of a random geometric mesh: points uniform in the unit
/// square joined by their `edges` shortest pairs.
pub fn random_mesh(n: usize, edges: usize, seed: u64) -> Result<DMatrix<f64>> {
    if edges > n * n.saturating_sub(1) / 2 {
        return Err(Error::domain(format!("{edges} edges do not fit {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let d = |i: usize, j: usize| (pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|&(a, b), &(c, e)| d(a, b).total_cmp(&d(c, e)).then((a, b).cmp(&(c, e))));
    let mut lap = DMatrix::zeros(n, n);
    for &(i, j) in pairs.iter().take(edges) {
        lap[(i, j)] = -1.0;
        lap[(j, i)] = -1.0;
        lap[(i, i)] += 1.0;
        lap[(j, j)] += 1.0;
    }
    Ok(lap)
}

/// Sample covariance of `samples` draws of `dim` correlated Gaussians with
/// a decaying spectrum.
pub fn gaussian_covariance(dim: usize, samples: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix = DMatrix::from_fn(dim, dim, |_, j| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z / (1.0 + j as f64)
    });
    let z = DMatrix::<f64>::from_fn(samples, dim, |_, _| StandardNormal.sample(&mut rng));
    covariance(&(z * mix.transpose()))
}

/// Covariance of binary votes driven by a few latent blocs.
pub fn votes_covariance(dim: usize, samples: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocs = 3;
    let lean: Vec<Vec<f64>> = (0..blocs).map(|_| (0..dim).map(|_| rng.random()).collect()).collect();
    let data = DMatrix::from_fn(samples, dim, |_, _| 0.0);
    let mut data = data;
    for s in 0..samples {
        let b = rng.random_range(0..blocs);
        for d in 0..dim {
            data[(s, d)] = f64::from(u8::from(rng.random::<f64>() < lean[b][d]));
        }
    }
    covariance(&data)
}

/// Offline stand-ins mirroring the sizes of the small real datasets, plus
/// gradient-magnitude images and a chessboard at `N = 256`.
pub fn synthetic_suite(seed: u64) -> Vec<Dataset> {
    let ds = |name: &str, kind, matrix| Dataset {
        name: name.to_string(),
        kind,
        matrix,
    };
    let mut out = vec![
        ds("sawmill_syn", DatasetKind::Network, er_network(36, 62, seed).expect("fits")),
        ds("strike_syn", DatasetKind::Network, er_network(24, 19, seed + 1).expect("fits")),
        ds("mexican_power_syn", DatasetKind::Network, er_network(35, 58, seed + 2).expect("fits")),
        ds("mesh1e1_syn", DatasetKind::SurfaceMesh, random_mesh(48, 129, seed + 3).expect("fits")),
        ds("votes_syn", DatasetKind::Covariance, votes_covariance(16, 435, seed + 4)),
        ds("pendigits_syn", DatasetKind::Covariance, gaussian_covariance(16, 10992, seed + 5)),
    ];
    for k in 0..3 {
        out.push(ds(
            &format!("grad_photo{k}_syn"),
            DatasetKind::Image,
            gradient_magnitude(&photo_like(256, seed + 10 + k)),
        ));
    }
    out.push(ds("chessboard_syn", DatasetKind::Image, chessboard(256, 8)));
    out
}

fn ser_sci<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.map_or_else(|| "nan".to_string(), sci))
}

fn de_sci<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    let s = String::deserialize(d)?;
    if s == "nan" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

/// One benchmark measurement. Floats are rounded to the `%.6e` grid on
/// construction so every serialisation round-trips exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub method: String,
    pub mask: String,
    pub nnz: usize,
    pub iters: usize,
    pub seed: u64,
    #[serde(serialize_with = "ser_sci", deserialize_with = "de_sci")]
    pub fnorm_error: Option<f64>,
    #[serde(serialize_with = "ser_sci", deserialize_with = "de_sci")]
    pub seconds: Option<f64>,
}

fn round_sci(v: f64) -> Option<f64> {
    v.is_finite().then(|| sci(v).parse().expect("formatted float parses"))
}

impl ReportRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(dataset: &str, n: usize, method: &str, mask: &str, nnz: usize, iters: usize, seed: u64, fnorm_error: f64, seconds: f64) -> Self {
        ReportRow {
            dataset: dataset.to_string(),
            n,
            method: method.to_string(),
            mask: mask.to_string(),
            nnz,
            iters,
            seed,
            fnorm_error: round_sci(fnorm_error),
            seconds: round_sci(seconds),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

pub const REPORT_COLUMNS: [&str; 9] = ["dataset", "N", "method", "mask", "nnz", "iters", "seed", "fnorm_error", "seconds"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl Report {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::domain(format!("csv write failed: {e}"));
        wtr.write_record(REPORT_COLUMNS).map_err(io)?;
        for r in &self.rows {
            let f = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), sci);
            wtr.write_record([
                r.dataset.clone(),
                r.n.to_string(),
                r.method.clone(),
                r.mask.clone(),
                r.nnz.to_string(),
                r.iters.to_string(),
                r.seed.to_string(),
                f(r.fnorm_error),
                f(r.seconds),
            ])
            .map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// JSON array of row objects with sorted keys.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let value = serde_json::to_value(&self.rows)?;
        serde_json::to_writer_pretty(&mut w, &value)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(Report {
            rows: serde_json::from_reader(r)?,
        })
    }
}

pub fn save_report(report: &Report, path: &Path, format: ReportFormat) -> Result<()> {
    let f = std::io::BufWriter::new(File::create(path)?);
    match format {
        ReportFormat::Csv => report.write_csv(f),
        ReportFormat::Json => report.write_json(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_coordinate_and_symmetric() {
        let m = parse_matrix_market(&b"%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n1 2 3.5\n"[..]).unwrap();
        assert_eq!(m.iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(m[(0, 1)], 3.5);
        let s = parse_matrix_market(&b"%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2\n2 1 -1\n3 2 4\n"[..]).unwrap();
        assert_eq!(s, s.transpose());
        let a = parse_matrix_market(&b"%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"[..]).unwrap();
        assert_eq!(a[(1, 0)], 2.0);
        assert_eq!(a[(0, 1)], 3.0);
        assert!(parse_matrix_market(&b"%%MatrixMarket matrix coordinate real general\n2 3 0\n"[..]).is_err());
        assert!(parse_matrix_market(&b"garbage\n"[..]).is_err());
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = random_mesh(12, 20, 1).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        assert_eq!(parse_matrix_market(&buf[..]).unwrap(), m);
    }

    #[test]
    fn covariance_examples() {
        let c = parse_covariance_csv(&b"1,2\n1,2\n"[..]).unwrap();
        assert!(c.iter().all(|v| *v == 0.0));
        let c = parse_covariance_csv(&b"a,b\n0,0\n1,1\n"[..]).unwrap();
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]));
        match parse_covariance_csv(&b"0,0\n1,x\n"[..]) {
            Err(Error::Parse { line, msg }) => assert!(line == 2 && msg.contains("column 2")),
            other => panic!("{other:?}"),
        }
        let c = gaussian_covariance(16, 500, 3);
        assert_eq!(c, c.transpose());
        assert!(c.clone().symmetric_eigenvalues().min() >= -1e-10);
    }

    #[test]
    fn gradient_examples() {
        let g = gradient_magnitude(&DMatrix::from_element(6, 6, 0.3));
        assert!(g.iter().all(|v| *v == 0.0));
        let step = DMatrix::from_fn(6, 6, |_, j| if j >= 3 { 1.0 } else { 0.0 });
        let g = gradient_magnitude(&step);
        for i in 0..6 {
            for j in 0..6 {
                let expect = if j == 2 || j == 3 { 0.5 } else { 0.0 };
                assert_eq!(g[(i, j)], expect);
            }
        }
        assert!(gradient_magnitude(&photo_like(32, 1)).iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn synthetic_suite_sizes() {
        let nnz = |m: &DMatrix<f64>| m.iter().filter(|v| **v != 0.0).count();
        let suite = synthetic_suite(0);
        let by = |name: &str| suite.iter().find(|d| d.name == name).unwrap();
        assert_eq!((by("sawmill_syn").n(), nnz(&by("sawmill_syn").matrix)), (36, 124));
        assert_eq!((by("strike_syn").n(), nnz(&by("strike_syn").matrix)), (24, 38));
        let mesh = &by("mesh1e1_syn").matrix;
        assert_eq!((mesh.nrows(), nnz(mesh)), (48, 306));
        assert_eq!(by("pendigits_syn").n(), 16);
        assert_eq!(by("grad_photo0_syn").n(), 256);
        assert_eq!(synthetic_suite(0), suite);
    }

    #[test]
    fn chessboard_has_rank_two() {
        let c = chessboard(256, 8);
        let s = c.singular_values();
        assert_eq!(s.iter().filter(|v| **v > 1e-9 * s.max()).count(), 2);
    }

    #[test]
    fn image_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        let img = photo_like(16, 2);
        save_image_gray(&img, &p).unwrap();
        let back = load_image_gray(&p).unwrap();
        assert!((back - img).abs().max() < 1e-12);
        let q = dir.path().join("b.pgm");
        std::fs::write(&q, b"P2\n3 2\n255\n0 1 2\n3 4 5\n").unwrap();
        assert!(load_image_gray(&q).is_err());
    }

    #[test]
    fn dissimilarity_transform() {
        let s = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let d = similarity_to_dissimilarity(&s);
        assert_eq!(d[(0, 0)], 0.0);
        assert_eq!(d[(0, 1)], 2.0);
    }

    #[test]
    fn reports() {
        let mut buf = Vec::new();
        Report::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "dataset,N,method,mask,nnz,iters,seed,fnorm_error,seconds\n");
        let rep = Report {
            rows: vec![
                ReportRow::new("d", 16, "sf_chord", "chord", 256, 100, 0, 0.123456789, 1.5),
                ReportRow::new("e", 16, "tsvd", "skipped", 0, 0, 0, f64::NAN, 0.0),
            ],
        };
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "d,16,sf_chord,chord,256,100,0,1.234568e-01,1.500000e+00");
        assert_eq!(lines[1].split(',').count(), 9);
        let mut js = Vec::new();
        rep.write_json(&mut js).unwrap();
        assert_eq!(Report::read_json(&js[..]).unwrap(), rep);
    }

    #[test]
    fn registry_loading() {
        let dir = tempfile::tempdir().unwrap();
        let m = random_mesh(10, 15, 0).unwrap();
        write_matrix_market(&m, File::create(dir.path().join("m.mtx")).unwrap()).unwrap();
        std::fs::write(
            dir.path().join("reg.json"),
            r#"{"datasets":[{"name":"m","kind":"surface_mesh","source":"m.mtx","N":10},{"name":"bad","kind":"network","source":"missing.mtx","N":5}]}"#,
        )
        .unwrap();
        let reg = Registry::load(&dir.path().join("reg.json")).unwrap();
        assert_eq!(load_dataset(&reg.datasets[0]).unwrap().matrix, m);
        assert!(load_dataset(&reg.datasets[1]).is_err());
    }
}
