//! Seeded synthetic workloads on the `[0, 1000]^D` domain and CSV
//! ingestion.
//!
//! The correlated and anti-correlated recipes follow the classic skyline
//! benchmark generator on the unit cube, scaled by 1000:
//!
//! * `Uniform`: every coordinate independent uniform.
//! * `Correlated`: pick `v` from a triangular distribution on `[0, 1]`
//!   (the classic generator peaks it with `D` draws, which flattens the
//!   correlation as `D` grows; two draws keep it above 0.7 up to `D = 8`),
//!   put every coordinate at `v`, then shift mass between pairs of neighbouring
//!   coordinates by a normal amount bounded by the distance to the cube
//!   faces. Points hug the main diagonal.
//! * `AntiCorrelated`: pick `v` from a tight normal around 0.5 and spread
//!   the point uniformly within the plane `sum(x) = D * v`. Points hug the
//!   anti-diagonal plane.
//!
//! Draws that leave the cube are rejected and redrawn.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub const DOMAIN_MAX: f64 = 1000.0;
pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform,
    Correlated,
    AntiCorrelated,
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "un" | "uniform" => Ok(Distribution::Uniform),
            "co" | "correlated" => Ok(Distribution::Correlated),
            "ac" | "anticorrelated" | "anti-correlated" => Ok(Distribution::AntiCorrelated),
            other => Err(Error::InvalidSpec(format!("unknown distribution {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub distribution: Distribution,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if !(MIN_DIM..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidSpec(format!(
                "dimension {} outside {MIN_DIM}..={MAX_DIM}",
                self.dim
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Variance of the additive Gaussian noise, in squared domain units.
    pub variance: f64,
    pub seed: u64,
}

fn peak(rng: &mut impl Rng, min: f64, max: f64, dim: usize) -> f64 {
    let sum: f64 = (0..dim).map(|_| rng.random::<f64>()).sum();
    min + (max - min) * sum / dim as f64
}

/// Approximately normal, bounded to `[med - var, med + var]`.
fn bounded_normal(rng: &mut impl Rng, med: f64, var: f64) -> f64 {
    peak(rng, med - var, med + var, 12)
}

fn in_unit_cube(x: &[f64]) -> bool {
    x.iter().all(|v| (0.0..=1.0).contains(v))
}

fn correlated(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v = peak(rng, 0.0, 1.0, 2);
        let mut x = vec![v; dim];
        let l = v.min(1.0 - v);
        for d in 0..dim {
            let h = bounded_normal(rng, 0.0, l);
            x[d] += h;
            x[(d + 1) % dim] -= h;
        }
        if in_unit_cube(&x) {
            return x;
        }
    }
}

fn anti_correlated(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v = bounded_normal(rng, 0.5, 0.25);
        let mut x = vec![v; dim];
        let l = v.min(1.0 - v);
        for d in 0..dim {
            let h = if l > 0.0 { rng.random_range(-l..l) } else { 0.0 };
            x[d] += h;
            x[(d + 1) % dim] -= h;
        }
        if in_unit_cube(&x) {
            return x;
        }
    }
}

/// `spec.n` points with ids `0..n`, deterministic per seed.
pub fn generate(spec: &GenSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.n)
        .map(|i| {
            let unit = match spec.distribution {
                Distribution::Uniform => (0..spec.dim).map(|_| rng.random::<f64>()).collect(),
                Distribution::Correlated => correlated(&mut rng, spec.dim),
                Distribution::AntiCorrelated => anti_correlated(&mut rng, spec.dim),
            };
            let coords: Vec<f64> = unit.into_iter().map(|v: f64| v * DOMAIN_MAX).collect();
            Point::new(i as u64, coords)
        })
        .collect())
}

/// Copies of `points` with Gaussian noise added to each coordinate and the
/// result clamped to the domain. Ids are kept.
pub fn derive_noisy(points: &[Point], noise: &NoiseSpec) -> Result<Vec<Point>> {
    if !noise.variance.is_finite() || noise.variance < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "noise variance must be a non-negative number, got {}",
            noise.variance
        )));
    }
    if noise.variance == 0.0 {
        return Ok(points.to_vec());
    }
    let normal = Normal::new(0.0, noise.variance.sqrt())
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    Ok(points
        .iter()
        .map(|p| {
            let coords: Vec<f64> = p
                .coords
                .iter()
                .map(|v| (v + normal.sample(&mut rng)).clamp(0.0, DOMAIN_MAX))
                .collect();
            Point::new(p.id, coords)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// Rescale every column onto `[0, 1000]`.
    pub normalize: bool,
    /// First column holds the point id instead of a coordinate.
    pub id_column: bool,
}

/// Reads one point per line. Lines starting with `#` are skipped. A first
/// row that does not parse as numbers is taken as a header. Without an id
/// column, ids are the zero-based data row index.
pub fn ingest_csv(path: &Path, opts: CsvOptions) -> Result<Vec<Point>> {
    let file = std::fs::File::open(path)?;
    read_csv(file, opts)
}

pub fn read_csv(input: impl std::io::Read, opts: CsvOptions) -> Result<Vec<Point>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut points: Vec<Point> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(i as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(i as u64 + 1, |p| p.line());
        let cells: Vec<&str> = record.iter().collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            cells.iter().map(|c| c.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::Csv {
                    row,
                    message: format!("non-numeric cell: {e}"),
                })
            }
        };
        if let Some(w) = width {
            if values.len() != w {
                return Err(Error::Csv {
                    row,
                    message: format!("expected {w} fields, found {}", values.len()),
                });
            }
        } else {
            width = Some(values.len());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Csv {
                row,
                message: "non-finite value".into(),
            });
        }
        let (id, coords) = if opts.id_column {
            let raw = values[0];
            if raw < 0.0 || raw.fract() != 0.0 {
                return Err(Error::Csv {
                    row,
                    message: format!("id {raw} is not a non-negative integer"),
                });
            }
            (raw as u64, values[1..].to_vec())
        } else {
            (points.len() as u64, values)
        };
        if coords.is_empty() {
            return Err(Error::Csv {
                row,
                message: "no coordinate columns".into(),
            });
        }
        points.push(Point::new(id, coords));
    }
    if opts.normalize {
        normalize(&mut points);
    }
    Ok(points)
}

/// Affine map of every column's `[min, max]` onto `[0, 1000]`; constant
/// columns become 0.
pub fn normalize(points: &mut [Point]) {
    let Some(first) = points.first() else {
        return;
    };
    for d in 0..first.dim() {
        let (lo, hi) = points
            .iter()
            .map(|p| p.coords[d])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let extent = hi - lo;
        for p in points.iter_mut() {
            p.coords[d] = if extent > 0.0 {
                ((p.coords[d] - lo) / extent * DOMAIN_MAX).clamp(0.0, DOMAIN_MAX)
            } else {
                0.0
            };
        }
    }
}

/// Writes `id,x0,x1,...` rows with a header line.
pub fn write_csv(out: impl Write, points: &[Point]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = points.first().map_or(0, Point::dim);
    let mut header = vec!["id".to_string()];
    header.extend((0..dim).map(|d| format!("x{d}")));
    w.write_record(&header).map_err(csv_err)?;
    for p in points {
        let mut row = vec![p.id.to_string()];
        row.extend(p.coords.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv {
        row: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}
