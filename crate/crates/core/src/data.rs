//! Random affine subspace model, point sampling, and CSV ingestion.
//!
//! All sampling is a pure function of a 64-bit seed. Nested streams (per
//! trial, per subspace) are derived with [`mix_seed`] so that parallel
//! execution of independent draws can never change the results.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{AffineSubspace, RankTolerance};

/// SplitMix64 finalizer; full-period bijection on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of stream tags.
///
/// Each tag is absorbed through one SplitMix64 round, so
/// `mix_seed(s, &[a, b])` and `mix_seed(s, &[b, a])` differ and collisions
/// between distinct tag paths are as unlikely as 64-bit hash collisions.
pub fn mix_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &t in tags {
        state = splitmix64(state ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    state
}

const STREAM_MODEL: u64 = 1;
const STREAM_POINTS: u64 = 2;

/// A point drawn uniformly from the unit sphere of `R^dim` (normalized
/// isotropic Gaussian; rotation invariance gives uniformity).
fn unit_sphere_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// A `D x N` collection of data points (one column per point) with optional
/// ground-truth labels in `{1..n}`.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    labels: Option<Vec<usize>>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if values.ncols() == 0 || values.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidMatrix);
        }
        if let Some(ref labels) = labels {
            if labels.len() != values.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} points",
                    labels.len(),
                    values.ncols()
                )));
            }
            validate_label_coverage(labels)?;
        }
        Ok(Self { values, labels })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn ambient_dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn count(&self) -> usize {
        self.values.ncols()
    }

    /// Writes the matrix as CSV with one row per point, feature columns named
    /// `x1..xD`, and a trailing `label` column when labels are present.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let d = self.ambient_dim();
        let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        if self.labels.is_some() {
            writeln!(out, "{},label", header.join(","))?;
        } else {
            writeln!(out, "{}", header.join(","))?;
        }
        for j in 0..self.count() {
            let row: Vec<String> = self.values.column(j).iter().map(|v| v.to_string()).collect();
            match &self.labels {
                Some(labels) => writeln!(out, "{},{}", row.join(","), labels[j])?,
                None => writeln!(out, "{}", row.join(","))?,
            }
        }
        Ok(())
    }
}

fn validate_label_coverage(labels: &[usize]) -> Result<()> {
    let max = *labels.iter().max().ok_or(Error::EmptyInput)?;
    if labels.contains(&0) {
        return Err(Error::InvalidLabels("labels must be 1-based".into()));
    }
    let mut seen = vec![false; max];
    for &l in labels {
        seen[l - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidLabels(format!(
            "class {} never occurs (labels must cover 1..{max})",
            missing + 1
        )));
    }
    Ok(())
}

/// Parameters of the random affine subspace model: `n` subspaces of
/// dimensions `dims` in `R^ambient_dim`, each generated from `dims[l] + 1`
/// unit-sphere draws (offset plus direction generators).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomModelSpec {
    pub ambient_dim: usize,
    pub dims: Vec<usize>,
    pub points_per_subspace: usize,
    pub seed: u64,
}

impl RandomModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidSpec("need at least one subspace".into()));
        }
        if self.points_per_subspace == 0 {
            return Err(Error::InvalidSpec("points_per_subspace must be positive".into()));
        }
        for (l, &d) in self.dims.iter().enumerate() {
            if d >= self.ambient_dim {
                return Err(Error::InvalidSpec(format!(
                    "subspace {} has dimension {d} >= ambient dimension {}",
                    l + 1,
                    self.ambient_dim
                )));
            }
        }
        Ok(())
    }
}

/// Draws the subspaces of the random model: subspace `l` is
/// `w_0 + span{w_1, ..., w_d}` with all generators independent and uniform
/// on the unit sphere. Deterministic given `spec.seed`.
pub fn sample_random_model(spec: &RandomModelSpec) -> Result<Vec<AffineSubspace>> {
    spec.validate()?;
    let tol = RankTolerance::default();
    spec.dims
        .iter()
        .enumerate()
        .map(|(l, &d)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, &[STREAM_MODEL, l as u64]));
            let offset = unit_sphere_vector(&mut rng, spec.ambient_dim);
            let mut basis = DMatrix::zeros(spec.ambient_dim, d);
            for j in 0..d {
                basis.set_column(j, &unit_sphere_vector(&mut rng, spec.ambient_dim));
            }
            AffineSubspace::new(offset, basis, tol)
        })
        .collect()
}

/// Samples `m` points on the subspace: each column is
/// `offset + Q u` with `Q` an orthonormal direction basis and `u` uniform on
/// the unit sphere of the subspace's intrinsic coordinates, so every sample
/// sits at distance exactly 1 from the offset. A 0-dimensional subspace
/// yields `m` copies of its offset.
pub fn sample_points_on_subspace(
    subspace: &AffineSubspace,
    m: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let d = subspace.dim();
    let mut points = DMatrix::zeros(subspace.ambient_dim(), m);
    if d == 0 {
        for j in 0..m {
            points.set_column(j, subspace.offset());
        }
        return Ok(points);
    }
    let q = subspace.direction_subspace();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 0..m {
        let u = unit_sphere_vector(&mut rng, d);
        points.set_column(j, &(subspace.offset() + q * u));
    }
    Ok(points)
}

/// Draws the model and samples `points_per_subspace` points on each
/// subspace. Labels follow the block layout: the `l`-th block of columns
/// carries label `l + 1`.
pub fn generate_union_dataset(
    spec: &RandomModelSpec,
) -> Result<(DataMatrix, Vec<AffineSubspace>)> {
    let model = sample_random_model(spec)?;
    let m = spec.points_per_subspace;
    let n = model.len();
    let mut values = DMatrix::zeros(spec.ambient_dim, n * m);
    let mut labels = Vec::with_capacity(n * m);
    for (l, subspace) in model.iter().enumerate() {
        let pts = sample_points_on_subspace(
            subspace,
            m,
            mix_seed(spec.seed, &[STREAM_POINTS, l as u64]),
        )?;
        values
            .view_mut((0, l * m), (spec.ambient_dim, m))
            .copy_from(&pts);
        labels.extend(std::iter::repeat_n(l + 1, m));
    }
    Ok((DataMatrix::new(values, Some(labels))?, model))
}

/// Options for [`load_dataset`]. Centering subtracts the mean point before
/// the optional per-point unit normalization.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub normalize: bool,
    pub center: bool,
}

/// Reads a CSV file with one row per data point: comma-separated decimal
/// floats, an optional header row, and an optional trailing integer column
/// named `label`.
pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<DataMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, options)
}

fn parse_csv(text: &str, options: &LoadOptions) -> Result<DataMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let (_, first) = lines.peek().copied().ok_or(Error::EmptyInput)?;
    let first_cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let has_header = first_cells.iter().any(|c| c.parse::<f64>().is_err());
    let labeled = has_header
        && first_cells
            .last()
            .map(|c| c.eq_ignore_ascii_case("label"))
            .unwrap_or(false);
    if has_header {
        lines.next();
    }

    let mut width = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::ParseError {
                line: lineno,
                detail: format!("expected {expected} cells, found {}", cells.len()),
            });
        }
        let feature_count = if labeled { cells.len() - 1 } else { cells.len() };
        let mut point = Vec::with_capacity(feature_count);
        for (col, cell) in cells[..feature_count].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::ParseError {
                line: lineno,
                detail: format!("cell {} ({cell:?}) is not a number", col + 1),
            })?;
            point.push(v);
        }
        if labeled {
            let cell = cells[feature_count];
            let l: usize = cell.parse().map_err(|_| Error::ParseError {
                line: lineno,
                detail: format!("label {cell:?} is not a positive integer"),
            })?;
            labels.push(l);
        }
        columns.push(point);
    }
    if columns.is_empty() {
        return Err(Error::EmptyInput);
    }

    let d = columns[0].len();
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    let n = columns.len();
    let mut values = DMatrix::zeros(d, n);
    for (j, point) in columns.iter().enumerate() {
        for (i, &v) in point.iter().enumerate() {
            values[(i, j)] = v;
        }
    }

    if options.center {
        let mean = values.column_mean();
        for mut col in values.column_iter_mut() {
            col -= &mean;
        }
    }
    if options.normalize {
        for mut col in values.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
    }

    DataMatrix::new(values, if labeled { Some(labels) } else { None })
}
