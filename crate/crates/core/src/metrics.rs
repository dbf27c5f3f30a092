//! Evaluation metrics: subspace-preserving rate and clustering accuracy.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Ground-truth partition as 1-based labels; the induced pairwise mask is
/// `w_ij = 1` iff points `i` and `j` share a label.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    labels: Vec<usize>,
    classes: usize,
}

impl GroundTruth {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        if labels.contains(&0) {
            return Err(Error::InvalidLabels("labels must be 1-based".into()));
        }
        let classes = *labels.iter().max().unwrap();
        let mut seen = vec![false; classes];
        for &l in &labels {
            seen[l - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidLabels(format!(
                "class {} never occurs",
                missing + 1
            )));
        }
        Ok(Self { labels, classes })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn same_class(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

/// Subspace-preserving rate with its zero-column diagnostics.
#[derive(Debug, Clone)]
pub struct SprReport {
    pub value: f64,
    /// Columns with zero l1 mass; each contributes 1 (vacuously preserving).
    pub zero_columns: Vec<usize>,
}

/// Mean over columns of the within-class share of each column's l1 mass:
/// `(1/N) sum_j sum_i w_ij |c_ij| / ||c_j||_1`. Equals 1 exactly when `C` is
/// subspace-preserving.
pub fn spr(c: &DMatrix<f64>, truth: &GroundTruth) -> Result<SprReport> {
    let n = truth.len();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "coefficients are {}x{} but truth has {} points",
            c.nrows(),
            c.ncols(),
            n
        )));
    }
    let mut total = 0.0;
    let mut zero_columns = Vec::new();
    for j in 0..n {
        let mass: f64 = c.column(j).iter().map(|v| v.abs()).sum();
        if mass == 0.0 {
            zero_columns.push(j);
            total += 1.0;
            continue;
        }
        let within: f64 = (0..n)
            .filter(|&i| truth.same_class(i, j))
            .map(|i| c[(i, j)].abs())
            .sum();
        total += within / mass;
    }
    Ok(SprReport {
        value: total / n as f64,
        zero_columns,
    })
}

/// True when the off-block l1 mass is at most `tol` times the total l1 mass.
pub fn is_subspace_preserving(c: &DMatrix<f64>, truth: &GroundTruth, tol: f64) -> Result<bool> {
    let n = truth.len();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "coefficients are {}x{} but truth has {} points",
            c.nrows(),
            c.ncols(),
            n
        )));
    }
    let mut off = 0.0;
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            let v = c[(i, j)].abs();
            total += v;
            if !truth.same_class(i, j) {
                off += v;
            }
        }
    }
    Ok(off <= tol * total)
}

/// Best label-permutation agreement between two clusterings, computed by
/// optimal assignment on the confusion matrix.
pub fn acc(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} truths",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pred.iter().chain(truth).any(|&l| l == 0) {
        return Err(Error::InvalidLabels("labels must be 1-based".into()));
    }
    let k = (*pred.iter().max().unwrap()).max(*truth.iter().max().unwrap());
    let mut confusion = vec![vec![0.0f64; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[p - 1][t - 1] += 1.0;
    }
    let matched = assignment_max(&confusion);
    Ok(matched / pred.len() as f64)
}

/// Maximum-total assignment of rows to columns of a square profit matrix,
/// via the Hungarian algorithm on the negated costs. Returns the total
/// profit of the optimal matching.
fn assignment_max(profit: &[Vec<f64>]) -> f64 {
    let n = profit.len();
    let assignment = hungarian_min(&profit
        .iter()
        .map(|row| row.iter().map(|&v| -v).collect())
        .collect::<Vec<Vec<f64>>>());
    (0..n).map(|r| profit[r][assignment[r]]).sum()
}

/// O(n^3) Hungarian algorithm with row/column potentials for square
/// min-cost assignment. Returns the column matched to each row.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // Potentials and matching use 1-based columns with column 0 as scratch.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // row matched to each column
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut result = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            result[matched_row[j] - 1] = j - 1;
        }
    }
    result
}
