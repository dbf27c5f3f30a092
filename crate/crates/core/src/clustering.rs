//! Affinity construction and spectral clustering.
//!
//! The pipeline is the standard normalized-cut variant: symmetric Laplacian
//! `L = I - D^{-1/2} W D^{-1/2}`, the eigenvectors of the `n` smallest
//! eigenvalues as an embedding, row normalization, then seeded k-means with
//! k-means++ initialization and restarts.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::mix_seed;
use crate::error::{Error, Result};

/// Degree guard for isolated vertices in the normalized Laplacian.
const DEGREE_GUARD: f64 = 1e-12;

const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITERS: usize = 300;

/// `W = |C| + |C^T|`: symmetric and entrywise nonnegative.
pub fn build_affinity(c: &DMatrix<f64>) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(c.nrows(), c.ncols());
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            w[(i, j)] = c[(i, j)].abs() + c[(j, i)].abs();
        }
    }
    w
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    /// Cluster assignment per point, in `{1..n}`.
    pub labels: Vec<usize>,
    /// The `n + 1` smallest Laplacian eigenvalues (fewer when `n = N`).
    pub eigenvalues: Vec<f64>,
    /// Gap between the `(n+1)`-th and `n`-th smallest eigenvalue.
    pub eigengap: f64,
    /// k-means inertia of the selected restart.
    pub inertia: f64,
    pub seed: u64,
    /// Vertices whose affinity degree needed the guard value.
    pub isolated_vertices: usize,
    /// Set when every vertex is isolated (all-zero affinity).
    pub disconnected: bool,
}

/// Spectral clustering of a symmetric nonnegative affinity into `n` groups.
/// Deterministic given `seed`.
pub fn spectral_cluster(w: &DMatrix<f64>, n: usize, seed: u64) -> Result<ClusteringResult> {
    let size = w.nrows();
    if w.ncols() != size {
        return Err(Error::DimensionMismatch(format!(
            "affinity must be square, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if size == 0 {
        return Err(Error::EmptyInput);
    }
    if n == 0 || n > size {
        return Err(Error::InvalidParameter(format!(
            "cluster count {n} must lie in 1..={size}"
        )));
    }
    if !w.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidMatrix);
    }
    let scale = w.norm().max(1.0);
    for i in 0..size {
        for j in 0..i {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-8 * scale {
                return Err(Error::InvalidParameter("affinity must be symmetric".into()));
            }
        }
    }
    if w.iter().any(|&v| v < -1e-12) {
        return Err(Error::InvalidParameter("affinity must be nonnegative".into()));
    }

    let degrees: Vec<f64> = (0..size).map(|i| w.row(i).sum()).collect();
    let isolated = degrees.iter().filter(|&&d| d <= DEGREE_GUARD).count();
    let inv_sqrt: DVector<f64> =
        DVector::from_iterator(size, degrees.iter().map(|&d| 1.0 / d.max(DEGREE_GUARD).sqrt()));

    let mut lap = DMatrix::from_fn(size, size, |i, j| {
        let norm = -inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
        if i == j {
            1.0 + norm
        } else {
            norm
        }
    });
    // Symmetrize away round-off before the eigensolver.
    lap = (&lap + lap.transpose()) * 0.5;

    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut embedding = DMatrix::zeros(size, n);
    for (k, &idx) in order.iter().take(n).enumerate() {
        let mut col = eig.eigenvectors.column(idx).into_owned();
        canonical_sign(&mut col);
        embedding.set_column(k, &col);
    }
    for mut row in embedding.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }

    let (labels0, inertia) = kmeans(&embedding, n, seed);
    let eigenvalues: Vec<f64> = order
        .iter()
        .take(n + 1)
        .map(|&i| eig.eigenvalues[i])
        .collect();
    let eigengap = if eigenvalues.len() > n {
        eigenvalues[n] - eigenvalues[n - 1]
    } else {
        0.0
    };

    Ok(ClusteringResult {
        labels: labels0.into_iter().map(|l| l + 1).collect(),
        eigenvalues,
        eigengap,
        inertia,
        seed,
        isolated_vertices: isolated,
        disconnected: isolated == size,
    })
}

/// Flips an eigenvector so its largest-magnitude entry is positive, making
/// the embedding stable under permutations of the input.
fn canonical_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        *v *= -1.0;
    }
}

/// Seeded k-means over the rows of `points`, k-means++ initialization,
/// fixed restart count, ties broken toward the lowest centroid index.
/// Returns 0-based labels and the winning inertia.
fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> (Vec<usize>, f64) {
    let n = points.nrows();
    let mut best: Option<(Vec<usize>, f64)> = None;

    for restart in 0..KMEANS_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[restart as u64]));
        let mut centroids = plus_plus_init(points, k, &mut rng);
        let mut labels = vec![0usize; n];

        for _ in 0..KMEANS_MAX_ITERS {
            let mut changed = false;
            for (i, label) in labels.iter_mut().enumerate() {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for (c, centroid) in centroids.iter().enumerate() {
                    let d = row_distance_sq(points, i, centroid);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if *label != best_c {
                    *label = best_c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![DVector::zeros(points.ncols()); k];
            let mut counts = vec![0usize; k];
            for i in 0..n {
                sums[labels[i]] += points.row(i).transpose();
                counts[labels[i]] += 1;
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centroids[c] = &sums[c] / counts[c] as f64;
                }
                // An emptied cluster keeps its centroid.
            }
        }

        let inertia: f64 = (0..n)
            .map(|i| row_distance_sq(points, i, &centroids[labels[i]]))
            .sum();
        let better = match &best {
            None => true,
            Some((_, best_inertia)) => inertia < *best_inertia,
        };
        if better {
            best = Some((labels, inertia));
        }
    }

    best.expect("at least one restart")
}

fn row_distance_sq(points: &DMatrix<f64>, row: usize, centroid: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..points.ncols() {
        let d = points[(row, j)] - centroid[j];
        acc += d * d;
    }
    acc
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = points.nrows();
    let first = rng.random_range(0..n);
    let mut centroids = vec![points.row(first).transpose()];
    let mut dist: Vec<f64> = (0..n)
        .map(|i| row_distance_sq(points, i, &centroids[0]))
        .collect();

    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // Degenerate embedding with all points coincident.
            rng.random_range(0..n)
        };
        let centroid = points.row(next).transpose();
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(row_distance_sq(points, i, &centroid));
        }
        centroids.push(centroid);
    }
    centroids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affinity_is_symmetric_absolute() {
        assert_eq!(build_affinity(&DMatrix::zeros(3, 3)), DMatrix::zeros(3, 3));

        let c = DMatrix::from_column_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let w = build_affinity(&c);
        assert_eq!(w, DMatrix::from_column_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
    }

    fn block_affinity(sizes: &[usize], seed: u64) -> (DMatrix<f64>, Vec<usize>) {
        let n: usize = sizes.iter().sum();
        let mut w = DMatrix::zeros(n, n);
        let mut labels = Vec::with_capacity(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut at = 0;
        for (b, &s) in sizes.iter().enumerate() {
            for i in at..at + s {
                labels.push(b + 1);
                for j in at..at + s {
                    if i != j {
                        let v = 0.5 + rng.random::<f64>();
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
            }
            at += s;
        }
        (w, labels)
    }

    #[test]
    fn block_diagonal_affinity_recovers_blocks() {
        let (w, truth) = block_affinity(&[5, 7, 4], 3);
        let result = spectral_cluster(&w, 3, 11).unwrap();
        // Same label within each block, distinct labels across blocks.
        for i in 0..truth.len() {
            for j in 0..truth.len() {
                assert_eq!(
                    truth[i] == truth[j],
                    result.labels[i] == result.labels[j],
                    "points {i} and {j}"
                );
            }
        }
    }

    #[test]
    fn single_cluster_requests_constant_labels() {
        let (w, _) = block_affinity(&[6], 0);
        let result = spectral_cluster(&w, 1, 5).unwrap();
        assert!(result.labels.iter().all(|&l| l == 1));
    }

    #[test]
    fn all_zero_affinity_is_flagged_disconnected() {
        let w = DMatrix::zeros(5, 5);
        let result = spectral_cluster(&w, 2, 7).unwrap();
        assert!(result.disconnected);
        assert_eq!(result.isolated_vertices, 5);
        assert_eq!(result.labels.len(), 5);
        assert!(result.labels.iter().all(|&l| (1..=2).contains(&l)));
    }

    #[test]
    fn laplacian_eigenvalues_stay_in_range() {
        let (w, _) = block_affinity(&[4, 4], 9);
        let result = spectral_cluster(&w, 2, 1).unwrap();
        for &ev in &result.eigenvalues {
            assert!((-1e-8..=2.0 + 1e-8).contains(&ev));
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let w = DMatrix::zeros(3, 3);
        assert!(matches!(
            spectral_cluster(&w, 4, 0),
            Err(Error::InvalidParameter(_))
        ));
        let asym = DMatrix::from_column_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            spectral_cluster(&asym, 1, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn clustering_is_deterministic_in_seed() {
        let (w, _) = block_affinity(&[5, 5, 5], 21);
        let a = spectral_cluster(&w, 3, 42).unwrap();
        let b = spectral_cluster(&w, 3, 42).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia, b.inertia);
    }
}
