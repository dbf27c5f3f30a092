//! Shared oracles for the integration suites.
//!
//! Everything here is deliberately independent of the library's solution
//! paths: the SVD is one-sided Jacobi (the library uses nalgebra's
//! bidiagonalization), the l1 problems are solved by a dense two-phase
//! simplex on the positive/negative split, and the ridge problems by a raw
//! KKT system under LU.

#![allow(dead_code)]

use affsc::data::{mix_seed, sample_random_model, RandomModelSpec};
use affsc::geometry::AffineSubspace;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Draws an arrangement with 1..=4 subspaces of dimensions 0..=3 in an
/// ambient dimension spanning both sides of the independence thresholds.
pub fn random_arrangement(seed: u64) -> (Vec<AffineSubspace>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let dims: Vec<usize> = (0..n).map(|_| rng.random_range(0..=3)).collect();
    let span_threshold: usize = dims.iter().sum::<usize>() + n;
    let lo = dims.iter().copied().max().unwrap() + 1;
    let hi = (span_threshold + 2).max(lo + 1);
    let ambient = rng.random_range(lo..=hi);
    let spec = RandomModelSpec {
        ambient_dim: ambient,
        dims,
        points_per_subspace: 1,
        seed: mix_seed(seed, &[11]),
    };
    (sample_random_model(&spec).unwrap(), ambient)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn random_unit_columns(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut x = random_matrix(rows, cols, seed);
    for j in 0..cols {
        let norm = x.column(j).norm();
        x.column_mut(j).scale_mut(1.0 / norm);
    }
    x
}

/// One-sided Jacobi SVD: returns `(u, sigma, v)` with
/// `a = u * diag(sigma) * v^T` and `sigma` sorted descending.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let transposed = a.nrows() < a.ncols();
    let mut b = if transposed { a.transpose() } else { a.clone() };
    let n = b.ncols();
    let mut v = DMatrix::identity(n, n);

    let tol = 1e-14;
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app = b.column(p).dot(&b.column(p));
                let aqq = b.column(q).dot(&b.column(q));
                let apq = b.column(p).dot(&b.column(q));
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..b.nrows() {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = cs * bip - sn * biq;
                    b[(i, q)] = sn * bip + cs * biq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = cs * vip - sn * viq;
                    v[(i, q)] = sn * vip + cs * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| b.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut u = DMatrix::zeros(b.nrows(), n);
    let mut sigma = Vec::with_capacity(n);
    let mut v_sorted = DMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            u.set_column(k, &(b.column(j) / s));
        }
        v_sorted.set_column(k, &v.column(j));
    }

    if transposed {
        (v_sorted, sigma, u)
    } else {
        (u, sigma, v_sorted)
    }
}

/// Moore-Penrose pseudoinverse through the Jacobi SVD.
pub fn jacobi_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (u, sigma, v) = jacobi_svd(a);
    let cutoff = sigma.first().copied().unwrap_or(0.0)
        * 1e-12
        * (a.nrows().max(a.ncols()) as f64);
    let mut pinv = DMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in sigma.iter().enumerate() {
        if s > cutoff {
            pinv += v.column(k) * u.column(k).transpose() / s;
        }
    }
    pinv
}

const SIMPLEX_EPS: f64 = 1e-9;

/// Minimizes `cost^T y` subject to `a y = b`, `y >= 0`, by a dense
/// two-phase simplex with Bland's rule. Returns `None` when infeasible.
pub fn simplex_lp(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    cost: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    let m = a.nrows();
    let n = a.ncols();

    // Canonical tableau [A | I | rhs] with nonnegative rhs; the artificial
    // identity block provides the starting basis.
    let mut tab = DMatrix::zeros(m, n + m + 1);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[(i, j)] = flip * a[(i, j)];
        }
        tab[(i, n + i)] = 1.0;
        tab[(i, n + m)] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the artificial sum.
    let mut phase1_cost = DVector::zeros(n + m);
    for j in n..n + m {
        phase1_cost[j] = 1.0;
    }
    pivot_to_optimum(&mut tab, &mut basis, &phase1_cost, n + m);
    let phase1_value: f64 = (0..m)
        .filter(|&i| basis[i] >= n)
        .map(|i| tab[(i, n + m)])
        .sum();
    if phase1_value > 1e-7 {
        return None;
    }

    // Phase 2 over the original columns; artificials stay blocked from
    // entering (a degenerate artificial may remain basic at value zero).
    let mut phase2_cost = DVector::zeros(n + m);
    for j in 0..n {
        phase2_cost[j] = cost[j];
    }
    pivot_to_optimum(&mut tab, &mut basis, &phase2_cost, n);

    let mut y = DVector::zeros(n);
    for i in 0..m {
        if basis[i] < n {
            y[basis[i]] = tab[(i, n + m)];
        }
    }
    let objective = cost.dot(&y);
    Some((y, objective))
}

/// Bland-rule pivoting until every reduced cost over the first
/// `enterable_cols` columns is nonnegative.
fn pivot_to_optimum(
    tab: &mut DMatrix<f64>,
    basis: &mut [usize],
    cost: &DVector<f64>,
    enterable_cols: usize,
) {
    let m = tab.nrows();
    let rhs_col = tab.ncols() - 1;
    loop {
        // Reduced costs r_j = c_j - c_B^T tab_j under the canonical basis.
        let mut entering = None;
        for j in 0..enterable_cols {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cost[basis[i]] * tab[(i, j)];
            }
            if r < -SIMPLEX_EPS {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { return };

        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            if tab[(i, j)] > SIMPLEX_EPS {
                let ratio = tab[(i, rhs_col)] / tab[(i, j)];
                let better = match leaving {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - SIMPLEX_EPS
                            || (ratio < lr + SIMPLEX_EPS && basis[i] < basis[li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leaving else {
            // Unbounded direction; not reachable for the l1 instances here.
            return;
        };

        let pivot = tab[(pivot_row, j)];
        for col in 0..tab.ncols() {
            tab[(pivot_row, col)] /= pivot;
        }
        for i in 0..m {
            if i != pivot_row && tab[(i, j)].abs() > 0.0 {
                let factor = tab[(i, j)];
                for col in 0..tab.ncols() {
                    tab[(i, col)] -= factor * tab[(pivot_row, col)];
                }
            }
        }
        basis[pivot_row] = j;
    }
}

/// `min ||c||_1 s.t. M c = rhs` via the positive/negative split
/// `c = p - q`: minimize `1^T p + 1^T q` over `[M, -M][p; q] = rhs`.
/// Returns `(c, objective)` or `None` when infeasible.
pub fn l1_equality_oracle(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let n = m.ncols();
    let mut stacked = DMatrix::zeros(m.nrows(), 2 * n);
    stacked.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    stacked.view_mut((0, n), (m.nrows(), n)).copy_from(&(-m));
    let cost = DVector::from_element(2 * n, 1.0);
    let (y, objective) = simplex_lp(&stacked, rhs, &cost)?;
    let c = DVector::from_fn(n, |i, _| y[i] - y[n + i]);
    Some((c, objective))
}

/// Reference solution of the ridge self-expression through the raw KKT
/// system, one LU solve per column. With `affine`, the multiplier for the
/// column-sum constraint is appended to each column's system.
pub fn kkt_ridge_oracle(x: &DMatrix<f64>, lambda: f64, affine: bool) -> DMatrix<f64> {
    let n = x.ncols();
    let gram = x.transpose() * x;
    let size = if affine { n + 1 } else { n };

    let mut kkt = DMatrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = lambda * gram[(i, j)];
        }
        kkt[(i, i)] += 1.0;
    }
    if affine {
        for i in 0..n {
            kkt[(i, n)] = 1.0;
            kkt[(n, i)] = 1.0;
        }
    }
    let lu = kkt.lu();

    let mut c = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut rhs = DVector::zeros(size);
        for i in 0..n {
            rhs[i] = lambda * gram[(i, j)];
        }
        if affine {
            rhs[n] = 1.0;
        }
        let sol = lu.solve(&rhs).expect("KKT system is nonsingular");
        for i in 0..n {
            c[(i, j)] = sol[i];
        }
    }
    c
}

/// Exhaustive best-permutation clustering agreement for small label
/// alphabets, as the brute-force counterpart of the assignment-based
/// accuracy.
pub fn acc_by_permutations(pred: &[usize], truth: &[usize]) -> f64 {
    let k = pred
        .iter()
        .chain(truth)
        .copied()
        .max()
        .expect("nonempty labels");
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let matches = pred
            .iter()
            .zip(truth)
            .filter(|&(&pr, &tr)| p[pr - 1] + 1 == tr)
            .count();
        best = best.max(matches);
    });
    best as f64 / pred.len() as f64
}

fn permute(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}
