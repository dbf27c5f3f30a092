//! ADMM for the sparse self-expression problems.
//!
//! Both modes use the same two-block splitting: `C` carries the smooth
//! terms and the equality constraints, `Z` carries the l1 norm and the
//! zero-diagonal projection, coupled through `C = Z`. The `C`-update is a
//! single cached Cholesky solve; the `Z`-update is soft thresholding
//! followed by zeroing the diagonal.
//!
//! Exact mode drives the self-expression (and affine) residuals of the
//! output below `abs_tol` directly, with the constraint `X C = X` handled
//! by its own multiplier and a slowly increasing penalty (x1.5 every 50
//! iterations, capped). Scaled duals keep the `C`-update system matrix
//! independent of the penalty, so one factorization serves the whole run.
//! Noisy mode keeps the penalty fixed.

use nalgebra::{Cholesky, DMatrix, RowDVector};

use crate::error::{Error, Result};
use crate::geometry::{numerical_rank, RankTolerance};

use super::{ensure_finite, AdmmParams, CoefficientMatrix, Mode, Regularizer, SolverConfig};

const RHO_GROWTH: f64 = 1.5;
const RHO_GROWTH_PERIOD: usize = 50;
// The penalty must stay moderate: feasibility is enforced by the multipliers
// at any rho, while the l1 mass redistributes at a rate proportional to
// 1/rho, so a large cap stalls the objective short of the optimum.
const RHO_CAP_FACTOR: f64 = 100.0;

/// Sparse self-expression via ADMM, in the mode and with the constraints
/// selected by `cfg` (which must use the l1 regularizer).
pub fn ssc_solve(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    if cfg.regularizer != Regularizer::L1 {
        return Err(Error::InvalidParameter(
            "ssc_solve requires the l1 regularizer".into(),
        ));
    }
    ensure_finite(x)?;
    if x.ncols() < 2 {
        return Err(Error::InvalidParameter(
            "sparse self-expression needs at least two data points".into(),
        ));
    }
    match cfg.mode {
        Mode::Exact => exact_admm(x, cfg.affine, &cfg.admm),
        Mode::Noisy => {
            let lambda = resolve_lambda(x, cfg)?;
            noisy_admm(x, lambda, cfg.affine, &cfg.admm)
        }
    }
}

/// `lambda = alpha / mu_z`, falling back to an explicit `lambda` when the
/// data is too degenerate for `mu_z` (some point orthogonal to all others).
fn resolve_lambda(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<f64> {
    match (cfg.alpha, cfg.lambda) {
        (Some(alpha), fallback) => match super::compute_mu_z(x) {
            Ok(mu) => Ok(alpha / mu),
            Err(Error::DegenerateData(_)) => fallback.ok_or_else(|| {
                Error::DegenerateData(
                    "mu_z is zero and no explicit lambda was provided".into(),
                )
            }),
            Err(e) => Err(e),
        },
        (None, Some(lambda)) => Ok(lambda),
        (None, None) => Err(Error::InvalidParameter(
            "noisy mode needs alpha or lambda".into(),
        )),
    }
}

fn soft_threshold_zero_diag(v: &DMatrix<f64>, k: f64) -> DMatrix<f64> {
    let mut z = v.map(|a| a.signum() * (a.abs() - k).max(0.0));
    z.fill_diagonal(0.0);
    z
}

fn max_abs_column_sum_violation(z: &DMatrix<f64>) -> f64 {
    (0..z.ncols())
        .map(|j| (z.column(j).sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

struct AdmmOutcome {
    z: DMatrix<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn finish(
    x: &DMatrix<f64>,
    outcome: AdmmOutcome,
    affine: bool,
    mode: Mode,
) -> CoefficientMatrix {
    CoefficientMatrix {
        residual: (x - x * &outcome.z).norm(),
        affine_violation: max_abs_column_sum_violation(&outcome.z),
        matrix: outcome.z,
        iterations: outcome.iterations,
        converged: outcome.converged,
        regularizer: Regularizer::L1,
        affine,
        mode,
        primal_residual_trace: outcome.trace,
    }
}

/// min ||Z||_1  s.t.  X C = X, (1^T C = 1^T,) C = Z, diag(Z) = 0.
fn exact_admm(x: &DMatrix<f64>, affine: bool, params: &AdmmParams) -> Result<CoefficientMatrix> {
    let (d, n) = (x.nrows(), x.ncols());
    let xt = x.transpose();
    let xtx = &xt * x;
    let ones = RowDVector::from_element(n, 1.0);

    let mut system = &xtx + DMatrix::identity(n, n);
    if affine {
        system.add_scalar_mut(1.0); // + 1 1^T
    }
    let chol = Cholesky::new(system).ok_or_else(|| {
        Error::DegenerateData("ADMM system matrix is not positive definite".into())
    })?;

    let mut c;
    let mut z = DMatrix::zeros(n, n);
    let mut u1 = DMatrix::zeros(d, n); // scaled dual for X C = X
    let mut u2 = RowDVector::zeros(n); // scaled dual for 1^T C = 1^T
    let mut u3 = DMatrix::zeros(n, n); // scaled dual for C = Z

    let mut rho = params.rho;
    let rho_cap = params.rho * RHO_CAP_FACTOR;
    let x_scale = x.norm().max(1.0);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=params.max_iters {
        iterations = iter;

        let mut rhs = &xtx - &xt * &u1 + &z - &u3;
        if affine {
            let row = &ones - &u2;
            for mut r in rhs.row_iter_mut() {
                r += &row;
            }
        }
        c = chol.solve(&rhs);

        let z_prev = z.clone();
        z = soft_threshold_zero_diag(&(&c + &u3), 1.0 / rho);

        let xc = x * &c;
        u1 += &xc - x;
        if affine {
            u2 += &ones * &c - &ones;
        }
        u3 += &c - &z;

        // Residuals are measured on the output variable Z so the declared
        // tolerances hold for what the caller receives. The dual step is
        // compared unscaled: under penalty continuation the rho-scaled dual
        // residual has a round-off floor proportional to rho, while the
        // constraint residuals below carry the actual exactness contract.
        let split_pri = (&c - &z).norm();
        let dual_step = (&z - &z_prev).norm();
        let feas_expr = (x * &z - x).norm() / x_scale;
        let feas_aff = if affine {
            max_abs_column_sum_violation(&z)
        } else {
            0.0
        };
        trace.push(split_pri);

        let eps_pri = (n as f64) * params.abs_tol
            + params.rel_tol * c.norm().max(z.norm());
        let eps_dual = (n as f64) * params.abs_tol + params.rel_tol * z.norm();
        if split_pri <= eps_pri
            && dual_step <= eps_dual
            && feas_expr <= params.abs_tol
            && feas_aff <= params.abs_tol
        {
            converged = true;
            break;
        }

        if iter % RHO_GROWTH_PERIOD == 0 && rho < rho_cap {
            rho *= RHO_GROWTH;
            u1 /= RHO_GROWTH;
            u2 /= RHO_GROWTH;
            u3 /= RHO_GROWTH;
        }
    }

    if !converged {
        // Distinguish a genuinely infeasible column from slow convergence.
        if let Some(column) = first_infeasible_column(x, affine)? {
            return Err(Error::InfeasibleConstraint { column });
        }
    }

    Ok(finish(
        x,
        AdmmOutcome { z, iterations, converged, trace },
        affine,
        Mode::Exact,
    ))
}

/// Column `j` of the exact problem is feasible iff `x_j` (embedded when the
/// affine constraint is on) lies in the range of the remaining columns.
fn first_infeasible_column(x: &DMatrix<f64>, affine: bool) -> Result<Option<usize>> {
    let tol = RankTolerance::default();
    let (d, n) = (x.nrows(), x.ncols());
    let rows = if affine { d + 1 } else { d };
    let mut stacked = DMatrix::zeros(rows, n);
    stacked.view_mut((0, 0), (d, n)).copy_from(x);
    if affine {
        stacked.row_mut(d).fill(1.0);
    }
    let full_rank = numerical_rank(&stacked, tol)?;
    for j in 0..n {
        let reduced = stacked.clone().remove_column(j);
        if numerical_rank(&reduced, tol)? < full_rank {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// min ||Z||_1 + lambda/2 ||X - X C||_F^2  s.t.  (1^T C = 1^T,) C = Z,
/// diag(Z) = 0.
fn noisy_admm(
    x: &DMatrix<f64>,
    lambda: f64,
    affine: bool,
    params: &AdmmParams,
) -> Result<CoefficientMatrix> {
    let n = x.ncols();
    let xtx = x.transpose() * x;
    let ones = RowDVector::from_element(n, 1.0);
    let rho = params.rho;

    let mut system = &xtx * lambda + DMatrix::identity(n, n) * rho;
    if affine {
        system.add_scalar_mut(rho); // + rho 1 1^T
    }
    let chol = Cholesky::new(system).ok_or_else(|| {
        Error::DegenerateData("ADMM system matrix is not positive definite".into())
    })?;

    let lambda_xtx = &xtx * lambda;
    let mut c;
    let mut z = DMatrix::zeros(n, n);
    let mut u2 = RowDVector::zeros(n);
    let mut u3 = DMatrix::zeros(n, n);

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=params.max_iters {
        iterations = iter;

        let mut rhs = &lambda_xtx + (&z - &u3) * rho;
        if affine {
            let row = (&ones - &u2) * rho;
            for mut r in rhs.row_iter_mut() {
                r += &row;
            }
        }
        c = chol.solve(&rhs);

        let z_prev = z.clone();
        z = soft_threshold_zero_diag(&(&c + &u3), 1.0 / rho);

        if affine {
            u2 += &ones * &c - &ones;
        }
        u3 += &c - &z;

        let split_pri = (&c - &z).norm();
        let dual = rho * (&z - &z_prev).norm();
        let feas_aff = if affine {
            max_abs_column_sum_violation(&z)
        } else {
            0.0
        };
        trace.push(split_pri);

        let eps_pri = (n as f64) * params.abs_tol
            + params.rel_tol * c.norm().max(z.norm());
        let eps_dual = (n as f64) * params.abs_tol + params.rel_tol * rho * u3.norm();
        if split_pri <= eps_pri && dual <= eps_dual && feas_aff <= params.abs_tol {
            converged = true;
            break;
        }
    }

    Ok(finish(
        x,
        AdmmOutcome { z, iterations, converged, trace },
        affine,
        Mode::Noisy,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::SolverConfig;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_unit_columns(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng));
        for j in 0..cols {
            let norm = x.column(j).norm();
            x.column_mut(j).scale_mut(1.0 / norm);
        }
        x
    }

    #[test]
    fn duplicated_columns_express_each_other() {
        let x = DMatrix::from_column_slice(3, 2, &[0.6, 0.8, 0.0, 0.6, 0.8, 0.0]);
        let cfg = SolverConfig::exact(Regularizer::L1, false);
        let c = ssc_solve(&x, &cfg).unwrap();
        assert!(c.converged);
        assert!((c.matrix[(1, 0)] - 1.0).abs() < 1e-5);
        assert!((c.matrix[(0, 1)] - 1.0).abs() < 1e-5);
        assert!(c.matrix[(0, 0)] == 0.0 && c.matrix[(1, 1)] == 0.0);
    }

    #[test]
    fn exact_affine_constraint_is_driven_down() {
        let x = random_unit_columns(4, 12, 50);
        let cfg = SolverConfig::exact(Regularizer::L1, true);
        let c = ssc_solve(&x, &cfg).unwrap();
        assert!(c.converged, "iterations: {}", c.iterations);
        assert!(c.affine_violation <= 1e-6);
        assert!(c.residual <= 1e-6 * x.norm().max(1.0));
        for j in 0..12 {
            assert_eq!(c.matrix[(j, j)], 0.0);
        }
    }

    #[test]
    fn noisy_mode_balances_sparsity_and_fit() {
        let x = random_unit_columns(5, 10, 51);
        let cfg = SolverConfig::noisy(Regularizer::L1, false, Some(50.0), None);
        let c = ssc_solve(&x, &cfg).unwrap();
        assert!(c.converged);
        // Strict zero diagonal comes from the prox projection.
        for j in 0..10 {
            assert_eq!(c.matrix[(j, j)], 0.0);
        }
        assert!(c.residual < x.norm());
    }

    #[test]
    fn noisy_affine_constraint_is_met() {
        let x = random_unit_columns(6, 14, 52);
        let mut cfg = SolverConfig::noisy(Regularizer::L1, true, Some(40.0), None);
        cfg.admm.max_iters = 20_000;
        let c = ssc_solve(&x, &cfg).unwrap();
        assert!(c.converged, "affine violation {}", c.affine_violation);
        assert!(c.affine_violation <= 1e-6);
    }

    #[test]
    fn infeasible_exact_instance_names_a_column() {
        // Two generic points in R^3: neither lies in the span of the other.
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let mut cfg = SolverConfig::exact(Regularizer::L1, false);
        cfg.admm.max_iters = 50;
        match ssc_solve(&x, &cfg) {
            Err(Error::InfeasibleConstraint { column }) => assert_eq!(column, 0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn non_convergence_returns_best_iterate() {
        let x = random_unit_columns(4, 9, 53);
        let mut cfg = SolverConfig::exact(Regularizer::L1, false);
        cfg.admm.max_iters = 3;
        let c = ssc_solve(&x, &cfg).unwrap();
        assert!(!c.converged);
        assert_eq!(c.iterations, 3);
        assert_eq!(c.primal_residual_trace.len(), 3);
    }

    #[test]
    fn degenerate_mu_z_falls_back_to_explicit_lambda() {
        // Orthonormal columns make mu_z vanish; alpha alone cannot set
        // lambda, an explicit lambda keeps the solve going.
        let x = DMatrix::<f64>::identity(4, 4);
        let cfg = SolverConfig::noisy(Regularizer::L1, false, Some(10.0), None);
        assert!(matches!(ssc_solve(&x, &cfg), Err(Error::DegenerateData(_))));

        let cfg = SolverConfig::noisy(Regularizer::L1, false, Some(10.0), Some(5.0));
        let c = ssc_solve(&x, &cfg).unwrap();
        // No column can be expressed by the others at all; the penalized
        // optimum is the zero matrix.
        assert!(c.matrix.norm() < 1e-10);
    }

    #[test]
    fn rejects_frobenius_regularizer() {
        let x = DMatrix::identity(3, 3);
        let cfg = SolverConfig::exact(Regularizer::FrobeniusSquaredHalf, false);
        assert!(matches!(
            ssc_solve(&x, &cfg),
            Err(Error::InvalidParameter(_))
        ));
    }
}
