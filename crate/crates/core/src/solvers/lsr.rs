//! Closed-form least-squares self-expression.
//!
//! Exact mode returns the minimum-Frobenius-norm solution of the constraint
//! system via the pseudoinverse: `C = X^+ X`, or `C = S^+ S` with
//! `S = [X; 1^T]` when the affine constraint is on. Noisy mode solves the
//! ridge problem `min 1/2||C||_F^2 + lambda/2 ||X - XC||_F^2`, whose
//! unconstrained minimizer is `C = (X^T X + I/lambda)^{-1} X^T X`; under the
//! affine constraint the minimizer is
//! `C = lambda W X^T X + v v^T / (1^T v)` with `W = (lambda X^T X + I)^{-1}`
//! and `v = W 1`. Both are SPD solves through one cached Cholesky
//! factorization; nothing is ever inverted without the `+I` shift.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::RankTolerance;

use super::{affine_violation, ensure_finite, CoefficientMatrix, Mode, Regularizer};

/// `A^+ A` as the orthogonal projector onto the row space of `A`: the sum of
/// `v v^T` over right singular vectors with singular value above the rank
/// cutoff.
fn row_space_projector(a: &DMatrix<f64>, tol: RankTolerance) -> DMatrix<f64> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd with v requested");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    if sigma_max == 0.0 {
        return DMatrix::zeros(n, n);
    }
    let cutoff = tol.relative_eps() * sigma_max * (a.nrows().max(a.ncols()) as f64);
    let mut projector = DMatrix::zeros(n, n);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let v = v_t.row(i).transpose();
            projector += &v * v.transpose();
        }
    }
    projector
}

/// Exact least-squares self-expression: the minimum-norm `C` with `X C = X`
/// (and `1^T C = 1^T` when `affine`).
pub fn lsr_exact(x: &DMatrix<f64>, affine: bool) -> Result<CoefficientMatrix> {
    ensure_finite(x)?;
    let n = x.ncols();
    if n == 0 {
        return Err(Error::EmptyInput);
    }

    let stacked;
    let system: &DMatrix<f64> = if affine {
        let mut s = DMatrix::zeros(x.nrows() + 1, n);
        s.view_mut((0, 0), (x.nrows(), n)).copy_from(x);
        s.row_mut(x.nrows()).fill(1.0);
        stacked = s;
        &stacked
    } else {
        x
    };

    let c = row_space_projector(system, RankTolerance::default());

    // The projector reproduces the stacked system by construction; a column
    // that fails to do so signals numerical breakdown, not a representable
    // input.
    let reproduced = system * &c;
    let scale = x.norm().max(1.0);
    for j in 0..n {
        let err = (system.column(j) - reproduced.column(j)).norm();
        if err > 1e-8 * scale {
            return Err(Error::InfeasibleConstraint { column: j });
        }
    }

    Ok(CoefficientMatrix {
        residual: (x - x * &c).norm(),
        affine_violation: affine_violation(&c),
        matrix: c,
        iterations: 0,
        converged: true,
        regularizer: Regularizer::FrobeniusSquaredHalf,
        affine,
        mode: Mode::Exact,
        primal_residual_trace: Vec::new(),
    })
}

/// Ridge-penalized least-squares self-expression.
pub fn lsr_noisy(x: &DMatrix<f64>, lambda: f64, affine: bool) -> Result<CoefficientMatrix> {
    ensure_finite(x)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let n = x.ncols();
    if n == 0 {
        return Err(Error::EmptyInput);
    }

    let gram = x.transpose() * x;
    // lambda * X^T X + I is SPD for every lambda > 0.
    let shifted = &gram * lambda + DMatrix::identity(n, n);
    let chol = Cholesky::new(shifted).ok_or_else(|| {
        Error::DegenerateData("shifted least-squares system is not positive definite".into())
    })?;

    let mut c = chol.solve(&gram) * lambda;
    if affine {
        let v = chol.solve(&DVector::from_element(n, 1.0));
        let total = v.sum();
        if total.abs() < 1e-300 {
            return Err(Error::DegenerateData("affine correction term vanished".into()));
        }
        c += &v * v.transpose() / total;
    }

    Ok(CoefficientMatrix {
        residual: (x - x * &c).norm(),
        affine_violation: affine_violation(&c),
        matrix: c,
        iterations: 0,
        converged: true,
        regularizer: Regularizer::FrobeniusSquaredHalf,
        affine,
        mode: Mode::Noisy,
        primal_residual_trace: Vec::new(),
    })
}

/// `mu_z = min_j max_{i != j} |<x_i, x_j>|`, the scale used to map the
/// sparse solvers' `alpha` parameter to `lambda = alpha / mu_z`.
pub fn compute_mu_z(x: &DMatrix<f64>) -> Result<f64> {
    ensure_finite(x)?;
    let n = x.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "mu_z needs at least two data points".into(),
        ));
    }
    let gram = x.transpose() * x;
    let mut mu = f64::INFINITY;
    for j in 0..n {
        let mut best = 0.0_f64;
        for i in 0..n {
            if i != j {
                best = best.max(gram[(i, j)].abs());
            }
        }
        mu = mu.min(best);
    }
    if mu == 0.0 {
        return Err(Error::DegenerateData(
            "some point is orthogonal to all others (mu_z = 0)".into(),
        ));
    }
    Ok(mu)
}
