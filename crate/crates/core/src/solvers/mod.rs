//! Self-expression solvers.
//!
//! Four methods share one interface: the coefficient matrix `C` of
//! `X = X C`, regularized either by the entrywise l1 norm (sparse, with a
//! zero-diagonal constraint) or by half the squared Frobenius norm (least
//! squares, unconstrained domain), each with or without the affine
//! column-sum constraint `1^T C = 1^T`, and each either as an exact
//! equality-constrained program or with the self-expressive residual
//! penalized by `lambda/2 ||X - XC||_F^2`.
//!
//! The least-squares problems have closed forms ([`lsr_exact`],
//! [`lsr_noisy`]); the sparse problems are solved by ADMM ([`ssc_solve`]).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod lsr;
mod ssc;

pub use lsr::{compute_mu_z, lsr_exact, lsr_noisy};
pub use ssc::ssc_solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularizer {
    /// Entrywise l1 norm; implies the zero-diagonal domain.
    L1,
    /// Half the squared Frobenius norm; unconstrained domain.
    FrobeniusSquaredHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Enforce `X = XC` as a hard constraint.
    Exact,
    /// Penalize the self-expressive residual with weight `lambda`.
    Noisy,
}

/// ADMM iteration controls shared by the sparse solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmParams {
    pub rho: f64,
    pub max_iters: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 2000,
            abs_tol: 1e-6,
            rel_tol: 1e-4,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {}", self.rho)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0)
            || !(self.rel_tol.is_finite() && self.rel_tol > 0.0)
        {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Full solver selection: regularizer, constraint flags, mode, and the
/// noise parameter given either directly as `lambda` or as `alpha` with
/// `lambda = alpha / mu_z(X)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub regularizer: Regularizer,
    pub affine: bool,
    pub mode: Mode,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub admm: AdmmParams,
}

impl SolverConfig {
    pub fn exact(regularizer: Regularizer, affine: bool) -> Self {
        Self {
            regularizer,
            affine,
            mode: Mode::Exact,
            alpha: None,
            lambda: None,
            admm: AdmmParams::default(),
        }
    }

    pub fn noisy(regularizer: Regularizer, affine: bool, alpha: Option<f64>, lambda: Option<f64>) -> Self {
        Self {
            regularizer,
            affine,
            mode: Mode::Noisy,
            alpha,
            lambda,
            admm: AdmmParams::default(),
        }
    }

    /// The l1 regularizer operates on the zero-diagonal domain; the
    /// Frobenius regularizer on the full matrix space.
    pub fn zero_diagonal(&self) -> bool {
        matches!(self.regularizer, Regularizer::L1)
    }

    pub fn validate(&self) -> Result<()> {
        self.admm.validate()?;
        if self.mode == Mode::Noisy && self.alpha.is_none() && self.lambda.is_none() {
            return Err(Error::InvalidParameter(
                "noisy mode needs alpha or lambda".into(),
            ));
        }
        for (name, v) in [("alpha", self.alpha), ("lambda", self.lambda)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A solved self-expression together with its constraint diagnostics.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    /// The `N x N` coefficient matrix.
    pub matrix: DMatrix<f64>,
    /// `||X - X C||_F`.
    pub residual: f64,
    /// `max_j |sum_i c_ij - 1|`.
    pub affine_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub regularizer: Regularizer,
    pub affine: bool,
    pub mode: Mode,
    /// Primal residual per ADMM iteration; empty for closed-form solves.
    pub primal_residual_trace: Vec<f64>,
}

pub(crate) fn affine_violation(c: &DMatrix<f64>) -> f64 {
    (0..c.ncols())
        .map(|j| (c.column(j).sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Dispatches to the closed-form or iterative solver selected by `cfg`.
pub fn solve(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    match (cfg.regularizer, cfg.mode) {
        (Regularizer::L1, _) => ssc_solve(x, cfg),
        (Regularizer::FrobeniusSquaredHalf, Mode::Exact) => lsr_exact(x, cfg.affine),
        (Regularizer::FrobeniusSquaredHalf, Mode::Noisy) => {
            let lambda = cfg.lambda.ok_or_else(|| {
                Error::InvalidParameter("least-squares noisy mode takes lambda directly".into())
            })?;
            lsr_noisy(x, lambda, cfg.affine)
        }
    }
}

fn ensure_finite(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix)
    }
}
