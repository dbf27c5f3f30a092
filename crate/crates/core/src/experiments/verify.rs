//! Statistical verification of the geometry predicates on random models.
//!
//! For each requested ambient dimension the runner samples arrangements
//! from the random model, counts how often each predicate holds, and
//! cross-checks the two equivalences the predicates are expected to
//! satisfy on every draw:
//!
//! - embedded-span independence holds exactly when the subspaces are
//!   affinely independent;
//! - plain span independence holds exactly when the subspaces are affinely
//!   independent and the origin lies outside the affine hull of the union.
//!
//! A violation records the offending seed so the draw can be replayed.

use std::fmt::Write as _;

use crate::data::{mix_seed, sample_random_model, RandomModelSpec};
use crate::error::{Error, Result};
use crate::geometry::{
    is_affinely_independent, origin_in_affine_hull, spans_linearly_independent, RankTolerance,
};

#[derive(Debug, Clone)]
pub struct GeometryVerifyConfig {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub ambient_dims: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct GeometryDimReport {
    pub ambient_dim: usize,
    pub trials: usize,
    pub affinely_independent: usize,
    pub origin_in_hull: usize,
    pub embedded_span_independent: usize,
    pub span_independent: usize,
    /// Seeds where embedded-span independence disagreed with affine
    /// independence.
    pub embed_equivalence_violations: Vec<u64>,
    /// Seeds where span independence disagreed with (affinely independent
    /// and origin-free).
    pub span_equivalence_violations: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub dims: Vec<usize>,
    pub per_dim: Vec<GeometryDimReport>,
}

impl GeometryReport {
    pub fn total_violations(&self) -> usize {
        self.per_dim
            .iter()
            .map(|r| r.embed_equivalence_violations.len() + r.span_equivalence_violations.len())
            .sum()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "random model verification, subspace dims {:?}",
            self.dims
        );
        for r in &self.per_dim {
            let _ = writeln!(
                out,
                "D={:>3}: affinely independent {:>4}/{}, origin in hull {:>4}/{}, \
                 embedded spans independent {:>4}/{}, spans independent {:>4}/{}",
                r.ambient_dim,
                r.affinely_independent,
                r.trials,
                r.origin_in_hull,
                r.trials,
                r.embedded_span_independent,
                r.trials,
                r.span_independent,
                r.trials,
            );
            for &s in &r.embed_equivalence_violations {
                let _ = writeln!(out, "  embed equivalence violated at seed {s}");
            }
            for &s in &r.span_equivalence_violations {
                let _ = writeln!(out, "  span equivalence violated at seed {s}");
            }
        }
        if self.total_violations() == 0 {
            let _ = writeln!(out, "equivalence checks: zero violations");
        }
        out
    }
}

pub fn run_geometry_verification(cfg: &GeometryVerifyConfig) -> Result<GeometryReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if cfg.dims.is_empty() || cfg.ambient_dims.is_empty() {
        return Err(Error::EmptyInput);
    }
    let tol = RankTolerance::default();
    let mut per_dim = Vec::with_capacity(cfg.ambient_dims.len());
    for &ambient in &cfg.ambient_dims {
        let mut report = GeometryDimReport {
            ambient_dim: ambient,
            trials: cfg.trials,
            affinely_independent: 0,
            origin_in_hull: 0,
            embedded_span_independent: 0,
            span_independent: 0,
            embed_equivalence_violations: Vec::new(),
            span_equivalence_violations: Vec::new(),
        };
        for trial in 0..cfg.trials {
            let seed = mix_seed(cfg.seed, &[ambient as u64, trial as u64]);
            let spec = RandomModelSpec {
                ambient_dim: ambient,
                dims: cfg.dims.clone(),
                points_per_subspace: 1,
                seed,
            };
            let model = sample_random_model(&spec)?;
            let independent = is_affinely_independent(&model, tol)?.holds;
            let origin = origin_in_affine_hull(&model, tol)?.holds;
            let embedded = spans_linearly_independent(&model, tol, true)?.holds;
            let plain = spans_linearly_independent(&model, tol, false)?.holds;

            report.affinely_independent += independent as usize;
            report.origin_in_hull += origin as usize;
            report.embedded_span_independent += embedded as usize;
            report.span_independent += plain as usize;
            if embedded != independent {
                report.embed_equivalence_violations.push(seed);
            }
            if plain != (independent && !origin) {
                report.span_equivalence_violations.push(seed);
            }
        }
        per_dim.push(report);
    }
    Ok(GeometryReport {
        dims: cfg.dims.clone(),
        per_dim,
    })
}
