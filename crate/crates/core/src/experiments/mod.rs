//! Experiment harness: the synthetic sweep, geometry verification, and
//! generic dataset clustering behind the CLI.
//!
//! Every trial derives its own seed from the master seed, so results are
//! identical for any worker count and any execution order. Timing is kept
//! in memory only; the CSV artifacts contain exclusively deterministic
//! fields and are byte-identical across repeated runs on one platform.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{build_affinity, spectral_cluster, ClusteringResult};
use crate::data::{generate_union_dataset, load_dataset, mix_seed, LoadOptions, RandomModelSpec};
use crate::error::{Error, Result};
use crate::metrics::{acc, spr, GroundTruth};
use crate::solvers::{self, AdmmParams, Mode, Regularizer, SolverConfig};

mod plot;
mod verify;

pub use plot::{emit_plot, render_svg, PlotMetric};
pub use verify::{
    run_geometry_verification, GeometryDimReport, GeometryReport, GeometryVerifyConfig,
};

const CLUSTER_STREAM: u64 = 3;

/// One of the four self-expression methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SSC", alias = "ssc")]
    Ssc,
    #[serde(rename = "A-SSC", alias = "a-ssc", alias = "assc")]
    ASsc,
    #[serde(rename = "LSR", alias = "lsr")]
    Lsr,
    #[serde(rename = "A-LSR", alias = "a-lsr", alias = "alsr")]
    ALsr,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ssc, Method::ASsc, Method::Lsr, Method::ALsr];

    pub fn affine(self) -> bool {
        matches!(self, Method::ASsc | Method::ALsr)
    }

    pub fn regularizer(self) -> Regularizer {
        match self {
            Method::Ssc | Method::ASsc => Regularizer::L1,
            Method::Lsr | Method::ALsr => Regularizer::FrobeniusSquaredHalf,
        }
    }

    fn order(self) -> usize {
        Self::ALL.iter().position(|&m| m == self).unwrap()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Ssc => "SSC",
            Method::ASsc => "A-SSC",
            Method::Lsr => "LSR",
            Method::ALsr => "A-LSR",
        };
        f.write_str(name)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ssc" => Ok(Method::Ssc),
            "a-ssc" | "assc" => Ok(Method::ASsc),
            "lsr" => Ok(Method::Lsr),
            "a-lsr" | "alsr" => Ok(Method::ALsr),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "noisy" => Ok(Mode::Noisy),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

/// Configuration of the synthetic sweep: `num_subspaces` random affine
/// subspaces of dimension `intrinsic_dim` in ambient dimensions
/// `ambient_min..=ambient_max`, `num_points` points total per trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub intrinsic_dim: usize,
    pub num_subspaces: usize,
    pub num_points: usize,
    pub ambient_min: usize,
    pub ambient_max: usize,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub mode: Mode,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub admm: AdmmParams,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            intrinsic_dim: 4,
            num_subspaces: 5,
            num_points: 100,
            ambient_min: 5,
            ambient_max: 30,
            trials: 20,
            methods: Method::ALL.to_vec(),
            mode: Mode::Exact,
            alpha: Some(50.0),
            lambda: None,
            admm: AdmmParams::default(),
            master_seed: 0,
            output: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_subspaces == 0 || self.num_points == 0 {
            return Err(Error::InvalidSpec("need subspaces and points".into()));
        }
        if !self.num_points.is_multiple_of(self.num_subspaces) {
            return Err(Error::InvalidSpec(format!(
                "num_points {} must be divisible by num_subspaces {}",
                self.num_points, self.num_subspaces
            )));
        }
        if self.ambient_min > self.ambient_max {
            return Err(Error::InvalidSpec(format!(
                "empty ambient range {}..={}",
                self.ambient_min, self.ambient_max
            )));
        }
        if self.ambient_min <= self.intrinsic_dim {
            return Err(Error::InvalidSpec(format!(
                "ambient_min {} must exceed intrinsic_dim {}",
                self.ambient_min, self.intrinsic_dim
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidSpec("no methods selected".into()));
        }
        if self.mode == Mode::Noisy {
            let lsr_selected = self
                .methods
                .iter()
                .any(|m| m.regularizer() == Regularizer::FrobeniusSquaredHalf);
            if lsr_selected && self.lambda.is_none() {
                return Err(Error::InvalidSpec(
                    "noisy least-squares methods need an explicit lambda".into(),
                ));
            }
            if self.alpha.is_none() && self.lambda.is_none() {
                return Err(Error::InvalidSpec("noisy mode needs alpha or lambda".into()));
            }
        }
        self.admm.validate()
    }

    pub fn solver_config(&self, method: Method) -> SolverConfig {
        SolverConfig {
            regularizer: method.regularizer(),
            affine: method.affine(),
            mode: self.mode,
            alpha: self.alpha,
            lambda: self.lambda,
            admm: self.admm,
        }
    }
}

/// One (method, ambient dimension, trial) record.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub method: Method,
    pub ambient_dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub spr: f64,
    pub acc: f64,
    pub residual: f64,
    pub converged: bool,
    /// Wall time of solve + cluster; kept out of the CSV artifacts so those
    /// stay byte-identical across runs.
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub ambient_dim: usize,
    pub trials: usize,
    pub mean_spr: f64,
    pub mean_acc: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Per-(method, ambient dimension) means, ordered by method then
    /// dimension.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut out: Vec<AggregateRow> = Vec::new();
        let mut sums: Vec<(f64, f64)> = Vec::new();
        for row in &self.rows {
            match out
                .iter()
                .position(|a| a.method == row.method && a.ambient_dim == row.ambient_dim)
            {
                Some(i) => {
                    out[i].trials += 1;
                    sums[i].0 += row.spr;
                    sums[i].1 += row.acc;
                }
                None => {
                    out.push(AggregateRow {
                        method: row.method,
                        ambient_dim: row.ambient_dim,
                        trials: 1,
                        mean_spr: 0.0,
                        mean_acc: 0.0,
                    });
                    sums.push((row.spr, row.acc));
                }
            }
        }
        for (a, (spr_sum, acc_sum)) in out.iter_mut().zip(sums) {
            a.mean_spr = spr_sum / a.trials as f64;
            a.mean_acc = acc_sum / a.trials as f64;
        }
        out.sort_by_key(|a| (a.method.order(), a.ambient_dim));
        out
    }

    pub fn write_rows_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "method,ambient_dim,trial,seed,spr,acc,residual,converged")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.method, r.ambient_dim, r.trial, r.seed, r.spr, r.acc, r.residual, r.converged
            )?;
        }
        Ok(())
    }

    pub fn write_aggregate_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "method,ambient_dim,trials,mean_spr,mean_acc")?;
        for a in self.aggregate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                a.method, a.ambient_dim, a.trials, a.mean_spr, a.mean_acc
            )?;
        }
        Ok(())
    }

    /// Reads a file previously written by [`SweepResult::write_rows_csv`].
    pub fn read_rows_csv(path: &Path) -> Result<SweepResult> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 8 {
                return Err(Error::ParseError {
                    line: lineno,
                    detail: format!("expected 8 cells, found {}", cells.len()),
                });
            }
            let parse_f = |cell: &str, what: &str| -> Result<f64> {
                cell.parse().map_err(|_| Error::ParseError {
                    line: lineno,
                    detail: format!("{what} {cell:?} is not a number"),
                })
            };
            let parse_u = |cell: &str, what: &str| -> Result<u64> {
                cell.parse().map_err(|_| Error::ParseError {
                    line: lineno,
                    detail: format!("{what} {cell:?} is not an integer"),
                })
            };
            rows.push(SweepRow {
                method: cells[0].parse()?,
                ambient_dim: parse_u(cells[1], "ambient_dim")? as usize,
                trial: parse_u(cells[2], "trial")? as usize,
                seed: parse_u(cells[3], "seed")?,
                spr: parse_f(cells[4], "spr")?,
                acc: parse_f(cells[5], "acc")?,
                residual: parse_f(cells[6], "residual")?,
                converged: cells[7].parse().map_err(|_| Error::ParseError {
                    line: lineno,
                    detail: format!("converged {:?} is not a boolean", cells[7]),
                })?,
                wall_time_ms: 0.0,
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(SweepResult { rows })
    }
}

/// Runs every (ambient dimension, trial) instance of the sweep, in parallel,
/// and reports one row per selected method. Per-instance solver failures
/// that depend on the data (infeasibility, degeneracy) are recorded as NaN
/// rows rather than aborting the sweep.
pub fn run_synthetic_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (cfg.ambient_min..=cfg.ambient_max)
        .flat_map(|d| (0..cfg.trials).map(move |t| (d, t)))
        .collect();
    let groups: Vec<Result<Vec<SweepRow>>> = jobs
        .par_iter()
        .map(|&(ambient, trial)| run_trial(cfg, ambient, trial))
        .collect();
    let mut rows = Vec::with_capacity(jobs.len() * cfg.methods.len());
    for group in groups {
        rows.extend(group?);
    }
    rows.sort_by_key(|r| (r.method.order(), r.ambient_dim, r.trial));
    Ok(SweepResult { rows })
}

fn run_trial(cfg: &SweepConfig, ambient: usize, trial: usize) -> Result<Vec<SweepRow>> {
    let seed = mix_seed(cfg.master_seed, &[ambient as u64, trial as u64]);
    let spec = RandomModelSpec {
        ambient_dim: ambient,
        dims: vec![cfg.intrinsic_dim; cfg.num_subspaces],
        points_per_subspace: cfg.num_points / cfg.num_subspaces,
        seed,
    };
    let (data, _) = generate_union_dataset(&spec)?;
    let truth = GroundTruth::new(data.labels().expect("generated labels").to_vec())?;

    let mut rows = Vec::with_capacity(cfg.methods.len());
    for (mi, &method) in cfg.methods.iter().enumerate() {
        let started = Instant::now();
        let solved = solvers::solve(data.values(), &cfg.solver_config(method));
        let row = match solved {
            Ok(coef) => {
                let spr_value = spr(&coef.matrix, &truth)?.value;
                let affinity = build_affinity(&coef.matrix);
                let cluster_seed = mix_seed(
                    cfg.master_seed,
                    &[ambient as u64, trial as u64, mi as u64, CLUSTER_STREAM],
                );
                let clustering =
                    spectral_cluster(&affinity, cfg.num_subspaces, cluster_seed)?;
                let acc_value = acc(&clustering.labels, truth.labels())?;
                SweepRow {
                    method,
                    ambient_dim: ambient,
                    trial,
                    seed,
                    spr: spr_value,
                    acc: acc_value,
                    residual: coef.residual,
                    converged: coef.converged,
                    wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
                }
            }
            Err(Error::InfeasibleConstraint { .. }) | Err(Error::DegenerateData(_)) => SweepRow {
                method,
                ambient_dim: ambient,
                trial,
                seed,
                spr: f64::NAN,
                acc: f64::NAN,
                residual: f64::NAN,
                converged: false,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            },
            Err(other) => return Err(other),
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Configuration for clustering a CSV dataset end to end.
#[derive(Debug, Clone)]
pub struct ClusterRunConfig {
    pub method: Method,
    pub mode: Mode,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub admm: AdmmParams,
    pub clusters: usize,
    pub seed: u64,
    pub load: LoadOptions,
}

#[derive(Debug, Clone)]
pub struct ClusterRunOutput {
    pub labels: Vec<usize>,
    pub clustering: ClusteringResult,
    pub solver_residual: f64,
    pub solver_converged: bool,
    /// Present only when the dataset carries ground-truth labels.
    pub spr: Option<f64>,
    pub acc: Option<f64>,
}

/// Full pipeline on a CSV file: load, solve the self-expression, build the
/// affinity, spectral-cluster, and score against ground truth when labels
/// are present.
pub fn run_dataset_cluster(path: &Path, cfg: &ClusterRunConfig) -> Result<ClusterRunOutput> {
    let data = load_dataset(path, &cfg.load)?;
    let solver_cfg = SolverConfig {
        regularizer: cfg.method.regularizer(),
        affine: cfg.method.affine(),
        mode: cfg.mode,
        alpha: cfg.alpha,
        lambda: cfg.lambda,
        admm: cfg.admm,
    };
    let coef = solvers::solve(data.values(), &solver_cfg)?;
    let affinity = build_affinity(&coef.matrix);
    let clustering = spectral_cluster(&affinity, cfg.clusters, cfg.seed)?;

    let (spr_value, acc_value) = match data.labels() {
        Some(labels) => {
            let truth = GroundTruth::new(labels.to_vec())?;
            (
                Some(spr(&coef.matrix, &truth)?.value),
                Some(acc(&clustering.labels, truth.labels())?),
            )
        }
        None => (None, None),
    };

    Ok(ClusterRunOutput {
        labels: clustering.labels.clone(),
        clustering,
        solver_residual: coef.residual,
        solver_converged: coef.converged,
        spr: spr_value,
        acc: acc_value,
    })
}
