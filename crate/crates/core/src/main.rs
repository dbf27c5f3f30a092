//! `affsc` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use affsc::data::LoadOptions;
use affsc::error::Error;
use affsc::experiments::{
    emit_plot, run_dataset_cluster, run_geometry_verification, run_synthetic_sweep,
    ClusterRunConfig, GeometryVerifyConfig, Method, PlotMetric, SweepConfig, SweepResult,
};
use affsc::solvers::{AdmmParams, Mode};

#[derive(Parser)]
#[command(
    name = "affsc",
    version,
    about = "Subspace clustering for unions of affine subspaces: sparse and \
             least-squares self-expression, with or without the affine constraint"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic random-model sweep and write CSV results.
    Sweep(SweepArgs),
    /// Sample random models and check the independence equivalences.
    VerifyGeometry(VerifyArgs),
    /// Cluster a CSV dataset with one of the four methods.
    Cluster(ClusterArgs),
    /// Render an SVG curve plot from a sweep rows CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file mirroring the sweep config fields; overrides the flags
    /// below when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Intrinsic dimension of every subspace.
    #[arg(long, default_value_t = 4)]
    intrinsic_dim: usize,
    #[arg(long, default_value_t = 5)]
    num_subspaces: usize,
    /// Total points per trial (split evenly across subspaces).
    #[arg(long, default_value_t = 100)]
    num_points: usize,
    #[arg(long, default_value_t = 5)]
    ambient_min: usize,
    #[arg(long, default_value_t = 30)]
    ambient_max: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Comma-separated subset of: ssc, a-ssc, lsr, a-lsr.
    #[arg(long, value_delimiter = ',', value_parser = parse_method,
          default_values_t = Method::ALL)]
    methods: Vec<Method>,
    /// exact | noisy
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    mode: Mode,
    /// Sparse-solver parameter; noisy mode uses lambda = alpha / mu_z.
    #[arg(long)]
    alpha: Option<f64>,
    /// Direct residual weight for noisy mode.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// ADMM iteration cap for the sparse solvers.
    #[arg(long)]
    max_iters: Option<usize>,
    /// ADMM penalty weight (default 1.0; raise toward lambda to speed up
    /// the affine constraint in noisy mode).
    #[arg(long)]
    rho: Option<f64>,
    /// Output directory for sweep_rows.csv and sweep_aggregate.csv.
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
    /// Also write SVG plots for the given metrics (spr, acc).
    #[arg(long, value_delimiter = ',', value_parser = parse_metric)]
    plot: Vec<PlotMetric>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated subspace dimensions, e.g. 4,4,4,4,4.
    #[arg(long, value_delimiter = ',', default_values_t = vec![4, 4, 4, 4, 4])]
    dims: Vec<usize>,
    /// Comma-separated ambient dimensions to test, e.g. 23,24,25.
    #[arg(long, value_delimiter = ',', default_values_t = vec![23, 24, 25])]
    ambient: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ClusterArgs {
    /// CSV dataset: one row per point, optional trailing `label` column.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Number of clusters.
    #[arg(long)]
    clusters: usize,
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// ADMM iteration cap for the sparse solvers.
    #[arg(long)]
    max_iters: Option<usize>,
    /// ADMM penalty weight (default 1.0; raise toward lambda to speed up
    /// the affine constraint in noisy mode).
    #[arg(long)]
    rho: Option<f64>,
    /// Subtract the mean point before clustering.
    #[arg(long)]
    center: bool,
    /// Scale each point to unit norm before clustering.
    #[arg(long)]
    normalize: bool,
    /// Where to write the predicted labels CSV.
    #[arg(long, default_value = "labels.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Rows CSV produced by the sweep subcommand.
    #[arg(long)]
    rows: PathBuf,
    #[arg(long, default_value = "spr", value_parser = parse_metric)]
    metric: PlotMetric,
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<PlotMetric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore the error from re-initializing in repeated in-process runs.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// 2 for configuration problems, 3 for I/O and input-file problems,
/// 1 otherwise.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_)
        | Error::InvalidSpec(_)
        | Error::InvalidLabels(_)
        | Error::DimensionMismatch(_) => 2,
        Error::Io(_) | Error::ParseError { .. } | Error::EmptyInput => 3,
        _ => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Sweep(args) => sweep(args),
        Command::VerifyGeometry(args) => verify(args),
        Command::Cluster(args) => cluster(args),
        Command::Plot(args) => plot(args),
    }
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<SweepConfig>(&text)
                .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?
        }
        None => SweepConfig {
            intrinsic_dim: args.intrinsic_dim,
            num_subspaces: args.num_subspaces,
            num_points: args.num_points,
            ambient_min: args.ambient_min,
            ambient_max: args.ambient_max,
            trials: args.trials,
            methods: args.methods.clone(),
            mode: args.mode,
            alpha: args.alpha,
            lambda: args.lambda,
            admm: admm_params(args.max_iters, args.rho),
            master_seed: args.seed,
            output: None,
        },
    };
    let out_dir = cfg.output.clone().unwrap_or_else(|| args.out.clone());
    let result = run_synthetic_sweep(&cfg)?;
    std::fs::create_dir_all(&out_dir)?;

    let rows_path = out_dir.join("sweep_rows.csv");
    let mut rows_file = std::fs::File::create(&rows_path)?;
    result.write_rows_csv(&mut rows_file)?;

    let agg_path = out_dir.join("sweep_aggregate.csv");
    let mut agg_file = std::fs::File::create(&agg_path)?;
    result.write_aggregate_csv(&mut agg_file)?;

    for metric in &args.plot {
        let name = match metric {
            PlotMetric::Spr => "sweep_spr.svg",
            PlotMetric::Acc => "sweep_acc.svg",
        };
        emit_plot(&result, *metric, &out_dir.join(name))?;
    }

    let total_ms: f64 = result.rows.iter().map(|r| r.wall_time_ms).sum();
    println!(
        "wrote {} rows to {} (total solver+cluster time {:.1}s)",
        result.rows.len(),
        rows_path.display(),
        total_ms / 1e3
    );
    for a in result.aggregate() {
        println!(
            "{:>6}  D={:>3}  mean SPR {:.4}  mean ACC {:.4}",
            a.method.to_string(),
            a.ambient_dim,
            a.mean_spr,
            a.mean_acc
        );
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Error> {
    let cfg = GeometryVerifyConfig {
        trials: args.trials,
        dims: args.dims,
        ambient_dims: args.ambient,
        seed: args.seed,
    };
    let report = run_geometry_verification(&cfg)?;
    print!("{}", report.render_text());
    Ok(())
}

fn admm_params(max_iters: Option<usize>, rho: Option<f64>) -> AdmmParams {
    let defaults = AdmmParams::default();
    AdmmParams {
        max_iters: max_iters.unwrap_or(defaults.max_iters),
        rho: rho.unwrap_or(defaults.rho),
        ..defaults
    }
}

fn cluster(args: ClusterArgs) -> Result<(), Error> {
    let cfg = ClusterRunConfig {
        method: args.method,
        mode: args.mode,
        alpha: args.alpha,
        lambda: args.lambda,
        admm: admm_params(args.max_iters, args.rho),
        clusters: args.clusters,
        seed: args.seed,
        load: LoadOptions {
            normalize: args.normalize,
            center: args.center,
        },
    };
    let output = run_dataset_cluster(&args.data, &cfg)?;

    let mut file = std::fs::File::create(&args.out)?;
    use std::io::Write;
    writeln!(file, "label")?;
    for l in &output.labels {
        writeln!(file, "{l}")?;
    }

    println!(
        "clustered {} points into {} groups (solver residual {:.3e}, converged: {})",
        output.labels.len(),
        args.clusters,
        output.solver_residual,
        output.solver_converged
    );
    println!("labels written to {}", args.out.display());
    match (output.spr, output.acc) {
        (Some(spr), Some(acc)) => {
            println!("SPR {spr:.4}  ACC {acc:.4}");
        }
        _ => println!("no ground-truth labels in the dataset; metrics omitted"),
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Result<(), Error> {
    let result = SweepResult::read_rows_csv(&args.rows)?;
    emit_plot(&result, args.metric, &args.out)?;
    println!("plot written to {}", args.out.display());
    Ok(())
}
