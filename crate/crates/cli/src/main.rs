use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shapegraph_cli::config::{self, GridConfig, ModelKind, TransferConfig, TransferSource, TrialConfig};
use shapegraph_cli::error::{CliError, Result};
use shapegraph_cli::io;
use shapegraph_cli::trial::{self, Axis};
use shapegraph_core::dataset::{generate_synthetic_with_truth, SyntheticField, SyntheticSpec};
use shapegraph_core::graph::ConnectionStrategy;

/// Graph-based shape-error prediction experiments: synthetic data
/// generation, single trials, grid sweeps, transfer runs, and report
/// aggregation.
#[derive(Parser)]
#[command(name = "shapegraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (table.csv, table.meta.json, truth.csv).
    Generate(GenerateArgs),
    /// Run one trial config (all of its seeds).
    Trial(TrialArgs),
    /// Run a grid sweep and emit trend tables and plots.
    Grid(GridArgs),
    /// Evaluate a frozen model on another geometry.
    Transfer(TransferArgs),
    /// Re-aggregate existing trial directories along one axis.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON file with the synthetic recipe; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "data")]
    out: PathBuf,
    #[arg(long)]
    n_steps: Option<u32>,
    #[arg(long)]
    points_per_step: Option<u32>,
    /// Feature dimension (>= 2).
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    label_ratio: Option<f64>,
    /// Ground-truth field: `constant:<mm>`, `linear`, or `smooth`.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override: run only this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel workers across seeds (default 1 = fully sequential).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override: gcn or svr.
    #[arg(long)]
    model: Option<String>,
    /// Override: knn:K, temporal:T, or hybrid:K,T.
    #[arg(long)]
    strategy: Option<String>,
    /// Override: node filter percentage.
    #[arg(long)]
    filter: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    /// Parallel workers across grid cells (default 1 = fully sequential).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransferArgs {
    /// Transfer config file; --ckpt/--target/--strategy override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frozen model to evaluate (model.ckpt from a trial).
    #[arg(long)]
    ckpt: Option<PathBuf>,
    /// Target geometry CSV.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding trial subdirectories.
    #[arg(long)]
    dir: PathBuf,
    /// Grid axis to aggregate along: k, t, or filter.
    #[arg(long)]
    axis: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_field(text: &str) -> Result<SyntheticField> {
    if let Some(value) = text.strip_prefix("constant:") {
        let c: f64 = value
            .parse()
            .map_err(|_| CliError::Config(format!("bad constant field value `{value}`")))?;
        return Ok(SyntheticField::Constant(c));
    }
    match text {
        "linear" => Ok(SyntheticField::Linear),
        "smooth" => Ok(SyntheticField::Smooth),
        other => Err(CliError::Config(format!(
            "unknown field `{other}` (constant:<mm>|linear|smooth)"
        ))),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => config::load_json::<SyntheticSpec>(path)?,
        None => SyntheticSpec {
            n_time_steps: 20,
            points_per_step: 50,
            d: 4,
            label_ratio: 0.065,
            field: SyntheticField::Smooth,
            noise_sd: 0.0005,
            seed: 0,
        },
    };
    if let Some(v) = args.n_steps {
        spec.n_time_steps = v;
    }
    if let Some(v) = args.points_per_step {
        spec.points_per_step = v;
    }
    if let Some(v) = args.d {
        spec.d = v;
    }
    if let Some(v) = args.label_ratio {
        spec.label_ratio = v;
    }
    if let Some(f) = &args.field {
        spec.field = parse_field(f)?;
    }
    if let Some(v) = args.noise_sd {
        spec.noise_sd = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    let (table, truth) = generate_synthetic_with_truth(&spec)?;
    let csv = io::save_table(&args.out, &table, "synthetic")?;
    io::save_truth(&args.out, &truth)?;
    println!(
        "generated {} nodes ({} labeled, ratio {:.3}) -> {}",
        table.n(),
        table.n_labeled(),
        table.labeled_ratio(),
        csv.display()
    );
    Ok(())
}

fn cmd_trial(args: TrialArgs) -> Result<()> {
    let mut cfg: TrialConfig = config::load_json(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(model) = &args.model {
        cfg.model = ModelKind::parse(model)?;
    }
    if let Some(strategy) = &args.strategy {
        cfg.strategy = ConnectionStrategy::parse(strategy).map_err(CliError::from)?;
    }
    if let Some(filter) = args.filter {
        cfg.filter_pct = filter;
    }
    let outcomes = trial::run_trial(&cfg, args.jobs)?;
    for o in &outcomes {
        println!(
            "seed {:>3}  MAE {:.6} mm ({:.1} um)  n_eval {}  -> {}",
            o.seed,
            o.mae_mm,
            o.mae_mm * 1000.0,
            o.n_eval,
            o.dir.display()
        );
    }
    if outcomes.len() > 1 {
        let mean = outcomes.iter().map(|o| o.mae_mm).sum::<f64>() / outcomes.len() as f64;
        println!("mean MAE over {} seeds: {:.6} mm", outcomes.len(), mean);
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<ExitCode> {
    let mut cfg: GridConfig = config::load_json(&args.config)?;
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    let summary = trial::run_grid(&cfg, args.jobs)?;
    println!(
        "grid: {} cells, {} failed; cells table -> {}",
        summary.total,
        summary.failed,
        summary.cells_csv.display()
    );
    for f in &summary.trend_files {
        println!("trend -> {}", f.display());
    }
    if let Some((message, code)) = summary.first_failure {
        eprintln!("first failure: {message}");
        return Ok(ExitCode::from(code as u8));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_transfer(args: TransferArgs) -> Result<()> {
    let mut cfg: TransferConfig = match &args.config {
        Some(path) => config::load_json(path)?,
        None => {
            let ckpt = args.ckpt.clone().ok_or_else(|| {
                CliError::Config("transfer needs --config or --ckpt/--target".into())
            })?;
            let target = args.target.clone().ok_or_else(|| {
                CliError::Config("transfer needs --target".into())
            })?;
            TransferConfig {
                source: TransferSource::Checkpoint(ckpt),
                target_csv: target,
                strategy: ConnectionStrategy::Knn { k: 8 },
                out_dir: PathBuf::from("runs"),
                histogram_bins: shapegraph_core::eval::DEFAULT_HISTOGRAM_BINS,
            }
        }
    };
    if let Some(ckpt) = args.ckpt {
        cfg.source = TransferSource::Checkpoint(ckpt);
    }
    if let Some(target) = args.target {
        cfg.target_csv = target;
    }
    if let Some(strategy) = &args.strategy {
        cfg.strategy = ConnectionStrategy::parse(strategy).map_err(CliError::from)?;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    let outcome = trial::run_transfer(&cfg)?;
    println!(
        "transfer MAE {:.6} mm ({:.1} um) over {} nodes",
        outcome.report.eval.mae_mm,
        outcome.report.eval.mae_um,
        outcome.report.eval.n_eval
    );
    for (group, mae) in &outcome.report.eval.group_mae_mm {
        println!("  group {group}: {mae:.6} mm");
    }
    println!("-> {}", outcome.dir.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let axis = Axis::parse(&args.axis)?;
    let out = args.out.unwrap_or_else(|| args.dir.clone());
    let (rows, used) = trial::reaggregate(&args.dir, axis, &out)?;
    println!("aggregated {used} trials into {} axis values -> {}", rows.len(), out.display());
    for r in &rows {
        println!(
            "  {} = {:<6} mean MAE {:.6} mm (std {:.6}, n {})",
            args.axis, r.axis_value, r.mean_mae_mm, r.std_mae_mm, r.n_seeds
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<ExitCode> = match cli.command {
        Command::Generate(args) => cmd_generate(args).map(|_| ExitCode::SUCCESS),
        Command::Trial(args) => cmd_trial(args).map(|_| ExitCode::SUCCESS),
        Command::Grid(args) => cmd_grid(args),
        Command::Transfer(args) => cmd_transfer(args).map(|_| ExitCode::SUCCESS),
        Command::Report(args) => cmd_report(args).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
