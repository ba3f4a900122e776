use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use interlace::analytics::analyze;
use interlace::predictors::PredictorKind;
use interlace::runner::{emit_reports, parse_config, predict_bench, preflight, run_experiments, Overrides, ReportFormat};
use interlace::stabilizers::StabilizerKind;

#[derive(Parser)]
#[command(name = "interlace", version, about = "Skip Graph churn simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the stabilizer × predictor × backup-size matrix and write reports.
    Run(RunArgs),
    /// Evaluate the analytical success-probability chain.
    Analyze(AnalyzeArgs),
    /// Prediction error of every predictor on one churn trace.
    PredictBench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file with flat kebab-case keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    slots: Option<u32>,
    #[arg(long)]
    topologies: Option<u32>,
    /// Per-slot search limit, or `none`.
    #[arg(long)]
    search_cap: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_delimiter = ',')]
    backup_size: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    stabilizer: Option<Vec<StabilizerKind>>,
    #[arg(long, value_delimiter = ',')]
    predictor: Option<Vec<PredictorKind>>,
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<ReportFormat>>,
    /// Write a per-search NDJSON trace next to the reports.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// System capacity.
    #[arg(long, default_value_t = 1024)]
    n: u64,
    /// Per-slot failure probability.
    #[arg(long, default_value_t = 0.82)]
    q: f64,
    /// Backup size.
    #[arg(long, default_value_t = 40)]
    b: u32,
    /// Target expected failure path length for the backup-size estimate.
    #[arg(long)]
    target_path: Option<f64>,
}

fn parse_search_cap(s: &str) -> Result<Option<u64>> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        Ok(Some(s.parse().with_context(|| format!("--search-cap: expected an integer or `none`, got `{s}`"))?))
    }
}

impl CommonArgs {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            seed: self.seed,
            capacity: self.capacity,
            slots: self.slots,
            topologies: self.topologies,
            search_cap: self.search_cap.as_deref().map(parse_search_cap).transpose()?,
            out: self.out.clone(),
            ..Overrides::default()
        })
    }
}

fn run(args: RunArgs) -> Result<()> {
    let overrides = Overrides {
        backup_sizes: args.backup_size,
        stabilizers: args.stabilizer,
        predictors: args.predictor,
        formats: args.format,
        trace: args.trace,
        ..args.common.overrides()?
    };
    let spec = parse_config(args.common.config.as_deref(), &overrides).context("invalid configuration")?;
    preflight(&spec.out_dir).with_context(|| format!("output directory {} is not writable", spec.out_dir.display()))?;
    let reports = run_experiments(&spec)?;
    for path in emit_reports(&reports, &spec.formats, &spec.out_dir)? {
        eprintln!("wrote {}", path.display());
    }
    for r in &reports {
        let row = &r.row;
        println!(
            "{:<10} {:<8} b={:<3} success {:.4}  latency {:.1} ms  prediction error {:.4}  msgs/resolve {:.2}",
            row.stabilizer,
            row.predictor,
            row.backup_size,
            row.avg_success_ratio,
            row.avg_search_latency_ms,
            row.avg_prediction_error,
            row.avg_resolve_messages
        );
    }
    Ok(())
}

fn predict(args: BenchArgs) -> Result<()> {
    let spec = parse_config(args.common.config.as_deref(), &args.common.overrides()?).context("invalid configuration")?;
    if args.common.out.is_some() {
        preflight(&spec.out_dir)?;
    }
    let errors = predict_bench(&spec.base)?;
    let mut csv = String::from("predictor,meanError,stdDev,samples\n");
    println!("{:<10} {:>10} {:>10}", "predictor", "error", "std");
    for e in &errors {
        println!("{:<10} {:>10.4} {:>10.4}", e.predictor.to_string(), e.mean_error, e.std_dev);
        csv.push_str(&format!("{},{},{},{}\n", e.predictor, e.mean_error, e.std_dev, e.samples));
    }
    if args.common.out.is_some() {
        let path = spec.out_dir.join("predict_bench.csv");
        std::fs::write(&path, csv)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn analytics(args: AnalyzeArgs) -> Result<()> {
    let report = analyze(args.n, args.q, args.b, args.target_path)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Analyze(a) => analytics(a),
        Command::PredictBench(a) => predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
