//! Command-line driver: generate realizations, run experiments and audits,
//! inspect saved realizations.
//!
//! Exit codes: 0 on success, 1 when an experiment's pass criterion fails,
//! 2 on configuration or usage errors.

use anyhow::Context;
use cantor_tubes::config::RunConfig;
use cantor_tubes::construction::Realization;
use cantor_tubes::experiments::{experiment_by_name, experiment_names};
use cantor_tubes::measure::projection_measure_f64;
use cantor_tubes::report::atomic_write;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cantor-tubes",
    about = "Random M-adic subdivision sets: generation, intersection statistics and geometric audits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker thread count (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build a realization and write it as JSON.
    Generate(CommonArgs),
    /// Run one named experiment from the configuration.
    Experiment {
        #[command(flatten)]
        common: CommonArgs,
        /// Experiment name; overrides the configured one.
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the discretization-net and strip-count audits.
    NetAudit(CommonArgs),
    /// Summarize a saved realization.
    Inspect {
        /// Realization JSON produced by `generate`.
        #[arg(value_name = "PATH")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(common) => {
            let cfg = load(&common)?;
            let r = Realization::build_named(&cfg.params, &cfg.rule, cfg.seed)?;
            let path = common.out.join(format!(
                "realization_{}_{}.json",
                cfg.rule.replace('-', "_"),
                cfg.seed
            ));
            atomic_write(&path, r.to_json()?.as_bytes())?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { common, name } => {
            let cfg = load(&common)?;
            let name = name.or_else(|| cfg.experiment.clone()).with_context(|| {
                format!(
                    "no experiment named; pass --name or set 'experiment' (one of: {})",
                    experiment_names().join(", ")
                )
            })?;
            run_experiment(&name, &cfg, &common)
        }
        Command::NetAudit(common) => {
            let cfg = load(&common)?;
            run_experiment("net-audit", &cfg, &common)
        }
        Command::Inspect { input } => {
            let r = Realization::from_json(&std::fs::read_to_string(&input)?)?;
            let depth = r.depth();
            println!("rule: {}", r.rule);
            println!("seed: {}", r.seed);
            println!("dim: {}", r.params.dim);
            println!("depth: {depth}");
            println!("deepest cubes: {}", r.deepest().len());
            println!("side length: {:.6e}", r.params.scale_f64(depth));
            println!("limit dimension: {:.6}", r.params.dimension_value(depth));
            if r.params.dim == 2 {
                for axis in 0..2 {
                    println!(
                        "projection measure (axis {axis}): {:.6}",
                        projection_measure_f64(&r, axis)?
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool already initialized")?;
    }
    let mut cfg = RunConfig::load(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_experiment(name: &str, cfg: &RunConfig, common: &CommonArgs) -> anyhow::Result<ExitCode> {
    let exp = experiment_by_name(name)?;
    let report = exp.run(cfg)?;
    let json_path = common.out.join(format!("{name}_report.json"));
    report.write_json(&json_path)?;
    if common.format == Format::Csv {
        report.write_curves_csv(&common.out)?;
    }
    println!(
        "{name}: {} ({:.2}s), report at {}",
        if report.passed { "PASS" } else { "FAIL" },
        report.runtime_secs,
        json_path.display()
    );
    if report.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
