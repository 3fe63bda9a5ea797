//! Command-line front end: `run` one benchmark, `sweep` a study axis
//! over several seeds, or `list-benchmarks`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use demnet::cli::{
    self, benchmark_registry, write_artifacts, write_sweep_csv, CliError, RunConfig,
};

#[derive(Parser)]
#[command(name = "demnet", version, about = "Neural solvers for solid-mechanics benchmark problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one benchmark and write summary.json, field.csv, and
    /// loss_history.csv.
    Run(RunArgs),
    /// Repeat a benchmark while varying one study axis over several
    /// seeds; writes sweep.csv plus per-cell artifacts.
    Sweep(SweepArgs),
    /// List the available run targets.
    ListBenchmarks {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark name (see `list-benchmarks`).
    #[arg(long)]
    problem: Option<String>,
    /// "dem" or "dcm"; defaults to the benchmark's canonical method.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    adam_steps: Option<usize>,
    #[arg(long)]
    lbfgs_steps: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Study axis: layers, neurons, points, or activation.
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values, e.g. `10,30,50`.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    /// Comma-separated seeds (default 0,1,2).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

fn build_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.problem {
        cfg.problem = p.clone();
    }
    if let Some(m) = &common.method {
        cfg.method = Some(m.clone());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = common.adam_steps {
        cfg.schedule.adam_steps = Some(n);
    }
    if let Some(n) = common.lbfgs_steps {
        cfg.schedule.lbfgs_steps = Some(n);
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.display().to_string());
    }
    if cfg.problem.is_empty() {
        return Err(CliError::config("no problem selected; pass --problem or a config file"));
    }
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = build_config(&args.common)?;
    let out = cli::run(&cfg)?;
    if let Some(dir) = &cfg.out {
        write_artifacts(Path::new(dir), &out)?;
    }
    println!("{}", serde_json::to_string_pretty(&out.summary).unwrap());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    if args.values.is_empty() {
        return Err(CliError::config("sweep needs at least one --values entry"));
    }
    let cfg = build_config(&args.common)?;
    let seeds = args.seeds.clone().unwrap_or_else(|| vec![0, 1, 2]);
    let rows = cli::sweep(&cfg, &args.axis, &args.values, &seeds)?;
    let path = match &cfg.out {
        Some(dir) => Path::new(dir).join("sweep.csv"),
        None => PathBuf::from("sweep.csv"),
    };
    write_sweep_csv(&path, &rows)?;
    for r in &rows {
        println!(
            "{}={} seed {}: rel_l2 {:.6e} probe {:.6e} wall {:.1}s",
            r.axis, r.value, r.seed, r.rel_l2, r.probe, r.wall_secs
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_list(json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(benchmark_registry()).unwrap());
    } else {
        for b in benchmark_registry() {
            println!(
                "{:22} {:14} methods {:?} (default {}): {}",
                b.name, b.family, b.methods, b.default_method, b.reference
            );
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ListBenchmarks { json } => {
            cmd_list(*json);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
