use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use groupsim_cli::evaluate::DEFAULT_PAIRS;
use groupsim_cli::{
    cmd_generate, cmd_metrics, cmd_stats, config_schema, load_config, MetricsOptions, Overrides,
};
use groupsim_core::config::Preset;

#[derive(Parser)]
#[command(
    name = "groupsim",
    version,
    about = "Procedural group-activity dataset generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Rgb,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and its manifest.
    Generate(GenerateArgs),
    /// Verify a dataset against its manifest and report statistics.
    Stats {
        /// Dataset root (the directory holding manifest.json).
        path: PathBuf,
    },
    /// Social-force, collision and feature-space metrics.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML config file; see --print-schema.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of simulations.
    #[arg(long, short = 'n')]
    n: Option<usize>,
    /// Append the 26-joint block to motion files.
    #[arg(long)]
    joint_block: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, env = "GROUPSIM_JOBS")]
    jobs: Option<usize>,
    /// Print the config file schema and exit.
    #[arg(long)]
    print_schema: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// Motion file or directory of motion files.
    path: Option<PathBuf>,
    /// Reference motions for FID.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// JSON feature dump with `generated`, optional `reference` and `labels`.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => {
            if a.print_schema {
                println!("{}", serde_json::to_string_pretty(&config_schema())?);
                return Ok(());
            }
            let overrides = Overrides {
                preset: a.preset.map(|p| match p {
                    PresetArg::Rgb => Preset::Rgb,
                    PresetArg::ThreeD => Preset::ThreeD,
                }),
                seed: a.seed,
                out: a.out,
                n_simulations: a.n,
                joint_block: a.joint_block.then_some(true),
            };
            let config = load_config(a.config.as_deref(), &overrides)?;
            let jobs = a.jobs.unwrap_or_else(rayon::current_num_threads);
            let manifest = cmd_generate(&config, jobs)?;
            let failed = manifest
                .simulations
                .iter()
                .filter(|s| s.error.is_some())
                .count();
            println!(
                "wrote {} simulations ({} skipped) to {}",
                manifest.simulations.len() - failed,
                failed,
                config.output_root.display()
            );
        }
        Command::Stats { path } => {
            let report = cmd_stats(&path)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Metrics(a) => {
            let opts = MetricsOptions {
                n_pairs: a.pairs,
                seed: a.seed,
                reference: a.reference,
                features: a.features,
                ..MetricsOptions::default()
            };
            let report = cmd_metrics(a.path.as_deref(), &opts)?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(out) = a.output {
                std::fs::write(&out, &text)
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
