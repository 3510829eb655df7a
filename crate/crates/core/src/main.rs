use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use soilrom::scenario::{
    comparison_csv, compare_schemes, export_artifacts, load_config, run_scheme, run_truth,
    RunArtifacts, ScenarioConfig, Scheme,
};
use soilrom::{Error, Result};

/// Performance-triggered adaptive model reduction for soil-moisture estimation.
#[derive(Parser)]
#[command(name = "soilrom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scheme and export its artifacts.
    Run(RunArgs),
    /// Run all three schemes on one truth run and write a joined table.
    Compare(RunArgs),
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// performance | static | time_triggered
    #[arg(long)]
    scheme: Option<String>,
    /// Evaluate the error metric every `stride` steps.
    #[arg(long)]
    stride: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = load_config(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(scheme) = &self.scheme {
            cfg.scheme = Scheme::parse(scheme)?;
        }
        if let Some(stride) = self.stride {
            cfg.stride = stride;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summary(a: &RunArtifacts) -> String {
    let last = a.percent_mae.last().copied().unwrap_or(f64::NAN);
    let first = a.percent_mae.first().copied().unwrap_or(f64::NAN);
    let r_m = a.records.last().map_or(0, |r| r.r_m);
    format!(
        "{:<15} %MAE {:>8.3} -> {:>8.3}   identifications {:>3}   final r_m {}",
        a.scheme.name(),
        first,
        last,
        a.identifications(),
        r_m
    )
}

fn write_run(a: &RunArtifacts, cfg: &ScenarioConfig, dir: &Path) -> Result<()> {
    export_artifacts(a, &cfg.grid()?, dir)?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let grid = cfg.grid()?;
            println!(
                "ok: N_x = {}, N_y = {}, steps = {}, dt = {} s",
                grid.n_x(),
                cfg.sensor_nodes(&grid)?.len(),
                cfg.steps,
                cfg.dt
            );
        }
        Command::Run(args) => {
            let cfg = args.load()?;
            let truth = run_truth(&cfg)?;
            let a = run_scheme(&cfg, cfg.scheme, &truth)?;
            write_run(&a, &cfg, &args.outdir)?;
            println!("{}", summary(&a));
        }
        Command::Compare(args) => {
            let cfg = args.load()?;
            let (_, runs) = compare_schemes(&cfg)?;
            for a in &runs {
                write_run(a, &cfg, &args.outdir.join(a.scheme.name()))?;
                println!("{}", summary(a));
            }
            std::fs::write(args.outdir.join("compare.csv"), comparison_csv(&runs)).map_err(Error::from)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
