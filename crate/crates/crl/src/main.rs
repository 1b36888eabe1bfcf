use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use synaptic_rl::harness::{build_config, parse_tokens, run_sweep, run_to_dir, Mode};

/// Continual-RL experiment runner.
#[derive(Parser)]
#[command(name = "synaptic-rl", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a config file.
    Run {
        /// Path to a key=value config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for CSVs and artifacts; metrics stay in memory if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the same config repeatedly with one key swept over several values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Config key to vary.
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long)]
        values: String,
        /// Seeds per axis value (seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a config file, reporting every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_tokens(path: &PathBuf) -> anyhow::Result<std::collections::BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    Ok(parse_tokens(&text)?)
}

fn real_main() -> anyhow::Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { config, seed, out } => {
            let mut map = read_tokens(&config)?;
            if let Some(s) = seed {
                map.insert("seed".into(), s.to_string());
            }
            let cfg = build_config(map)?;
            let log = match &out {
                Some(dir) => run_to_dir(&cfg, dir)?,
                None => synaptic_rl::harness::run_experiment(&cfg, None)?,
            };
            println!(
                "mode={} agent={} seed={} epochs={} episodes_per_epoch={}",
                cfg.mode.name(),
                cfg.agent.name(),
                cfg.seed,
                cfg.epochs,
                cfg.episodes_per_epoch
            );
            for row in &log.epochs {
                match cfg.mode {
                    Mode::Tabular => println!(
                        "epoch {} task {}: first_reward_steps={} steps_to_threshold={}",
                        row.epoch,
                        row.task,
                        row.first_reward_steps
                            .as_ref()
                            .map(|v| v.map_or("never".into(), |x| x.to_string()))
                            .unwrap_or_default(),
                        row.steps_to_threshold
                            .as_ref()
                            .map(|v| v.map_or("never".into(), |x| x.to_string()))
                            .unwrap_or_default(),
                    ),
                    _ => println!(
                        "epoch {} task {}: relearn_episodes={}",
                        row.epoch,
                        row.task,
                        row.relearn_episodes
                            .as_ref()
                            .map(|v| v.map_or("never".into(), |x| x.to_string()))
                            .unwrap_or_default(),
                    ),
                }
            }
            println!("wall_seconds={:.3}", log.wall_seconds);
            if let Some(dir) = out {
                println!("wrote {}", dir.display());
            }
            Ok(())
        }
        Cmd::Sweep {
            config,
            axis,
            values,
            seeds,
            out,
        } => {
            let map = read_tokens(&config)?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            let runs = run_sweep(&map, &axis, &values, seeds, &out)?;
            for run in &runs {
                println!(
                    "{}={} seed={} wall_seconds={:.3} -> {}",
                    axis,
                    run.axis_value,
                    run.seed,
                    run.wall_seconds,
                    run.dir.display()
                );
            }
            Ok(())
        }
        Cmd::Validate { config } => {
            let map = read_tokens(&config)?;
            let cfg = build_config(map)?;
            println!("ok: {} / {} agent", cfg.mode.name(), cfg.agent.name());
            Ok(())
        }
    }
}
