use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::harness::config::build_config;
use crate::harness::schedule::run_to_dir;

/// One completed sweep point.
pub struct SweepRun {
    pub axis_value: String,
    pub seed: u64,
    pub dir: PathBuf,
    pub wall_seconds: f64,
}

/// Re-run the base config once per axis value (and per seed offset), writing
/// each run under `out/<axis>=<value>/seed<N>/`. The axis must name a real
/// config key; every run keeps all other keys identical, so sweep points are
/// directly comparable.
pub fn run_sweep(
    base: &BTreeMap<String, String>,
    axis: &str,
    values: &[String],
    seeds: u64,
    out: &Path,
) -> Result<Vec<SweepRun>> {
    anyhow::ensure!(!values.is_empty(), "need at least one axis value");
    anyhow::ensure!(seeds >= 1, "need at least one seed");
    let mut runs = Vec::new();
    for value in values {
        let mut with_axis = base.clone();
        with_axis.insert(axis.to_string(), value.clone());
        let base_seed = build_config(with_axis.clone())
            .with_context(|| format!("sweep point {axis}={value}"))?
            .seed;
        for s in 0..seeds {
            let seed = base_seed + s;
            let mut point = with_axis.clone();
            point.insert("seed".to_string(), seed.to_string());
            let cfg = build_config(point).with_context(|| format!("sweep point {axis}={value}"))?;
            let dir = out.join(format!("{axis}={value}")).join(format!("seed{seed}"));
            let log = run_to_dir(&cfg, &dir)
                .with_context(|| format!("running sweep point {axis}={value} seed {seed}"))?;
            runs.push(SweepRun {
                axis_value: value.clone(),
                seed,
                dir,
                wall_seconds: log.wall_seconds,
            });
        }
    }
    Ok(runs)
}
