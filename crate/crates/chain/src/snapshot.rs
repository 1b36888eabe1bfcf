use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::array::ChainArray;
use crate::config::{ChainConfig, ChainError};

/// Write the full state of a [`ChainArray`] to a text file.
///
/// Format: a header line of `key=value` pairs, then one comma-separated line
/// per level (shallow first). Values are printed with 17 significant digits so
/// the f64 bits survive a round trip.
pub fn write_snapshot<P: AsRef<Path>>(arr: &ChainArray, path: P) -> Result<(), ChainError> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let cfg = arr.config();
    writeln!(
        w,
        "# n_levels={} n_chains={} g12={:e} dt={:e} gating={} steps={}",
        cfg.n_levels,
        arr.n_chains(),
        cfg.g12,
        cfg.dt,
        cfg.gating,
        arr.steps()
    )?;
    for k in 0..cfg.n_levels {
        let row = arr.level(k);
        let mut line = String::with_capacity(row.len() * 24);
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.17e}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a snapshot written by [`write_snapshot`].
pub fn read_snapshot<P: AsRef<Path>>(path: P) -> Result<ChainArray, ChainError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| ChainError::MalformedSnapshot("empty file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| ChainError::MalformedSnapshot("missing header line".into()))?;
    let mut n_levels = None;
    let mut n_chains = None;
    let mut g12 = None;
    let mut dt = None;
    let mut gating = None;
    let mut steps = None;
    for tok in header.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| ChainError::MalformedSnapshot(format!("bad header token {tok:?}")))?;
        let parse_err = |e| ChainError::MalformedSnapshot(format!("bad {key}: {e}"));
        match key {
            "n_levels" => n_levels = Some(val.parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
            "n_chains" => n_chains = Some(val.parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
            "g12" => g12 = Some(val.parse::<f64>().map_err(|e| parse_err(e.to_string()))?),
            "dt" => dt = Some(val.parse::<f64>().map_err(|e| parse_err(e.to_string()))?),
            "gating" => gating = Some(val.parse::<bool>().map_err(|e| parse_err(e.to_string()))?),
            "steps" => steps = Some(val.parse::<u64>().map_err(|e| parse_err(e.to_string()))?),
            other => {
                return Err(ChainError::MalformedSnapshot(format!(
                    "unknown header key {other:?}"
                )))
            }
        }
    }
    let missing = |k: &str| ChainError::MalformedSnapshot(format!("header missing {k}"));
    let cfg = ChainConfig {
        n_levels: n_levels.ok_or_else(|| missing("n_levels"))?,
        g12: g12.ok_or_else(|| missing("g12"))?,
        dt: dt.ok_or_else(|| missing("dt"))?,
        gating: gating.ok_or_else(|| missing("gating"))?,
    };
    let n_chains = n_chains.ok_or_else(|| missing("n_chains"))?;
    let steps = steps.ok_or_else(|| missing("steps"))?;

    let mut levels = Vec::with_capacity(cfg.n_levels * n_chains);
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if k >= cfg.n_levels {
            return Err(ChainError::MalformedSnapshot(format!(
                "more than {} level rows",
                cfg.n_levels
            )));
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|e| {
                ChainError::MalformedSnapshot(format!("bad value {field:?}: {e}"))
            })?;
            levels.push(v);
        }
    }
    ChainArray::from_levels(cfg, n_chains, levels, steps)
}
