use thiserror::Error;

/// Errors produced by chain construction, integration, and snapshot I/O.
#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid chain config: {0}")]
    InvalidConfig(String),
    #[error("non-finite value produced at consolidation step {step}")]
    NonFinite { step: u64 },
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),
}

/// Shape of a memory chain. Every parameter in a [`crate::ChainArray`] gets one
/// chain of `n_levels` coupled variables; level 0 is the visible value that the
/// rest of the program reads and writes, deeper levels are slow memory.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Number of variables per chain, including the visible one. Must be in 1..=60.
    pub n_levels: usize,
    /// Coupling strength between the visible level and the next one. Deeper
    /// couplings fall off by powers of two. Zero disables all flow.
    pub g12: f64,
    /// Explicit-Euler time step, measured in external updates per step.
    pub dt: f64,
    /// When true, flow from a deeper level back toward the surface stays off
    /// until enough simulated time has passed for that level to have charged.
    pub gating: bool,
}

/// Per-level constants derived from a [`ChainConfig`].
#[derive(Debug, Clone)]
pub struct ChainGeometry {
    /// `capacities[k] = 2^k`: how much one unit of level `k` counts toward stored mass.
    pub capacities: Vec<f64>,
    /// `conductances[k]` couples level `k` to level `k+1`; the last entry couples
    /// the deepest level to a fixed zero bath and acts as a leak.
    pub conductances: Vec<f64>,
    /// Euler steps that must elapse before the backward term through coupling `k`
    /// switches on (only consulted when `gating` is set). The leak is never gated,
    /// so the last entry is zero.
    pub gate_steps: Vec<u64>,
}

impl ChainGeometry {
    pub fn from_config(cfg: &ChainConfig) -> Self {
        let n = cfg.n_levels;
        let capacities: Vec<f64> = (0..n).map(|k| (1u64 << k) as f64).collect();
        let conductances: Vec<f64> = (0..n).map(|k| cfg.g12 / (1u64 << k) as f64).collect();
        let gate_steps: Vec<u64> = (0..n)
            .map(|k| {
                if k + 1 == n {
                    0
                } else {
                    // Coupling k equilibrates on a timescale ~ 2^(k+1) / g12 external
                    // updates; hold its backward term off until then.
                    let t = (1u64 << (k + 1)) as f64 / (cfg.g12 * cfg.dt);
                    if t.is_finite() {
                        t.ceil() as u64
                    } else {
                        u64::MAX
                    }
                }
            })
            .collect();
        ChainGeometry {
            capacities,
            conductances,
            gate_steps,
        }
    }
}

/// Worst-case per-step relative flow out of any level, i.e.
/// `max_k dt * max_modulation * (g_in + g_out) / capacity_k`.
///
/// The explicit-Euler update is a convex combination of neighbouring levels
/// exactly when this ratio is <= 1; above 1 the scheme can oscillate or blow up.
pub fn stability_ratio(cfg: &ChainConfig, max_modulation: f64) -> f64 {
    let geom = ChainGeometry::from_config(cfg);
    let n = cfg.n_levels;
    let mut worst = 0.0f64;
    for k in 0..n {
        let g_in = if k == 0 { 0.0 } else { geom.conductances[k - 1] };
        let g_out = geom.conductances[k];
        let ratio = cfg.dt * max_modulation * (g_in + g_out) / geom.capacities[k];
        if ratio > worst {
            worst = ratio;
        }
    }
    worst
}

/// Check a config for well-formedness and explicit-Euler stability under the
/// largest modulation factor the caller intends to apply (pass 1.0 when the
/// couplings are never scaled).
pub fn validate_config(cfg: &ChainConfig, max_modulation: f64) -> Result<(), ChainError> {
    if cfg.n_levels == 0 || cfg.n_levels > 60 {
        return Err(ChainError::InvalidConfig(format!(
            "n_levels must be in 1..=60, got {}",
            cfg.n_levels
        )));
    }
    if !cfg.g12.is_finite() || cfg.g12 < 0.0 {
        return Err(ChainError::InvalidConfig(format!(
            "g12 must be finite and >= 0, got {}",
            cfg.g12
        )));
    }
    if !cfg.dt.is_finite() || cfg.dt <= 0.0 {
        return Err(ChainError::InvalidConfig(format!(
            "dt must be finite and > 0, got {}",
            cfg.dt
        )));
    }
    if !max_modulation.is_finite() || max_modulation < 0.0 {
        return Err(ChainError::InvalidConfig(format!(
            "max_modulation must be finite and >= 0, got {max_modulation}"
        )));
    }
    let ratio = stability_ratio(cfg, max_modulation);
    if ratio > 1.0 {
        return Err(ChainError::InvalidConfig(format!(
            "unstable explicit-Euler step: worst per-level flow ratio {ratio:.6} exceeds 1 \
             (n_levels={}, g12={}, dt={}, max_modulation={max_modulation})",
            cfg.n_levels, cfg.g12, cfg.dt
        )));
    }
    Ok(())
}
