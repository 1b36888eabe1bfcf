use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{validate_config, ChainConfig, ChainError, ChainGeometry};
use crate::stability_ratio;

/// Chains are processed in tiles of this many columns so that all levels of a
/// tile stay cache-resident across the depth sweep.
const TILE: usize = 4096;

/// Which flow components a per-chain modulation factor scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationKind {
    /// Scale every tube's conductance as a whole, so exchange in both
    /// directions (and the final leak) speeds up or slows down together.
    Tube,
    /// Scale only the shallow-to-deep component of each tube's flux (and the
    /// final leak). The deep-to-shallow return flow keeps its baseline rate,
    /// so a low factor freezes consolidation without also cutting off recall.
    Forward,
}

/// Per-chain flow scaling for a consolidation step.
#[derive(Clone, Copy)]
pub struct Modulation<'a> {
    pub kind: ModulationKind,
    /// One non-negative factor per chain; factors are clamped to the largest
    /// stable value for the configured geometry.
    pub factors: &'a [f64],
}

impl<'a> Modulation<'a> {
    pub fn tube(factors: &'a [f64]) -> Self {
        Modulation { kind: ModulationKind::Tube, factors }
    }

    pub fn forward(factors: &'a [f64]) -> Self {
        Modulation { kind: ModulationKind::Forward, factors }
    }
}

/// A bank of `n_chains` identical memory chains, one per scalar parameter.
///
/// Storage is depth-major: row `k` of `levels` holds level `k` of every chain,
/// so the visible parameter vector is the contiguous first row. All chains
/// advance in lockstep under explicit Euler; chains never interact, which makes
/// the per-step cost O(n_chains * n_levels) with unit constants.
pub struct ChainArray {
    cfg: ChainConfig,
    geom: ChainGeometry,
    n_chains: usize,
    levels: Vec<f64>,
    steps: u64,
    /// `coeff_up[k] = dt * g_{k-1,k} / capacity_k`, pull of level k toward level k-1.
    coeff_up: Vec<f64>,
    /// `coeff_down[k] = dt * g_{k,k+1} / capacity_k`, pull of level k toward level
    /// k+1 (toward the zero bath for the deepest level).
    coeff_down: Vec<f64>,
    /// Largest admissible per-chain modulation factor; factors above this are
    /// clamped so the Euler step stays a convex combination.
    mod_cap: f64,
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
    zeros: Vec<f64>,
}

impl ChainArray {
    /// Build an all-zero array. The config is validated for stability at
    /// modulation 1; larger runtime modulation factors are clamped per step.
    pub fn new(cfg: ChainConfig, n_chains: usize) -> Result<Self, ChainError> {
        validate_config(&cfg, 1.0)?;
        let geom = ChainGeometry::from_config(&cfg);
        let n = cfg.n_levels;
        let coeff_up: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    cfg.dt * geom.conductances[k - 1] / geom.capacities[k]
                }
            })
            .collect();
        let coeff_down: Vec<f64> = (0..n)
            .map(|k| cfg.dt * geom.conductances[k] / geom.capacities[k])
            .collect();
        let ratio1 = stability_ratio(&cfg, 1.0);
        let mod_cap = if ratio1 > 0.0 { 1.0 / ratio1 } else { f64::INFINITY };
        let tile = TILE.min(n_chains.max(1));
        Ok(ChainArray {
            levels: vec![0.0; n * n_chains],
            geom,
            n_chains,
            steps: 0,
            coeff_up,
            coeff_down,
            mod_cap,
            buf_a: vec![0.0; tile],
            buf_b: vec![0.0; tile],
            zeros: vec![0.0; tile],
            cfg,
        })
    }

    /// Rebuild an array from raw depth-major level data (e.g. a snapshot).
    pub fn from_levels(
        cfg: ChainConfig,
        n_chains: usize,
        levels: Vec<f64>,
        steps: u64,
    ) -> Result<Self, ChainError> {
        if levels.len() != cfg.n_levels * n_chains {
            return Err(ChainError::LengthMismatch {
                expected: cfg.n_levels * n_chains,
                got: levels.len(),
            });
        }
        let mut arr = ChainArray::new(cfg, n_chains)?;
        arr.levels = levels;
        arr.steps = steps;
        Ok(arr)
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &ChainGeometry {
        &self.geom
    }

    pub fn n_chains(&self) -> usize {
        self.n_chains
    }

    pub fn n_levels(&self) -> usize {
        self.cfg.n_levels
    }

    /// Euler steps taken so far (drives the gating clock).
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The visible parameter vector (level 0 of every chain).
    pub fn visible(&self) -> &[f64] {
        &self.levels[..self.n_chains]
    }

    /// One full level across chains.
    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k * self.n_chains..(k + 1) * self.n_chains]
    }

    /// All levels of one chain, shallow to deep.
    pub fn chain(&self, i: usize) -> Vec<f64> {
        (0..self.cfg.n_levels)
            .map(|k| self.levels[k * self.n_chains + i])
            .collect()
    }

    /// Overwrite the visible level, leaving deeper levels untouched.
    pub fn set_visible(&mut self, values: &[f64]) -> Result<(), ChainError> {
        if values.len() != self.n_chains {
            return Err(ChainError::LengthMismatch {
                expected: self.n_chains,
                got: values.len(),
            });
        }
        self.levels[..self.n_chains].copy_from_slice(values);
        Ok(())
    }

    /// Initialise the hidden levels from the current visible values.
    ///
    /// For chain `i` with `base_std[i] > 0`, level `k >= 1` is drawn from a
    /// zero-mean Gaussian with std `base_std[i] * sqrt(1 - k/n)`, mimicking a
    /// chain that has already absorbed a long history of updates of that size.
    /// Chains with `base_std[i] == 0` (deterministically initialised parameters)
    /// instead copy the visible value into every level so they start at
    /// equilibrium and are not dragged toward zero. Draws are made level-major
    /// then chain-major, and only for chains with positive std, so the stream of
    /// consumed random numbers is reproducible for a given layout.
    pub fn init_hidden_from_visible<R: Rng>(
        &mut self,
        base_std: &[f64],
        rng: &mut R,
    ) -> Result<(), ChainError> {
        if base_std.len() != self.n_chains {
            return Err(ChainError::LengthMismatch {
                expected: self.n_chains,
                got: base_std.len(),
            });
        }
        let n = self.cfg.n_levels;
        let m = self.n_chains;
        for k in 1..n {
            let decay = (1.0 - k as f64 / n as f64).max(0.0).sqrt();
            for i in 0..m {
                self.levels[k * m + i] = if base_std[i] > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    base_std[i] * decay * z
                } else {
                    self.levels[i]
                };
            }
        }
        Ok(())
    }

    /// Add an external update to the visible level (a gradient step, a TD step,
    /// ...). Deeper levels only ever move through [`ChainArray::consolidate`].
    pub fn apply_external(&mut self, delta: &[f64]) -> Result<(), ChainError> {
        if delta.len() != self.n_chains {
            return Err(ChainError::LengthMismatch {
                expected: self.n_chains,
                got: delta.len(),
            });
        }
        let visible = &mut self.levels[..self.n_chains];
        for (v, d) in visible.iter_mut().zip(delta) {
            *v += d;
        }
        Ok(())
    }

    /// As [`ChainArray::apply_external`], but for a contiguous run of chains
    /// starting at `start`. Useful when updates only touch part of the
    /// parameter vector.
    pub fn apply_external_range(&mut self, start: usize, delta: &[f64]) -> Result<(), ChainError> {
        if start + delta.len() > self.n_chains {
            return Err(ChainError::LengthMismatch {
                expected: self.n_chains,
                got: start + delta.len(),
            });
        }
        let visible = &mut self.levels[start..start + delta.len()];
        for (v, d) in visible.iter_mut().zip(delta) {
            *v += d;
        }
        Ok(())
    }

    /// Signed stored mass of one chain: sum over levels of capacity * value.
    pub fn chain_mass(&self, i: usize) -> f64 {
        (0..self.cfg.n_levels)
            .map(|k| self.geom.capacities[k] * self.levels[k * self.n_chains + i])
            .sum()
    }

    /// Sum of [`ChainArray::chain_mass`] over all chains.
    pub fn total_mass(&self) -> f64 {
        (0..self.n_chains).map(|i| self.chain_mass(i)).sum()
    }

    /// Advance every chain by `n_steps` explicit-Euler steps.
    ///
    /// `modulation` optionally scales the couplings of chain `i` by
    /// `factors[i]` (clamped to `[0, cap]` where the cap keeps the step
    /// stable); see [`ModulationKind`] for which flow components the factor
    /// applies to. Errors if any level becomes non-finite; detection piggybacks
    /// on a running sum of the updated values, so the common path costs one
    /// extra add per element.
    pub fn consolidate(
        &mut self,
        n_steps: u64,
        modulation: Option<Modulation>,
    ) -> Result<(), ChainError> {
        if let Some(m) = modulation {
            if m.factors.len() != self.n_chains {
                return Err(ChainError::LengthMismatch {
                    expected: self.n_chains,
                    got: m.factors.len(),
                });
            }
        }
        if self.cfg.g12 == 0.0 {
            // Every coupling is zero: the step is the identity. Skipping the
            // arithmetic keeps the stored bits (zero signs included) untouched.
            self.steps += n_steps;
            return Ok(());
        }
        for _ in 0..n_steps {
            let probe = self.step(modulation);
            self.steps += 1;
            if !probe.is_finite() && self.levels.iter().any(|v| !v.is_finite()) {
                // A finite-but-overflowing sum of legitimate values is let
                // through; an actual NaN/inf level is not.
                return Err(ChainError::NonFinite { step: self.steps });
            }
        }
        Ok(())
    }

    /// One Euler step over all chains; returns the sum of all updated levels as
    /// a cheap non-finiteness probe.
    fn step(&mut self, modulation: Option<Modulation>) -> f64 {
        let n = self.cfg.n_levels;
        let m = self.n_chains;
        // Effective downward coefficients for this step: the backward term of a
        // gated coupling is dropped outright while its gate is closed. The
        // forward term lives in coeff_up of the deeper level and always flows.
        let gating = self.cfg.gating;
        let steps = self.steps;
        let eff_down: Vec<f64> = (0..n)
            .map(|k| {
                if k + 1 == n || !gating || steps >= self.geom.gate_steps[k] {
                    self.coeff_down[k]
                } else {
                    0.0
                }
            })
            .collect();

        let mut buf_old = std::mem::take(&mut self.buf_a);
        let mut buf_prev = std::mem::take(&mut self.buf_b);
        let zeros = std::mem::take(&mut self.zeros);
        let mut acc = 0.0f64;

        let mut c0 = 0;
        while c0 < m {
            let w = TILE.min(m - c0);
            for k in 0..n {
                let a = self.coeff_up[k];
                let b = eff_down[k];
                // Split so we can write row k while reading the old row k+1.
                let (head, tail) = self.levels.split_at_mut((k + 1) * m);
                let row = &mut head[k * m + c0..k * m + c0 + w];
                buf_old[..w].copy_from_slice(row);
                let down: &[f64] = if k + 1 < n {
                    &tail[c0..c0 + w]
                } else {
                    &zeros[..w]
                };
                // For k == 0 the upward pull has zero coefficient; aliasing the
                // "row above" to the row itself keeps one kernel for all depths.
                let up: &[f64] = if k == 0 { &buf_old[..w] } else { &buf_prev[..w] };
                match modulation {
                    None => {
                        for c in 0..w {
                            let o = buf_old[c];
                            row[c] = o + (a * (up[c] - o) + b * (down[c] - o));
                        }
                    }
                    Some(Modulation { kind: ModulationKind::Tube, factors }) => {
                        let cap = self.mod_cap;
                        let f = &factors[c0..c0 + w];
                        for c in 0..w {
                            let o = buf_old[c];
                            let fc = f[c].clamp(0.0, cap);
                            row[c] = o + fc * (a * (up[c] - o) + b * (down[c] - o));
                        }
                    }
                    Some(Modulation { kind: ModulationKind::Forward, factors }) => {
                        // Directional flux through each tube: the piece sourced
                        // at the shallower side is scaled, the return piece is
                        // not, so the pairwise exchange stays antisymmetric
                        // while recall keeps flowing when the factor is small.
                        let cap = self.mod_cap;
                        let f = &factors[c0..c0 + w];
                        for c in 0..w {
                            let o = buf_old[c];
                            let fc = f[c].clamp(0.0, cap);
                            row[c] = o + (a * (fc * up[c] - o) + b * (down[c] - fc * o));
                        }
                    }
                }
                acc += sum4(row);
                std::mem::swap(&mut buf_old, &mut buf_prev);
            }
            c0 += w;
        }

        self.buf_a = buf_old;
        self.buf_b = buf_prev;
        self.zeros = zeros;
        acc
    }
}

/// Four-lane sum: vectorisable, and any NaN/inf in the slice still poisons the
/// result, which is all the caller needs.
fn sum4(xs: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 4];
    let mut chunks = xs.chunks_exact(4);
    for ch in &mut chunks {
        lanes[0] += ch[0];
        lanes[1] += ch[1];
        lanes[2] += ch[2];
        lanes[3] += ch[3];
    }
    let mut tail = 0.0;
    for &x in chunks.remainder() {
        tail += x;
    }
    lanes[0] + lanes[1] + lanes[2] + lanes[3] + tail
}
