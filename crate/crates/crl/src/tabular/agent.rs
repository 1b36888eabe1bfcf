use rand::rngs::StdRng;
use rand::Rng;
use synapse_chain::{ChainArray, ChainConfig, ChainError, Modulation, ModulationKind};

/// How the Q-table is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabularVariant {
    /// Plain Q(lambda): realised as a single-level chain with zero coupling,
    /// which makes consolidation a bit-exact no-op.
    Control,
    /// Q-values ride on multi-level chains; consolidation runs after every
    /// learning step at fixed coupling strength.
    Chained,
    /// As `Chained`, but each step's consolidation scales a chain's couplings
    /// by `trace_scale * eligibility`, so recently visited state-actions both
    /// imprint deeper and recover faster.
    ChainedModulated,
}

#[derive(Debug, Clone)]
pub struct TabularAgentConfig {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub lr: f64,
    pub epsilon: f64,
    pub variant: TabularVariant,
    pub chain: ChainConfig,
    pub trace_scale: f64,
    /// Which flow components `trace_scale * trace` multiplies for the
    /// modulated variant; ignored by the others.
    pub modulation: ModulationKind,
}

pub struct TabularAgent {
    cfg: TabularAgentConfig,
    chains: ChainArray,
    traces: Vec<f64>,
    delta_buf: Vec<f64>,
    mod_buf: Vec<f64>,
}

impl TabularAgent {
    pub fn new(cfg: TabularAgentConfig) -> Result<Self, ChainError> {
        assert!(cfg.n_actions >= 1);
        let m = cfg.n_states * cfg.n_actions;
        let chain_cfg = match cfg.variant {
            TabularVariant::Control => ChainConfig {
                n_levels: 1,
                g12: 0.0,
                dt: 1.0,
                gating: false,
            },
            _ => cfg.chain.clone(),
        };
        let max_mod = match cfg.variant {
            TabularVariant::ChainedModulated => cfg.trace_scale.max(1.0),
            _ => 1.0,
        };
        synapse_chain::validate_config(&chain_cfg, max_mod)?;
        Ok(TabularAgent {
            chains: ChainArray::new(chain_cfg, m)?,
            traces: vec![0.0; m],
            delta_buf: vec![0.0; m],
            mod_buf: vec![0.0; m],
            cfg,
        })
    }

    pub fn config(&self) -> &TabularAgentConfig {
        &self.cfg
    }

    /// Visible Q-values, indexed `state * n_actions + action`.
    pub fn q(&self) -> &[f64] {
        self.chains.visible()
    }

    pub fn traces(&self) -> &[f64] {
        &self.traces
    }

    pub fn chains(&self) -> &ChainArray {
        &self.chains
    }

    /// Mutable chain access, for warm starts and tests.
    pub fn chains_mut(&mut self) -> &mut ChainArray {
        &mut self.chains
    }

    pub fn begin_episode(&mut self) {
        self.traces.iter_mut().for_each(|e| *e = 0.0);
    }

    /// Epsilon-greedy; greedy ties resolve to the lowest action index.
    ///
    /// Draw order: one uniform for the explore test, then one range draw only
    /// when exploring. The greedy branch consumes no randomness.
    pub fn select_action(&self, s: usize, rng: &mut StdRng) -> usize {
        let a = self.cfg.n_actions;
        let explore: f64 = rng.gen();
        if explore < self.cfg.epsilon {
            return rng.gen_range(0..a);
        }
        let q = &self.chains.visible()[s * a..(s + 1) * a];
        let mut best = 0;
        for (i, &v) in q.iter().enumerate().skip(1) {
            if v > q[best] {
                best = i;
            }
        }
        best
    }

    /// One Q(lambda) learning step followed by one consolidation step.
    ///
    /// TD error uses the visible Q-values; traces decay by gamma*lambda
    /// everywhere and the visited pair is set to 1 (replacing traces). Every
    /// Q-value moves by lr * delta * trace, applied to the visible level, then
    /// the chains take one Euler step (modulated by `trace_scale * trace` per
    /// chain for the modulated variant).
    pub fn learn(
        &mut self,
        s: usize,
        action: usize,
        reward: f64,
        next_s: usize,
        done: bool,
    ) -> Result<(), ChainError> {
        let a = self.cfg.n_actions;
        let q = self.chains.visible();
        let next_q = &q[next_s * a..(next_s + 1) * a];
        let mut max_next = next_q[0];
        for &v in &next_q[1..] {
            if v > max_next {
                max_next = v;
            }
        }
        let not_done = if done { 0.0 } else { 1.0 };
        let delta = reward + self.cfg.gamma * max_next * not_done - q[s * a + action];

        let decay = self.cfg.gamma * self.cfg.lambda;
        for e in &mut self.traces {
            *e *= decay;
        }
        self.traces[s * a + action] = 1.0;

        let scale = self.cfg.lr * delta;
        for (d, e) in self.delta_buf.iter_mut().zip(&self.traces) {
            *d = scale * e;
        }
        self.chains.apply_external(&self.delta_buf)?;

        match self.cfg.variant {
            TabularVariant::ChainedModulated => {
                let ts = self.cfg.trace_scale;
                for (mf, e) in self.mod_buf.iter_mut().zip(&self.traces) {
                    *mf = ts * e;
                }
                let m = Modulation {
                    kind: self.cfg.modulation,
                    factors: &self.mod_buf,
                };
                self.chains.consolidate(1, Some(m))
            }
            _ => self.chains.consolidate(1, None),
        }
    }

    /// Greedy state values read from one chain level (0 = visible).
    pub fn value_grid(&self, level: usize) -> Vec<f64> {
        let a = self.cfg.n_actions;
        let row = self.chains.level(level);
        (0..self.cfg.n_states)
            .map(|s| {
                let mut best = row[s * a];
                for &v in &row[s * a + 1..(s + 1) * a] {
                    if v > best {
                        best = v;
                    }
                }
                best
            })
            .collect()
    }
}
