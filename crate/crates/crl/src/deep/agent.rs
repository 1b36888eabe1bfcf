use rand::rngs::StdRng;
use rand::Rng;
use synapse_chain::{ChainArray, ChainConfig, ChainError};

use super::adam::Adam;
use super::net::{soft_policy_sample, soft_value, Layout, QNetwork};
use super::replay::Transition;

/// Backing storage for the network parameters.
pub enum ParamStore {
    /// Ordinary dense parameters.
    Plain(Vec<f64>),
    /// Parameters are the visible level of memory chains; deeper levels are
    /// advanced by the agent on its consolidation cadence.
    Chained(ChainArray),
}

impl ParamStore {
    pub fn visible(&self) -> &[f64] {
        match self {
            ParamStore::Plain(p) => p,
            ParamStore::Chained(c) => c.visible(),
        }
    }

    fn add_range(&mut self, start: usize, delta: &[f64]) -> Result<(), ChainError> {
        match self {
            ParamStore::Plain(p) => {
                for (t, d) in p[start..start + delta.len()].iter_mut().zip(delta) {
                    *t += d;
                }
                Ok(())
            }
            ParamStore::Chained(c) => c.apply_external_range(start, delta),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeepAgentConfig {
    /// Layer sizes from input to output, e.g. `[4, 400, 200, 2]`.
    pub dims: Vec<usize>,
    pub n_tasks: usize,
    pub lr: f64,
    /// Entropy temperature of the soft value and Boltzmann policy.
    pub alpha: f64,
    /// Soft target-network tracking rate.
    pub tau: f64,
    /// Discount per task.
    pub gammas: Vec<f64>,
    /// `None` trains plain parameters; `Some` puts them on chains. The chain
    /// `dt` must be a whole number of updates: one Euler step runs after every
    /// `dt` TD updates.
    pub chain: Option<ChainConfig>,
}

/// Soft (entropy-regularised) Q-learner: TD targets bootstrap the smoothed
/// value of the next state from a slowly tracking target copy, one transition
/// at a time, with Adam on the shared weights and the active task's head.
pub struct DeepAgent {
    pub net: QNetwork,
    store: ParamStore,
    target: Vec<f64>,
    adam: Adam,
    cfg: DeepAgentConfig,
    grads: Vec<f64>,
    delta: Vec<f64>,
    updates_since_step: u64,
    updates_per_chain_step: u64,
}

impl DeepAgent {
    pub fn new(cfg: DeepAgentConfig, init_rng: &mut StdRng) -> Result<Self, ChainError> {
        assert_eq!(cfg.gammas.len(), cfg.n_tasks);
        let layout = Layout::new(cfg.dims.clone(), cfg.n_tasks);
        let total = layout.total;
        let mut visible = vec![0.0; total];
        let stds = layout.init_visible(&mut visible, init_rng);

        let (store, updates_per_chain_step) = match &cfg.chain {
            None => (ParamStore::Plain(visible.clone()), 0),
            Some(chain_cfg) => {
                if chain_cfg.dt.fract() != 0.0 || chain_cfg.dt < 1.0 {
                    return Err(ChainError::InvalidConfig(format!(
                        "chain dt must be a whole number of updates >= 1, got {}",
                        chain_cfg.dt
                    )));
                }
                let mut chains = ChainArray::new(chain_cfg.clone(), total)?;
                chains.set_visible(&visible)?;
                chains.init_hidden_from_visible(&stds, init_rng)?;
                (ParamStore::Chained(chains), chain_cfg.dt as u64)
            }
        };

        Ok(DeepAgent {
            net: QNetwork::new(layout),
            target: visible.clone(),
            adam: Adam::new(cfg.lr, total, cfg.n_tasks),
            grads: vec![0.0; total],
            delta: vec![0.0; total],
            updates_since_step: 0,
            updates_per_chain_step,
            store,
            cfg,
        })
    }

    pub fn config(&self) -> &DeepAgentConfig {
        &self.cfg
    }

    pub fn visible(&self) -> &[f64] {
        self.store.visible()
    }

    pub fn target_params(&self) -> &[f64] {
        &self.target
    }

    pub fn chains(&self) -> Option<&ChainArray> {
        match &self.store {
            ParamStore::Plain(_) => None,
            ParamStore::Chained(c) => Some(c),
        }
    }

    pub fn q_values(&mut self, x: &[f64], task: usize) -> Vec<f64> {
        self.net.forward(self.store.visible(), task, x).to_vec()
    }

    /// Behaviour policy: with probability `epsilon` a uniform action, otherwise
    /// a Boltzmann sample at temperature `alpha`. Always consumes exactly two
    /// uniform draws.
    pub fn select_action(&mut self, x: &[f64], task: usize, epsilon: f64, rng: &mut StdRng) -> usize {
        let n_actions = self.net.n_actions();
        let explore: f64 = rng.gen();
        if explore < epsilon {
            return rng.gen_range(0..n_actions);
        }
        let q = self.net.forward(self.store.visible(), task, x);
        soft_policy_sample(q, self.cfg.alpha, rng)
    }

    /// Evaluation policy: plain argmax, no randomness.
    pub fn greedy_action(&mut self, x: &[f64], task: usize) -> usize {
        let q = self.net.forward(self.store.visible(), task, x);
        let mut best = 0;
        for a in 1..q.len() {
            if q[a] > q[best] {
                best = a;
            }
        }
        best
    }

    /// One TD update on one transition: gradient of the squared soft TD error
    /// through Adam into the visible parameters, then a full soft update of the
    /// target copy, then (for chained stores) an Euler step once every `dt`
    /// updates.
    pub fn td_update(&mut self, tr: &Transition, task: usize) -> Result<(), ChainError> {
        let q_next = self.net.forward(&self.target, task, &tr.next);
        let v_next = soft_value(q_next, self.cfg.alpha);
        let not_done = if tr.done { 0.0 } else { 1.0 };
        let y = tr.reward + self.cfg.gammas[task] * v_next * not_done;

        let q = self.net.forward(self.store.visible(), task, &tr.state);
        let coeff = q[tr.action] - y;
        self.net
            .backward(self.store.visible(), task, tr.action, coeff, &mut self.grads);
        self.adam
            .step(&self.grads, &self.net.layout, task, &mut self.delta);
        for range in self.net.layout.active_ranges(task) {
            let start = range.start;
            self.store.add_range(start, &self.delta[range])?;
        }

        let tau = self.cfg.tau;
        for (t, &v) in self.target.iter_mut().zip(self.store.visible()) {
            *t += tau * (v - *t);
        }

        if let ParamStore::Chained(chains) = &mut self.store {
            self.updates_since_step += 1;
            if self.updates_since_step >= self.updates_per_chain_step {
                chains.consolidate(1, None)?;
                self.updates_since_step = 0;
            }
        }
        Ok(())
    }
}
