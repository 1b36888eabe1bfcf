use std::collections::BTreeMap;
use std::fmt::Write as _;

use synapse_chain::{ChainConfig, ModulationKind};
use thiserror::Error;

use crate::envs::Task;
use crate::tabular::TabularVariant;

/// Experiment family. Defaults for most keys depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Tabular Q(lambda) on the goal-switching grid.
    Tabular,
    /// Deep agent cycling through tasks, one per epoch, replaying at episode
    /// end and wiping the buffer between epochs.
    DeepMultitask,
    /// Deep agent on one task, training on each transition as it happens.
    DeepOnline,
}

impl Mode {
    fn parse(s: &str) -> Option<Mode> {
        match s {
            "tabular" => Some(Mode::Tabular),
            "deep_multitask" => Some(Mode::DeepMultitask),
            "deep_online" => Some(Mode::DeepOnline),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Tabular => "tabular",
            Mode::DeepMultitask => "deep_multitask",
            Mode::DeepOnline => "deep_online",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Control,
    Chained,
    ChainedModulated,
}

impl AgentKind {
    fn parse(s: &str) -> Option<AgentKind> {
        match s {
            "control" => Some(AgentKind::Control),
            "chained" => Some(AgentKind::Chained),
            "chained_modulated" => Some(AgentKind::ChainedModulated),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AgentKind::Control => "control",
            AgentKind::Chained => "chained",
            AgentKind::ChainedModulated => "chained_modulated",
        }
    }

    pub fn tabular_variant(&self) -> TabularVariant {
        match self {
            AgentKind::Control => TabularVariant::Control,
            AgentKind::Chained => TabularVariant::Chained,
            AgentKind::ChainedModulated => TabularVariant::ChainedModulated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checkpoint {
    None,
    Epoch,
}

#[derive(Debug, Error)]
#[error("{}", messages.join("\n"))]
pub struct ConfigError {
    pub messages: Vec<String>,
}

/// Fully resolved experiment description. Unused fields for a given mode hold
/// their defaults and are ignored.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub agent: AgentKind,
    pub seed: u64,
    pub epochs: usize,
    pub episodes_per_epoch: usize,
    pub max_steps: u32,
    pub lr: f64,
    pub chain: ChainConfig,
    pub trace_scale: f64,
    pub modulation: ModulationKind,
    pub checkpoint: Checkpoint,
    // tabular
    pub grid_size: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub value_snapshots: bool,
    // deep
    pub tasks: Vec<Task>,
    pub hidden: Vec<usize>,
    pub alpha: f64,
    pub tau: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub eps_start: f64,
    pub eps_decay: f64,
    pub eps_min: f64,
    pub test_every: usize,
    pub relearn_window: usize,
    pub relearn_thresholds: Vec<f64>,
    pub gammas: Vec<f64>,
}

/// Split a config file into `key=value` pairs. Tokens are separated by any
/// whitespace; `#` starts a comment running to end of line. Duplicate keys are
/// an error.
pub fn parse_tokens(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut errors = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        for tok in line.split_whitespace() {
            match tok.split_once('=') {
                Some((k, v)) if !k.is_empty() => {
                    if map.insert(k.to_string(), v.to_string()).is_some() {
                        errors.push(format!("line {}: duplicate key {k:?}", lineno + 1));
                    }
                }
                _ => errors.push(format!(
                    "line {}: expected key=value, got {tok:?}",
                    lineno + 1
                )),
            }
        }
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(ConfigError { messages: errors })
    }
}

struct KeyReader {
    map: BTreeMap<String, String>,
    errors: Vec<String>,
    used: std::collections::BTreeSet<String>,
}

impl KeyReader {
    fn new(map: BTreeMap<String, String>) -> Self {
        KeyReader {
            map,
            errors: Vec::new(),
            used: Default::default(),
        }
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str, default: T) -> T
    where
        T::Err: std::fmt::Display,
    {
        self.used.insert(key.to_string());
        match self.map.get(key) {
            None => default,
            Some(raw) => match raw.parse() {
                Ok(v) => v,
                Err(e) => {
                    self.errors.push(format!("key {key}: bad value {raw:?}: {e}"));
                    default
                }
            },
        }
    }

    fn take_with<T>(&mut self, key: &str, default: T, f: impl Fn(&str) -> Option<T>) -> T {
        self.used.insert(key.to_string());
        match self.map.get(key) {
            None => default,
            Some(raw) => match f(raw) {
                Some(v) => v,
                None => {
                    self.errors.push(format!("key {key}: bad value {raw:?}"));
                    default
                }
            },
        }
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn finish(mut self) -> Result<(), ConfigError> {
        for key in self.map.keys() {
            if !self.used.contains(key) {
                self.errors.push(format!("unknown key {key:?}"));
            }
        }
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError {
                messages: self.errors,
            })
        }
    }
}

fn parse_usize_list(s: &str) -> Option<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().ok())
        .collect()
}

/// Build a resolved config from raw `key=value` pairs, applying per-mode
/// defaults and collecting every problem instead of stopping at the first.
pub fn build_config(map: BTreeMap<String, String>) -> Result<ExperimentConfig, ConfigError> {
    let mode = match map.get("mode").map(String::as_str) {
        None => {
            return Err(ConfigError {
                messages: vec!["missing required key \"mode\" (tabular | deep_multitask | deep_online)".into()],
            })
        }
        Some(raw) => match Mode::parse(raw) {
            Some(m) => m,
            None => {
                return Err(ConfigError {
                    messages: vec![format!(
                        "key mode: bad value {raw:?} (expected tabular | deep_multitask | deep_online)"
                    )],
                })
            }
        },
    };

    let mut r = KeyReader::new(map);
    r.used.insert("mode".into());

    let agent = r.take_with("agent", AgentKind::Control, AgentKind::parse);
    let seed = r.take_parsed("seed", 0u64);

    let (d_epochs, d_eppe, d_max_steps, d_lr) = match mode {
        Mode::Tabular => (24usize, 10000usize, 20000u32, 0.1f64),
        Mode::DeepMultitask => (40, 20000, 500, 1e-3),
        Mode::DeepOnline => (1, 100000, 500, 1e-3),
    };
    let epochs = r.take_parsed("epochs", d_epochs);
    let episodes_per_epoch = r.take_parsed("episodes_per_epoch", d_eppe);
    let max_steps = r.take_parsed("max_steps", d_max_steps);
    let lr = r.take_parsed("lr", d_lr);

    let (d_levels, d_g12, d_dt, d_gating) = match mode {
        Mode::Tabular => (3usize, 1e-5, 1.0, false),
        Mode::DeepMultitask => (30, 0.001625, 64.0, true),
        Mode::DeepOnline => (30, 0.01, 1.0, true),
    };
    let chain = ChainConfig {
        n_levels: r.take_parsed("chain.n_levels", d_levels),
        g12: r.take_parsed("chain.g12", d_g12),
        dt: r.take_parsed("chain.dt", d_dt),
        gating: r.take_parsed("chain.gating", d_gating),
    };
    let trace_scale = r.take_parsed("chain.trace_scale", 10.0);
    let modulation = r.take_with("chain.modulation", ModulationKind::Forward, |s| match s {
        "tube" => Some(ModulationKind::Tube),
        "forward" => Some(ModulationKind::Forward),
        _ => None,
    });
    let checkpoint = r.take_with("checkpoint", Checkpoint::None, |s| match s {
        "none" => Some(Checkpoint::None),
        "epoch" => Some(Checkpoint::Epoch),
        _ => None,
    });

    // tabular block
    let grid_size = r.take_parsed("grid.size", 10usize);
    let gamma = r.take_parsed("gamma", 0.9f64);
    let lambda = r.take_parsed("lambda", 0.9f64);
    let epsilon = r.take_parsed("epsilon", 0.05f64);
    let value_snapshots = r.take_parsed("value_snapshots", false);

    // deep block
    let default_tasks = match mode {
        Mode::DeepOnline => "cartpole",
        _ => "cartpole,catcher",
    };
    let tasks_raw = r.raw("tasks").unwrap_or_else(|| default_tasks.to_string());
    let mut tasks = Vec::new();
    for name in tasks_raw.split(',') {
        match Task::parse(name.trim()) {
            Ok(t) => tasks.push(t),
            Err(e) => r.errors.push(format!("key tasks: {e}")),
        }
    }
    let d_hidden = match mode {
        Mode::DeepOnline => vec![100, 50],
        _ => vec![400, 200],
    };
    let hidden = r.take_with("hidden", d_hidden, parse_usize_list);
    let alpha = r.take_parsed("alpha", 0.01f64);
    let tau = r.take_parsed("tau", 0.01f64);
    let (d_replay, d_batch) = match mode {
        Mode::DeepOnline => (1usize, 1usize),
        _ => (2000, 64),
    };
    let replay_capacity = r.take_parsed("replay_capacity", d_replay);
    let batch_size = r.take_parsed("batch_size", d_batch);
    let eps_start = r.take_parsed("epsilon.start", 1.0f64);
    let eps_decay = r.take_parsed("epsilon.decay", 0.9995f64);
    let eps_min = r.take_parsed("epsilon.min", 0.0f64);
    let test_every = r.take_parsed("test_every", 10usize);
    let d_window = match mode {
        Mode::DeepOnline => 100usize,
        _ => 10,
    };
    let relearn_window = r.take_parsed("relearn.window", d_window);
    let mut relearn_thresholds = Vec::new();
    let mut gammas = Vec::new();
    for task in &tasks {
        let key = format!("relearn.threshold.{}", task.name());
        relearn_thresholds.push(r.take_parsed(&key, task.default_relearn_threshold()));
        let key = format!("gamma.{}", task.name());
        gammas.push(r.take_parsed(&key, task.default_gamma()));
    }

    let reader_errors = match r.finish() {
        Ok(()) => Vec::new(),
        Err(e) => e.messages,
    };

    let cfg = ExperimentConfig {
        mode,
        agent,
        seed,
        epochs,
        episodes_per_epoch,
        max_steps,
        lr,
        chain,
        trace_scale,
        modulation,
        checkpoint,
        grid_size,
        gamma,
        lambda,
        epsilon,
        value_snapshots,
        tasks,
        hidden,
        alpha,
        tau,
        replay_capacity,
        batch_size,
        eps_start,
        eps_decay,
        eps_min,
        test_every,
        relearn_window,
        relearn_thresholds,
        gammas,
    };
    // Report key-level and semantic problems together so one bad key does not
    // hide the rest.
    let mut errors = reader_errors;
    if let Err(e) = validate(&cfg) {
        errors.extend(e.messages);
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { messages: errors })
    }
}

/// Parse a config file's text straight to a resolved config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    build_config(parse_tokens(text)?)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let mut errors = Vec::new();
    if cfg.epochs == 0 {
        errors.push("epochs must be >= 1".into());
    }
    if cfg.episodes_per_epoch == 0 {
        errors.push("episodes_per_epoch must be >= 1".into());
    }
    if cfg.max_steps == 0 {
        errors.push("max_steps must be >= 1".into());
    }
    if !(cfg.lr.is_finite() && cfg.lr > 0.0) {
        errors.push(format!("lr must be finite and > 0, got {}", cfg.lr));
    }

    let uses_chain = cfg.agent != AgentKind::Control;
    if uses_chain {
        let max_mod = if cfg.agent == AgentKind::ChainedModulated {
            cfg.trace_scale.max(1.0)
        } else {
            1.0
        };
        if let Err(e) = synapse_chain::validate_config(&cfg.chain, max_mod) {
            errors.push(e.to_string());
        }
    }
    if cfg.checkpoint == Checkpoint::Epoch && !uses_chain {
        errors.push("checkpoint=epoch requires a chained agent".into());
    }

    match cfg.mode {
        Mode::Tabular => {
            if cfg.grid_size < 2 {
                errors.push("grid.size must be >= 2".into());
            }
            for (k, v) in [("gamma", cfg.gamma), ("lambda", cfg.lambda), ("epsilon", cfg.epsilon)] {
                if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                    errors.push(format!("{k} must be in [0, 1], got {v}"));
                }
            }
            if cfg.agent == AgentKind::ChainedModulated && cfg.trace_scale <= 0.0 {
                errors.push("chain.trace_scale must be > 0".into());
            }
        }
        Mode::DeepMultitask | Mode::DeepOnline => {
            if cfg.agent == AgentKind::ChainedModulated {
                errors.push("chained_modulated is only available in tabular mode".into());
            }
            if cfg.tasks.is_empty() {
                errors.push("tasks must name at least one task".into());
            }
            if cfg.mode == Mode::DeepOnline && cfg.tasks.len() != 1 {
                errors.push(format!(
                    "deep_online takes exactly one task, got {}",
                    cfg.tasks.len()
                ));
            }
            for (i, t) in cfg.tasks.iter().enumerate() {
                if cfg.tasks[..i].contains(t) {
                    errors.push(format!("tasks lists {} more than once", t.name()));
                }
            }
            if cfg.hidden.is_empty() || cfg.hidden.iter().any(|&h| h == 0) {
                errors.push("hidden must be a comma list of positive layer sizes".into());
            }
            if !(cfg.alpha.is_finite() && cfg.alpha > 0.0) {
                errors.push(format!("alpha must be > 0, got {}", cfg.alpha));
            }
            if !(cfg.tau.is_finite() && 0.0 < cfg.tau && cfg.tau <= 1.0) {
                errors.push(format!("tau must be in (0, 1], got {}", cfg.tau));
            }
            if cfg.batch_size == 0 || cfg.batch_size > cfg.replay_capacity {
                errors.push(format!(
                    "batch_size must be in 1..=replay_capacity ({}), got {}",
                    cfg.replay_capacity, cfg.batch_size
                ));
            }
            if cfg.test_every == 0 {
                errors.push("test_every must be >= 1".into());
            }
            if cfg.relearn_window == 0 {
                errors.push("relearn.window must be >= 1".into());
            }
            for (g, task) in cfg.gammas.iter().zip(&cfg.tasks) {
                if !(g.is_finite() && (0.0..1.0).contains(g)) {
                    errors.push(format!("gamma.{} must be in [0, 1), got {g}", task.name()));
                }
            }
            if !(0.0..=1.0).contains(&cfg.eps_start)
                || !(0.0..=1.0).contains(&cfg.eps_decay)
                || !(0.0..=1.0).contains(&cfg.eps_min)
            {
                errors.push("epsilon.start/decay/min must lie in [0, 1]".into());
            }
            if uses_chain && (cfg.chain.dt.fract() != 0.0 || cfg.chain.dt < 1.0) {
                errors.push(format!(
                    "chain.dt must be a whole number of updates >= 1 in deep modes, got {}",
                    cfg.chain.dt
                ));
            }
        }
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(ConfigError { messages: errors })
    }
}

impl ExperimentConfig {
    /// Render the fully resolved config as a parseable key=value file.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("mode", self.mode.name().into());
        kv("agent", self.agent.name().into());
        kv("seed", self.seed.to_string());
        kv("epochs", self.epochs.to_string());
        kv("episodes_per_epoch", self.episodes_per_epoch.to_string());
        kv("max_steps", self.max_steps.to_string());
        kv("lr", format!("{:e}", self.lr));
        kv("chain.n_levels", self.chain.n_levels.to_string());
        kv("chain.g12", format!("{:e}", self.chain.g12));
        kv("chain.dt", format!("{:e}", self.chain.dt));
        kv("chain.gating", self.chain.gating.to_string());
        kv("chain.trace_scale", format!("{:e}", self.trace_scale));
        kv(
            "chain.modulation",
            match self.modulation {
                ModulationKind::Tube => "tube".into(),
                ModulationKind::Forward => "forward".into(),
            },
        );
        kv(
            "checkpoint",
            match self.checkpoint {
                Checkpoint::None => "none".into(),
                Checkpoint::Epoch => "epoch".into(),
            },
        );
        match self.mode {
            Mode::Tabular => {
                kv("grid.size", self.grid_size.to_string());
                kv("gamma", format!("{:e}", self.gamma));
                kv("lambda", format!("{:e}", self.lambda));
                kv("epsilon", format!("{:e}", self.epsilon));
                kv("value_snapshots", self.value_snapshots.to_string());
            }
            Mode::DeepMultitask | Mode::DeepOnline => {
                let names: Vec<&str> = self.tasks.iter().map(|t| t.name()).collect();
                kv("tasks", names.join(","));
                let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
                kv("hidden", hidden.join(","));
                kv("alpha", format!("{:e}", self.alpha));
                kv("tau", format!("{:e}", self.tau));
                kv("replay_capacity", self.replay_capacity.to_string());
                kv("batch_size", self.batch_size.to_string());
                kv("epsilon.start", format!("{:e}", self.eps_start));
                kv("epsilon.decay", format!("{:e}", self.eps_decay));
                kv("epsilon.min", format!("{:e}", self.eps_min));
                kv("test_every", self.test_every.to_string());
                kv("relearn.window", self.relearn_window.to_string());
                for (task, thr) in self.tasks.iter().zip(&self.relearn_thresholds) {
                    kv(&format!("relearn.threshold.{}", task.name()), format!("{thr:e}"));
                }
                for (task, g) in self.tasks.iter().zip(&self.gammas) {
                    kv(&format!("gamma.{}", task.name()), format!("{g:e}"));
                }
            }
        }
        s
    }

    /// Network layer sizes for deep modes.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![4];
        dims.extend_from_slice(&self.hidden);
        dims.push(2);
        dims
    }
}
