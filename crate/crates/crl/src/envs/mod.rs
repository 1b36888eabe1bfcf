//! Episodic control environments with a shared low-dimensional interface.

mod cartpole;
mod catcher;

pub use cartpole::CartPole;
pub use catcher::Catcher;

use rand::rngs::StdRng;
use thiserror::Error;

/// Outcome of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    pub done: bool,
}

/// A discrete-action episodic environment.
pub trait Env {
    fn state_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Start a new episode.
    fn reset(&mut self, rng: &mut StdRng);
    /// Write the current observation into `out` (length `state_dim`).
    fn observe(&self, out: &mut [f64]);
    /// Apply `action`; `rng` feeds any stochastic dynamics.
    fn step(&mut self, action: usize, rng: &mut StdRng) -> StepResult;
}

/// The tasks the harness knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    CartPole,
    CartPoleLong,
    Catcher,
}

#[derive(Debug, Error)]
#[error("unknown task {0:?}; expected one of cartpole, cartpole-long, catcher")]
pub struct UnknownTask(pub String);

impl Task {
    pub fn parse(name: &str) -> Result<Task, UnknownTask> {
        match name {
            "cartpole" => Ok(Task::CartPole),
            "cartpole-long" => Ok(Task::CartPoleLong),
            "catcher" => Ok(Task::Catcher),
            other => Err(UnknownTask(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::CartPole => "cartpole",
            Task::CartPoleLong => "cartpole-long",
            Task::Catcher => "catcher",
        }
    }

    /// Default discount for value targets on this task.
    pub fn default_gamma(&self) -> f64 {
        match self {
            Task::CartPole | Task::CartPoleLong => 0.95,
            Task::Catcher => 0.99,
        }
    }

    /// Default test-reward level at which the task counts as (re)learned.
    pub fn default_relearn_threshold(&self) -> f64 {
        match self {
            Task::CartPole | Task::CartPoleLong => 450.0,
            Task::Catcher => 10.0,
        }
    }

    pub fn build(&self, max_steps: u32) -> Box<dyn Env> {
        match self {
            Task::CartPole => Box::new(CartPole::new(1.0, max_steps)),
            Task::CartPoleLong => Box::new(CartPole::new(2.0, max_steps)),
            Task::Catcher => Box::new(Catcher::new(max_steps)),
        }
    }
}
