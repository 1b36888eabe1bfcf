//! Deep soft Q-learning over a flat parameter vector that can live either in a
//! plain buffer or on memory chains.

mod adam;
mod agent;
mod net;
mod replay;

pub use adam::Adam;
pub use agent::{DeepAgent, DeepAgentConfig, ParamStore};
pub use net::{soft_policy_sample, soft_value, Layout, QNetwork};
pub use replay::{ReplayBuffer, Transition};
