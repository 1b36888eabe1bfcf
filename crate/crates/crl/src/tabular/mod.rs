//! Tabular Q(lambda) on a goal-switching grid, with the Q-table stored either
//! plainly or as the visible level of memory chains.

mod agent;
mod gridworld;

pub use agent::{TabularAgent, TabularAgentConfig, TabularVariant};
pub use gridworld::{GridWorld, GRID_ACTIONS, PICKUP};
