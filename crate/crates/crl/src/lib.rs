//! Continual reinforcement learning on multi-timescale parameter chains.
//!
//! Catastrophic forgetting in RL is usually fought with replay or explicit
//! regularisation. This crate takes a different route: every learnable scalar
//! (a Q-table entry or a network weight) is the surface of a short diffusion
//! chain (see the `synapse-chain` crate), so each parameter carries its own
//! history over a ladder of timescales. Fast levels chase the current task;
//! slow levels hold earlier tasks and pull the surface back toward them when
//! training moves on.
//!
//! Three experiment families are included, runnable from the `synaptic-rl`
//! binary or as library calls:
//!
//! * tabular Q(lambda) on a grid whose goal jumps between opposite corners
//!   every epoch,
//! * deep soft Q-learning rotating through tasks (cart-pole variants and a
//!   fruit-catching game) with per-task output heads,
//! * deep soft Q-learning on one task with per-step updates, where the chain
//!   guards the policy against its own later drift.

pub mod deep;
pub mod envs;
pub mod harness;
pub mod tabular;
