//! Fixed-workload timing of the deep TD update path: control versus chained
//! parameter store at the multi-task network size and consolidation cadence.
//! Reports microseconds per update and the chained/control ratio.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;
use synapse_chain::ChainConfig;
use synaptic_rl::deep::{DeepAgent, DeepAgentConfig, Transition};

fn build(chain: Option<ChainConfig>) -> DeepAgent {
    let mut rng = StdRng::seed_from_u64(7);
    DeepAgent::new(
        DeepAgentConfig {
            dims: vec![4, 400, 200, 2],
            n_tasks: 2,
            lr: 1e-3,
            alpha: 0.01,
            tau: 0.01,
            gammas: vec![0.95, 0.99],
            chain,
        },
        &mut rng,
    )
    .expect("agent")
}

fn time_updates(agent: &mut DeepAgent, n: usize) -> f64 {
    let tr = Transition {
        state: [0.1, -0.2, 0.05, 0.3],
        action: 1,
        reward: 1.0,
        next: [0.12, -0.18, 0.04, 0.25],
        done: false,
    };
    let start = Instant::now();
    for _ in 0..n {
        agent.td_update(&tr, 0).expect("update");
    }
    start.elapsed().as_secs_f64() / n as f64
}

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(6400);
    let mut control = build(None);
    let mut chained = build(Some(ChainConfig {
        n_levels: 30,
        g12: 0.001625,
        dt: 64.0,
        gating: true,
    }));
    // Warm both paths before timing.
    time_updates(&mut control, 256);
    time_updates(&mut chained, 256);
    let c = time_updates(&mut control, n);
    let b = time_updates(&mut chained, n);
    println!(
        "control {:.1} us/update, chained {:.1} us/update, ratio {:.2}x",
        c * 1e6,
        b * 1e6,
        b / c
    );
}
