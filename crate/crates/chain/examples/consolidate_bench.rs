//! Wall-clock check for the consolidation kernel: one Euler step over a large
//! chain array, plus doubling runs to expose the O(chains x levels) scaling.
//!
//! Usage: consolidate_bench [n_chains] [n_levels]

use std::time::Instant;
use synapse_chain::{ChainArray, ChainConfig};

fn time_step(n_chains: usize, n_levels: usize, reps: u32) -> f64 {
    let cfg = ChainConfig {
        n_levels,
        g12: 0.001625,
        dt: 64.0,
        gating: false,
    };
    let mut chains = ChainArray::new(cfg, n_chains).expect("config");
    let pattern: Vec<f64> = (0..n_chains).map(|i| (i % 17) as f64 * 0.01 - 0.08).collect();
    chains.set_visible(&pattern).expect("seed values");
    let start = Instant::now();
    for _ in 0..reps {
        chains.consolidate(1, None).expect("step");
    }
    start.elapsed().as_secs_f64() / reps as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_chains: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let n_levels: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);

    let base = time_step(n_chains, n_levels, 5);
    println!("{n_chains} chains x {n_levels} levels: {:.1} ms/step", base * 1e3);
    let double_m = time_step(2 * n_chains, n_levels, 5);
    let double_n = time_step(n_chains, 2 * n_levels, 5);
    println!(
        "2x chains: {:.1} ms ({:.2}x)   2x levels: {:.1} ms ({:.2}x)",
        double_m * 1e3,
        double_m / base,
        double_n * 1e3,
        double_n / base
    );
}
