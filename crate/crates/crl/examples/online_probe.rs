//! Diagnostic probe for the single-task online trainer: runs the same loop as
//! the harness but prints internal statistics (weight drift, chain spread,
//! TD residuals) every few hundred episodes. Useful when tuning the online
//! chain coupling.
//!
//! Usage: online_probe <control|chained> [task] [episodes] [seed] [g12] [lr]

use synapse_chain::ChainConfig;
use synaptic_rl::deep::{soft_value, DeepAgent, DeepAgentConfig, ReplayBuffer, Transition};
use synaptic_rl::envs::Task;
use synaptic_rl::harness::RngSet;

fn rms(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for x in xs {
        sum += x * x;
        n += 1;
    }
    (sum / n.max(1) as f64).sqrt()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind = args.get(1).map(String::as_str).unwrap_or("chained");
    let task = Task::parse(args.get(2).map(String::as_str).unwrap_or("cartpole")).expect("task");
    let episodes: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seed: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1);
    let g12: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let lr: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let gamma = task.default_gamma();

    let chain = match kind {
        "control" => None,
        "chained" => Some(ChainConfig {
            n_levels: 30,
            g12,
            dt: 1.0,
            gating: true,
        }),
        other => panic!("unknown agent kind {other:?}"),
    };

    let mut rngs = RngSet::new(seed);
    let mut agent = DeepAgent::new(
        DeepAgentConfig {
            dims: vec![4, 100, 50, 2],
            n_tasks: 1,
            lr,
            alpha: 0.01,
            tau: 0.01,
            gammas: vec![gamma],
            chain,
        },
        &mut rngs.init,
    )
    .expect("agent construction");
    let mut env = task.build(500);
    let mut replay = ReplayBuffer::new(1);
    let w_init: Vec<f64> = agent.visible().to_vec();

    let mut epsilon = 1.0f64;
    let window = 200usize;
    let mut win_reward = 0.0;
    let mut win_resid = 0.0;
    let mut win_updates = 0u64;
    println!(
        "{:>6} {:>7} {:>7} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "ep", "reward", "eps", "|w-w0|", "|w|", "|u0-u1|", "|u1-u2|", "|resid|"
    );
    for ep in 0..episodes {
        env.reset(&mut rngs.env);
        let mut obs = [0.0f64; 4];
        env.observe(&mut obs);
        let mut total = 0.0;
        loop {
            let a = agent.select_action(&obs, 0, epsilon, &mut rngs.policy);
            let res = env.step(a, &mut rngs.env);
            let mut next = [0.0f64; 4];
            env.observe(&mut next);
            replay.push(Transition {
                state: obs,
                action: a,
                reward: res.reward,
                next,
                done: res.done,
            });
            total += res.reward;
            // Same sampling path as the harness (capacity 1, batch 1).
            for idx in replay.sample_indices(1, &mut rngs.replay) {
                let tr = *replay.get(idx);
                // Residual before the update: q(s,a) - (r + gamma * v_target(s')).
                let tgt = agent.target_params().to_vec();
                let qn = agent.net.forward(&tgt, 0, &tr.next).to_vec();
                let v = soft_value(&qn, 0.01);
                let y = tr.reward + gamma * v * if tr.done { 0.0 } else { 1.0 };
                let q = agent.q_values(&tr.state, 0);
                win_resid += (q[tr.action] - y).abs();
                win_updates += 1;
                agent.td_update(&tr, 0).expect("td update");
            }
            obs = next;
            if res.done {
                break;
            }
        }
        win_reward += total;
        epsilon *= 0.9995;
        if (ep + 1) % window == 0 {
            let w = agent.visible();
            let drift = rms(w.iter().zip(&w_init).map(|(a, b)| a - b));
            let wr = rms(w.iter().copied());
            let (s01, s12) = match agent.chains() {
                Some(c) => {
                    let u0 = c.level(0);
                    let u1 = c.level(1);
                    let u2 = c.level(2);
                    (
                        rms(u0.iter().zip(u1).map(|(a, b)| a - b)),
                        rms(u1.iter().zip(u2).map(|(a, b)| a - b)),
                    )
                }
                None => (0.0, 0.0),
            };
            println!(
                "{:>6} {:>7.1} {:>7.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                ep + 1,
                win_reward / window as f64,
                epsilon,
                drift,
                wr,
                s01,
                s12,
                win_resid / win_updates.max(1) as f64,
            );
            win_reward = 0.0;
            win_resid = 0.0;
            win_updates = 0;
        }
    }
    // Final: report per-level RMS so the depth profile is visible.
    if let Some(c) = agent.chains() {
        let profile: Vec<String> = (0..c.n_levels().min(8))
            .map(|k| format!("{:.3}", rms(c.level(k).iter().copied())))
            .collect();
        println!("level rms profile: {}", profile.join(" "));
    }
}
