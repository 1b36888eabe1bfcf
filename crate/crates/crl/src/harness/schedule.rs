use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::rngs::StdRng;
use rand::SeedableRng;
use synapse_chain::write_snapshot;

use crate::deep::{DeepAgent, DeepAgentConfig, ReplayBuffer, Transition};
use crate::envs::Env;
use crate::harness::config::{AgentKind, Checkpoint, ExperimentConfig, Mode};
use crate::harness::metrics::{relearn_episode, EpisodeRow, EpochRow, MetricsLog, TestRow};
use crate::tabular::{GridWorld, TabularAgent, TabularAgentConfig, GRID_ACTIONS};

/// Independent random streams for one run, all derived from the master seed so
/// that structural changes to one consumer (say, the policy) cannot shift the
/// draws seen by another (say, the environment).
pub struct RngSet {
    pub env: StdRng,
    pub policy: StdRng,
    pub replay: StdRng,
    pub init: StdRng,
}

impl RngSet {
    pub fn new(seed: u64) -> Self {
        RngSet {
            env: StdRng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15),
            policy: StdRng::seed_from_u64(seed ^ 0xC2B2_AE3D_27D4_EB4F),
            replay: StdRng::seed_from_u64(seed ^ 0x1656_67B1_9E37_79F9),
            init: StdRng::seed_from_u64(seed ^ 0x27D4_EB2F_1656_67C5),
        }
    }
}

fn goal_for_epoch(epoch: usize, size: usize) -> (usize, usize) {
    if epoch % 2 == 0 {
        (size - 1, size - 1)
    } else {
        (0, 0)
    }
}

/// Run the tabular goal-switching experiment. Returns the metrics and the
/// final agent so callers can inspect the chain levels behind the Q-table.
pub fn run_tabular(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(MetricsLog, TabularAgent)> {
    let start = Instant::now();
    let size = cfg.grid_size;
    let mut grid = GridWorld::new(size, goal_for_epoch(0, size));
    let mut agent = TabularAgent::new(TabularAgentConfig {
        n_states: size * size,
        n_actions: GRID_ACTIONS,
        gamma: cfg.gamma,
        lambda: cfg.lambda,
        lr: cfg.lr,
        epsilon: cfg.epsilon,
        variant: cfg.agent.tabular_variant(),
        chain: cfg.chain.clone(),
        trace_scale: cfg.trace_scale,
        modulation: cfg.modulation,
    })?;
    let mut rngs = RngSet::new(cfg.seed);
    let mut log = MetricsLog::default();
    // A policy counts as (re)learnt once the trailing moving average of
    // episode lengths drops below this, roughly the mean distance from a
    // uniform start to a corner plus the pick-up step.
    const LEARNT_WINDOW: usize = 20;
    const LEARNT_MEAN_LEN: f64 = 13.0;

    for epoch in 0..cfg.epochs {
        let goal = goal_for_epoch(epoch, size);
        grid.set_goal(goal);
        let task = format!("goal-{}-{}", goal.0, goal.1);
        let mut epoch_steps = 0u64;
        let mut first_reward: Option<u64> = None;
        let mut to_threshold: Option<u64> = None;
        let mut recent_lens = [0u64; LEARNT_WINDOW];
        let mut recent_sum = 0u64;

        for ep in 0..cfg.episodes_per_epoch {
            agent.begin_episode();
            let mut s = grid.random_start(&mut rngs.env);
            let mut steps = 0u64;
            let mut total = 0.0;
            loop {
                let a = agent.select_action(s, &mut rngs.policy);
                let (next, r, done) = grid.step(s, a);
                steps += 1;
                agent.learn(s, a, r, next, done)?;
                total += r;
                s = next;
                if done || steps >= cfg.max_steps as u64 {
                    break;
                }
            }
            epoch_steps += steps;
            if first_reward.is_none() && total > 0.0 {
                first_reward = Some(epoch_steps);
            }
            recent_sum += steps;
            recent_sum -= recent_lens[ep % LEARNT_WINDOW];
            recent_lens[ep % LEARNT_WINDOW] = steps;
            if to_threshold.is_none()
                && ep + 1 >= LEARNT_WINDOW
                && (recent_sum as f64) < LEARNT_MEAN_LEN * LEARNT_WINDOW as f64
            {
                to_threshold = Some(epoch_steps);
            }
            log.episodes.push(EpisodeRow {
                epoch: epoch + 1,
                episode: ep + 1,
                task: task.clone(),
                reward: total,
                length: steps,
                epsilon: cfg.epsilon,
            });
        }
        log.epochs.push(EpochRow {
            epoch: epoch + 1,
            task: task.clone(),
            relearn_episodes: None,
            first_reward_steps: Some(first_reward),
            steps_to_threshold: Some(to_threshold),
        });

        if let Some(dir) = out {
            if cfg.value_snapshots {
                for level in 0..agent.chains().n_levels() {
                    let values = agent.value_grid(level);
                    let mut body = String::new();
                    for y in 0..size {
                        let row: Vec<String> =
                            (0..size).map(|x| format!("{}", values[y * size + x])).collect();
                        body.push_str(&row.join(","));
                        body.push('\n');
                    }
                    let name = format!(
                        "values_k{}_e{}_ep{}.csv",
                        level + 1,
                        epoch + 1,
                        cfg.episodes_per_epoch
                    );
                    std::fs::write(dir.join(name), body)?;
                }
            }
            if cfg.checkpoint == Checkpoint::Epoch {
                write_snapshot(agent.chains(), dir.join(format!("chain_e{}.snap", epoch + 1)))?;
            }
        }
    }
    log.wall_seconds = start.elapsed().as_secs_f64();
    Ok((log, agent))
}

/// Run a deep experiment (multitask rotation or single-task online).
pub fn run_deep(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(MetricsLog, DeepAgent)> {
    let start = Instant::now();
    let n_tasks = cfg.tasks.len();
    let chain = match cfg.agent {
        AgentKind::Control => None,
        AgentKind::Chained => Some(cfg.chain.clone()),
        AgentKind::ChainedModulated => bail!("chained_modulated is tabular-only"),
    };
    let mut rngs = RngSet::new(cfg.seed);
    let mut agent = DeepAgent::new(
        DeepAgentConfig {
            dims: cfg.dims(),
            n_tasks,
            lr: cfg.lr,
            alpha: cfg.alpha,
            tau: cfg.tau,
            gammas: cfg.gammas.clone(),
            chain,
        },
        &mut rngs.init,
    )?;
    let mut envs: Vec<Box<dyn Env>> = cfg.tasks.iter().map(|t| t.build(cfg.max_steps)).collect();
    for env in &envs {
        assert_eq!(env.state_dim(), 4);
        assert_eq!(env.n_actions(), 2);
    }
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let train_per_step = cfg.mode == Mode::DeepOnline;
    let mut log = MetricsLog::default();
    let mut global_ep = 0usize;

    for epoch in 0..cfg.epochs {
        let ti = epoch % n_tasks;
        let task = cfg.tasks[ti].name();
        let env = &mut envs[ti];
        let mut epsilon = cfg.eps_start;
        replay.clear();
        let mut epoch_tests: Vec<f64> = Vec::new();

        for ep in 0..cfg.episodes_per_epoch {
            env.reset(&mut rngs.env);
            let mut obs = [0.0f64; 4];
            env.observe(&mut obs);
            let mut total = 0.0;
            let mut len = 0u64;
            loop {
                let a = agent.select_action(&obs, ti, epsilon, &mut rngs.policy);
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
                len += 1;
                if train_per_step && replay.len() >= cfg.batch_size {
                    for idx in replay.sample_indices(cfg.batch_size, &mut rngs.replay) {
                        let tr = *replay.get(idx);
                        agent.td_update(&tr, ti)?;
                    }
                }
                obs = next;
                if res.done {
                    break;
                }
            }
            global_ep += 1;
            log.episodes.push(EpisodeRow {
                epoch: epoch + 1,
                episode: ep + 1,
                task: task.to_string(),
                reward: total,
                length: len,
                epsilon,
            });
            if !train_per_step && replay.len() >= cfg.batch_size {
                for idx in replay.sample_indices(cfg.batch_size, &mut rngs.replay) {
                    let tr = *replay.get(idx);
                    agent.td_update(&tr, ti)?;
                }
            }
            epsilon = (epsilon * cfg.eps_decay).max(cfg.eps_min);

            if (ep + 1) % cfg.test_every == 0 {
                env.reset(&mut rngs.env);
                let mut tobs = [0.0f64; 4];
                env.observe(&mut tobs);
                let mut treward = 0.0;
                loop {
                    let a = agent.greedy_action(&tobs, ti);
                    let res = env.step(a, &mut rngs.env);
                    env.observe(&mut tobs);
                    treward += res.reward;
                    if res.done {
                        break;
                    }
                }
                log.tests.push(TestRow {
                    episode: global_ep,
                    task: task.to_string(),
                    reward: treward,
                });
                epoch_tests.push(treward);
            }
        }

        let relearn = relearn_episode(
            &epoch_tests,
            cfg.relearn_window,
            cfg.relearn_thresholds[ti],
            cfg.test_every,
        );
        log.epochs.push(EpochRow {
            epoch: epoch + 1,
            task: task.to_string(),
            relearn_episodes: Some(relearn),
            first_reward_steps: None,
            steps_to_threshold: None,
        });

        if let (Some(dir), Checkpoint::Epoch) = (out, cfg.checkpoint) {
            let chains = agent
                .chains()
                .context("checkpointing requires a chained agent")?;
            write_snapshot(chains, dir.join(format!("chain_e{}.snap", epoch + 1)))?;
        }
    }
    log.wall_seconds = start.elapsed().as_secs_f64();
    Ok((log, agent))
}

/// Run whatever the config describes; `out` enables in-run artifacts
/// (checkpoints, value snapshots).
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<MetricsLog> {
    match cfg.mode {
        Mode::Tabular => run_tabular(cfg, out).map(|(log, _)| log),
        Mode::DeepMultitask | Mode::DeepOnline => run_deep(cfg, out).map(|(log, _)| log),
    }
}

/// Run and leave a complete, reproducible record in `dir`: the resolved
/// config, the three CSVs, and any configured artifacts.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<MetricsLog> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    std::fs::write(dir.join("resolved.conf"), cfg.serialize())?;
    let log = run_experiment(cfg, Some(dir))?;
    log.write_csvs(dir)?;
    Ok(log)
}
