use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// One training episode.
#[derive(Debug, Clone)]
pub struct EpisodeRow {
    /// 1-based epoch.
    pub epoch: usize,
    /// 1-based episode within the epoch.
    pub episode: usize,
    pub task: String,
    pub reward: f64,
    pub length: u64,
    pub epsilon: f64,
}

/// One greedy evaluation episode.
#[derive(Debug, Clone)]
pub struct TestRow {
    /// Global training-episode count at which the test ran.
    pub episode: usize,
    pub task: String,
    pub reward: f64,
}

/// Per-epoch summary. `relearn_episodes` applies to deep runs (from test
/// rewards), the step counters to tabular runs; inapplicable fields are `None`
/// and serialise as empty. An applicable-but-never-reached metric is
/// `Some(None)` and serialises as `never`.
#[derive(Debug, Clone)]
pub struct EpochRow {
    pub epoch: usize,
    pub task: String,
    pub relearn_episodes: Option<Option<usize>>,
    pub first_reward_steps: Option<Option<u64>>,
    pub steps_to_threshold: Option<Option<u64>>,
}

#[derive(Debug, Default)]
pub struct MetricsLog {
    pub episodes: Vec<EpisodeRow>,
    pub tests: Vec<TestRow>,
    pub epochs: Vec<EpochRow>,
    /// Wall-clock spent in the run. Reported on stdout only; deliberately kept
    /// out of every CSV so equal configs and seeds produce identical bytes.
    pub wall_seconds: f64,
}

fn fmt_opt2<T: std::fmt::Display>(v: &Option<Option<T>>) -> String {
    match v {
        None => String::new(),
        Some(None) => "never".into(),
        Some(Some(x)) => x.to_string(),
    }
}

impl MetricsLog {
    pub fn episodes_csv(&self) -> String {
        let mut s = String::from("epoch,episode,task,reward,length,epsilon\n");
        for r in &self.episodes {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.epoch, r.episode, r.task, r.reward, r.length, r.epsilon
            );
        }
        s
    }

    pub fn tests_csv(&self) -> String {
        let mut s = String::from("episode,task,reward\n");
        for r in &self.tests {
            let _ = writeln!(s, "{},{},{}", r.episode, r.task, r.reward);
        }
        s
    }

    pub fn epochs_csv(&self) -> String {
        let mut s = String::from("epoch,task,relearn_episodes,first_reward_steps,steps_to_threshold\n");
        for r in &self.epochs {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.epoch,
                r.task,
                fmt_opt2(&r.relearn_episodes),
                fmt_opt2(&r.first_reward_steps),
                fmt_opt2(&r.steps_to_threshold)
            );
        }
        s
    }

    pub fn write_csvs(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in [
            ("episodes.csv", self.episodes_csv()),
            ("test_episodes.csv", self.tests_csv()),
            ("epochs.csv", self.epochs_csv()),
        ] {
            let mut f = std::fs::File::create(dir.join(name))?;
            f.write_all(body.as_bytes())?;
        }
        Ok(())
    }

    /// Test rewards for one task in global-episode order.
    pub fn test_rewards(&self, task: &str) -> Vec<f64> {
        self.tests
            .iter()
            .filter(|t| t.task == task)
            .map(|t| t.reward)
            .collect()
    }
}

/// Trailing moving average: `None` until a full window is available, then the
/// mean of the last `window` values.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<Option<f64>> {
    assert!(window >= 1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= xs[i - window];
        }
        if i + 1 >= window {
            out.push(Some(sum / window as f64));
        } else {
            out.push(None);
        }
    }
    out
}

/// First training-episode count at which the trailing `window`-test moving
/// average reaches `threshold`, given one test every `test_every` episodes.
pub fn relearn_episode(
    test_rewards: &[f64],
    window: usize,
    threshold: f64,
    test_every: usize,
) -> Option<usize> {
    moving_average(test_rewards, window)
        .iter()
        .position(|ma| matches!(ma, Some(v) if *v >= threshold))
        .map(|i| (i + 1) * test_every)
}

/// Longest stretch of test episodes covered by a run of consecutive trailing
/// moving averages at or above `threshold`. A run of averages from test index
/// `t0` to `t1` (inclusive) spans the `(t1 - t0) + window` raw test episodes
/// that fed it; the longest such span is returned, or 0 if the average never
/// reaches the threshold.
pub fn sustained_span(test_rewards: &[f64], window: usize, threshold: f64) -> usize {
    let ma = moving_average(test_rewards, window);
    let mut best = 0usize;
    let mut run = 0usize;
    for v in &ma {
        match v {
            Some(x) if *x >= threshold => {
                run += 1;
                best = best.max(run - 1 + window);
            }
            _ => run = 0,
        }
    }
    best
}
