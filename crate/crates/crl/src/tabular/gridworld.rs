use rand::rngs::StdRng;
use rand::Rng;

/// Deterministic square grid. The agent starts each episode on a uniformly
/// random cell and must move to the goal cell and choose the pick-up action
/// there to earn reward 1, which ends the episode. Picking up anywhere else
/// pays 0 and the episode continues; moves that would leave the grid keep the
/// agent in place.
#[derive(Debug, Clone)]
pub struct GridWorld {
    size: usize,
    goal: (usize, usize),
}

/// Actions: 0 = north (+y), 1 = south (-y), 2 = east (+x), 3 = west (-x),
/// 4 = pick up.
pub const GRID_ACTIONS: usize = 5;

/// Index of the pick-up action.
pub const PICKUP: usize = 4;

impl GridWorld {
    pub fn new(size: usize, goal: (usize, usize)) -> Self {
        assert!(size >= 2 && goal.0 < size && goal.1 < size);
        GridWorld { size, goal }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn set_goal(&mut self, goal: (usize, usize)) {
        assert!(goal.0 < self.size && goal.1 < self.size);
        self.goal = goal;
    }

    pub fn n_states(&self) -> usize {
        self.size * self.size
    }

    pub fn state_index(&self, x: usize, y: usize) -> usize {
        y * self.size + x
    }

    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s % self.size, s / self.size)
    }

    fn goal_index(&self) -> usize {
        self.state_index(self.goal.0, self.goal.1)
    }

    /// Uniform over all cells, including the goal: starting on the goal is
    /// harmless because the reward still requires choosing pick-up.
    pub fn random_start(&self, rng: &mut StdRng) -> usize {
        rng.gen_range(0..self.n_states())
    }

    /// Apply an action; returns (next state, reward, done).
    pub fn step(&self, s: usize, action: usize) -> (usize, f64, bool) {
        let (x, y) = self.coords(s);
        if action == PICKUP {
            let done = s == self.goal_index();
            let reward = if done { 1.0 } else { 0.0 };
            return (s, reward, done);
        }
        let (nx, ny) = match action {
            0 => (x, (y + 1).min(self.size - 1)),
            1 => (x, y.saturating_sub(1)),
            2 => ((x + 1).min(self.size - 1), y),
            3 => (x.saturating_sub(1), y),
            other => panic!("invalid action {other}"),
        };
        (self.state_index(nx, ny), 0.0, false)
    }
}
