use rand::rngs::StdRng;
use rand::Rng;

use super::{Env, StepResult};

const PADDLE_SPEED: f64 = 0.05;
const FALL_SPEED: f64 = 0.03;
const CATCH_RADIUS: f64 = 0.1;
const LIVES: u32 = 3;

/// Catch fruit falling down a unit square with a paddle along the bottom edge.
///
/// Each step the paddle moves left or right by up to 0.05 (clamped to [0, 1])
/// and the fruit falls by 0.03. When the fruit reaches the bottom the agent
/// earns +1 if the paddle is within 0.1 of it, otherwise -1 and one of three
/// lives; either way a new fruit spawns at the top at a uniformly random x.
/// The episode ends when all lives are gone or after `max_steps` steps.
pub struct Catcher {
    max_steps: u32,
    paddle_x: f64,
    paddle_vx: f64,
    fruit_x: f64,
    fruit_y: f64,
    lives: u32,
    steps: u32,
}

impl Catcher {
    pub fn new(max_steps: u32) -> Self {
        Catcher {
            max_steps,
            paddle_x: 0.5,
            paddle_vx: 0.0,
            fruit_x: 0.5,
            fruit_y: 1.0,
            lives: LIVES,
            steps: 0,
        }
    }

    /// Test hook: place the paddle and fruit exactly.
    pub fn set_state(&mut self, paddle_x: f64, fruit_x: f64, fruit_y: f64) {
        self.paddle_x = paddle_x;
        self.paddle_vx = 0.0;
        self.fruit_x = fruit_x;
        self.fruit_y = fruit_y;
    }

    pub fn lives(&self) -> u32 {
        self.lives
    }
}

impl Env for Catcher {
    fn state_dim(&self) -> usize {
        4
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, rng: &mut StdRng) {
        self.paddle_x = 0.5;
        self.paddle_vx = 0.0;
        self.fruit_x = rng.gen_range(0.0..1.0);
        self.fruit_y = 1.0;
        self.lives = LIVES;
        self.steps = 0;
    }

    fn observe(&self, out: &mut [f64]) {
        out.copy_from_slice(&[self.paddle_x, self.paddle_vx, self.fruit_x, self.fruit_y]);
    }

    fn step(&mut self, action: usize, rng: &mut StdRng) -> StepResult {
        let want = if action == 1 { PADDLE_SPEED } else { -PADDLE_SPEED };
        let new_x = (self.paddle_x + want).clamp(0.0, 1.0);
        self.paddle_vx = new_x - self.paddle_x;
        self.paddle_x = new_x;
        self.fruit_y -= FALL_SPEED;
        self.steps += 1;

        let mut reward = 0.0;
        if self.fruit_y <= 0.0 {
            if (self.paddle_x - self.fruit_x).abs() <= CATCH_RADIUS {
                reward = 1.0;
            } else {
                reward = -1.0;
                self.lives -= 1;
            }
            self.fruit_x = rng.gen_range(0.0..1.0);
            self.fruit_y = 1.0;
        }
        let done = self.lives == 0 || self.steps >= self.max_steps;
        StepResult { reward, done }
    }
}
