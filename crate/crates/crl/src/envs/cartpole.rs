use rand::rngs::StdRng;
use rand::Rng;

use super::{Env, StepResult};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const X_THRESHOLD: f64 = 2.4;
const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

/// Cart with a hinged pole; push left or right each 20 ms tick and keep the
/// pole within 12 degrees and the cart within +-2.4 units. Reward is +1 per
/// step survived. `pole_length_scale` scales the pole's half-length (1.0 is the
/// standard pole, 2.0 a pole twice as long, which makes a distinct task with
/// slower dynamics).
pub struct CartPole {
    half_length: f64,
    pole_mass_length: f64,
    max_steps: u32,
    state: [f64; 4], // x, x_dot, theta, theta_dot
    steps: u32,
}

impl CartPole {
    pub fn new(pole_length_scale: f64, max_steps: u32) -> Self {
        let half_length = 0.5 * pole_length_scale;
        CartPole {
            half_length,
            pole_mass_length: MASS_POLE * half_length,
            max_steps,
            state: [0.0; 4],
            steps: 0,
        }
    }

    /// Test hook: pin the physical state exactly.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.steps = 0;
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    fn failed(&self) -> bool {
        let [x, _, theta, _] = self.state;
        x.abs() > X_THRESHOLD || theta.abs() > THETA_THRESHOLD
    }
}

impl Env for CartPole {
    fn state_dim(&self) -> usize {
        4
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, rng: &mut StdRng) {
        for v in &mut self.state {
            *v = rng.gen_range(-0.05..0.05);
        }
        self.steps = 0;
    }

    fn observe(&self, out: &mut [f64]) {
        out.copy_from_slice(&self.state);
    }

    fn step(&mut self, action: usize, _rng: &mut StdRng) -> StepResult {
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let [x, x_dot, theta, theta_dot] = self.state;
        let cos_theta = theta.cos();
        let sin_theta = theta.sin();
        let temp =
            (force + self.pole_mass_length * theta_dot * theta_dot * sin_theta) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin_theta - cos_theta * temp)
            / (self.half_length * (4.0 / 3.0 - MASS_POLE * cos_theta * cos_theta / TOTAL_MASS));
        let x_acc = temp - self.pole_mass_length * theta_acc * cos_theta / TOTAL_MASS;
        // Positions advance with the old velocities, then velocities update.
        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];
        self.steps += 1;
        let done = self.failed() || self.steps >= self.max_steps;
        StepResult { reward: 1.0, done }
    }
}
