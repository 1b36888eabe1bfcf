use super::net::Layout;

/// Adam over the flat parameter vector, with one important twist for task
/// heads: first and second moments, and the bias-correction step counts, only
/// advance for the parameters the current task trains. Inactive task blocks
/// are completely frozen, so momentum from one task can never bleed into
/// another while it is not being trained.
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    /// Running beta powers for the shared weights and for each task block.
    pow_shared: (f64, f64),
    pow_task: Vec<(f64, f64)>,
}

impl Adam {
    pub fn new(lr: f64, total: usize, n_tasks: usize) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; total],
            v: vec![0.0; total],
            pow_shared: (1.0, 1.0),
            pow_task: vec![(1.0, 1.0); n_tasks],
        }
    }

    /// Consume gradients for one update on `task`; write the parameter change
    /// (to be added to the parameters) into the active ranges of `delta`.
    /// Entries of `delta` outside those ranges are left untouched.
    pub fn step(&mut self, grads: &[f64], layout: &Layout, task: usize, delta: &mut [f64]) {
        self.pow_shared.0 *= self.beta1;
        self.pow_shared.1 *= self.beta2;
        self.pow_task[task].0 *= self.beta1;
        self.pow_task[task].1 *= self.beta2;
        let [w_range, t_range] = layout.active_ranges(task);
        let pows = [self.pow_shared, self.pow_task[task]];
        for (range, (p1, p2)) in [w_range, t_range].into_iter().zip(pows) {
            let bc1 = 1.0 - p1;
            let bc2 = 1.0 - p2;
            for i in range {
                let g = grads[i];
                let m = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
                let v = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g);
                self.m[i] = m;
                self.v[i] = v;
                let m_hat = m / bc1;
                let v_hat = v / bc2;
                delta[i] = -self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}
