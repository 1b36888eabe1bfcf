use rand::rngs::StdRng;
use rand::Rng;

/// Where each parameter of the multi-head network lives in one flat vector.
///
/// Layer `l` maps `dims[l] -> dims[l+1]` as `y = gain_task * (bias_task + W x)`
/// with a shared weight matrix `W` (row-major, one row per output unit) and
/// per-task gain and bias vectors. Hidden layers apply ReLU after the gain,
/// the last layer is linear. The flat order is: all weight matrices by layer,
/// then for each task a block of (gain, bias) pairs by layer.
#[derive(Debug, Clone)]
pub struct Layout {
    pub dims: Vec<usize>,
    pub n_tasks: usize,
    w_off: Vec<usize>,
    w_total: usize,
    per_task: usize,
    gb_off: Vec<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(dims: Vec<usize>, n_tasks: usize) -> Self {
        assert!(dims.len() >= 2 && n_tasks >= 1);
        let n_layers = dims.len() - 1;
        let mut w_off = Vec::with_capacity(n_layers);
        let mut off = 0;
        for l in 0..n_layers {
            w_off.push(off);
            off += dims[l] * dims[l + 1];
        }
        let w_total = off;
        let mut gb_off = Vec::with_capacity(n_layers);
        let mut t_off = 0;
        for l in 0..n_layers {
            gb_off.push(t_off);
            t_off += 2 * dims[l + 1];
        }
        let per_task = t_off;
        Layout {
            total: w_total + per_task * n_tasks,
            dims,
            n_tasks,
            w_off,
            w_total,
            per_task,
            gb_off,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn w_range(&self, l: usize) -> std::ops::Range<usize> {
        self.w_off[l]..self.w_off[l] + self.dims[l] * self.dims[l + 1]
    }

    pub fn gain_range(&self, task: usize, l: usize) -> std::ops::Range<usize> {
        let base = self.w_total + task * self.per_task + self.gb_off[l];
        base..base + self.dims[l + 1]
    }

    pub fn bias_range(&self, task: usize, l: usize) -> std::ops::Range<usize> {
        let base = self.w_total + task * self.per_task + self.gb_off[l] + self.dims[l + 1];
        base..base + self.dims[l + 1]
    }

    /// The parameters touched when training on `task`: the shared weights and
    /// that task's gain/bias block.
    pub fn active_ranges(&self, task: usize) -> [std::ops::Range<usize>; 2] {
        let t = self.w_total + task * self.per_task;
        [0..self.w_total, t..t + self.per_task]
    }

    /// Fill `visible` with the standard initialisation (weights ~ N(0, 1/fan_in)
    /// drawn layer by layer, row-major; gains 1; biases 0) and return the
    /// per-parameter draw std (0 for gains and biases).
    pub fn init_visible(&self, visible: &mut [f64], rng: &mut StdRng) -> Vec<f64> {
        assert_eq!(visible.len(), self.total);
        let mut stds = vec![0.0; self.total];
        for l in 0..self.n_layers() {
            let std = (1.0 / self.dims[l] as f64).sqrt();
            for i in self.w_range(l) {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                visible[i] = std * z;
                stds[i] = std;
            }
        }
        for task in 0..self.n_tasks {
            for l in 0..self.n_layers() {
                for i in self.gain_range(task, l) {
                    visible[i] = 1.0;
                }
                for i in self.bias_range(task, l) {
                    visible[i] = 0.0;
                }
            }
        }
        stds
    }
}

/// Feed-forward evaluator with scratch buffers; call `forward` and then
/// `backward` with the same parameters, task, and input.
pub struct QNetwork {
    pub layout: Layout,
    input: Vec<f64>,
    lin: Vec<Vec<f64>>,
    act: Vec<Vec<f64>>,
    d_act: Vec<Vec<f64>>,
}

impl QNetwork {
    pub fn new(layout: Layout) -> Self {
        let n_layers = layout.n_layers();
        let lin: Vec<Vec<f64>> = (0..n_layers).map(|l| vec![0.0; layout.dims[l + 1]]).collect();
        QNetwork {
            input: vec![0.0; layout.dims[0]],
            act: lin.clone(),
            d_act: lin.clone(),
            lin,
            layout,
        }
    }

    pub fn n_actions(&self) -> usize {
        *self.layout.dims.last().unwrap()
    }

    /// Q-values for `x` under `task`'s head.
    pub fn forward(&mut self, params: &[f64], task: usize, x: &[f64]) -> &[f64] {
        let n_layers = self.layout.n_layers();
        self.input.copy_from_slice(x);
        for l in 0..n_layers {
            let n_in = self.layout.dims[l];
            let n_out = self.layout.dims[l + 1];
            let w = &params[self.layout.w_range(l)];
            let gains = &params[self.layout.gain_range(task, l)];
            let biases = &params[self.layout.bias_range(task, l)];
            let last = l + 1 == n_layers;
            // Split borrows: activations of the previous layer feed this one.
            let (done_layers, rest) = self.act.split_at_mut(l);
            let x_in: &[f64] = if l == 0 { &self.input } else { &done_layers[l - 1] };
            let act = &mut rest[0];
            let lin = &mut self.lin[l];
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut z = 0.0;
                for i in 0..n_in {
                    z += row[i] * x_in[i];
                }
                z += biases[o];
                lin[o] = z;
                let y = gains[o] * z;
                act[o] = if last { y } else { y.max(0.0) };
            }
        }
        &self.act[n_layers - 1]
    }

    /// Gradient of `coeff * q[action]` with respect to every parameter the
    /// given task trains (shared weights plus its gain/bias block), written
    /// into the matching positions of `grads`. Entries outside those ranges are
    /// left untouched. Requires a preceding `forward` with identical
    /// `(params, task, x)`.
    pub fn backward(
        &mut self,
        params: &[f64],
        task: usize,
        action: usize,
        coeff: f64,
        grads: &mut [f64],
    ) {
        let n_layers = self.layout.n_layers();
        let last = n_layers - 1;
        {
            let d_last = &mut self.d_act[last];
            d_last.iter_mut().for_each(|v| *v = 0.0);
            d_last[action] = coeff;
        }
        for l in (0..n_layers).rev() {
            let n_in = self.layout.dims[l];
            let n_out = self.layout.dims[l + 1];
            let w = &params[self.layout.w_range(l)];
            let gains = &params[self.layout.gain_range(task, l)];
            let w_start = self.layout.w_range(l).start;
            let g_start = self.layout.gain_range(task, l).start;
            let b_start = self.layout.bias_range(task, l).start;
            let x_in: &[f64] = if l == 0 { &self.input } else { &self.act[l - 1] };
            let is_last = l == last;

            let (d_below, d_here) = self.d_act.split_at_mut(l);
            let d_here = &d_here[0];
            let d_prev = if l > 0 {
                let d = &mut d_below[l - 1];
                d.iter_mut().for_each(|v| *v = 0.0);
                Some(d)
            } else {
                None
            };
            for o in 0..n_out {
                let mut up = d_here[o];
                if !is_last && self.act[l][o] <= 0.0 {
                    up = 0.0;
                }
                let z = self.lin[l][o];
                grads[g_start + o] = up * z;
                let dz = up * gains[o];
                grads[b_start + o] = dz;
                let g_row = &mut grads[w_start + o * n_in..w_start + (o + 1) * n_in];
                for (g, &xi) in g_row.iter_mut().zip(x_in) {
                    *g = dz * xi;
                }
            }
            if let Some(dx) = d_prev {
                for o in 0..n_out {
                    let mut up = d_here[o];
                    if !is_last && self.act[l][o] <= 0.0 {
                        up = 0.0;
                    }
                    let dz = up * gains[o];
                    if dz != 0.0 {
                        let row = &w[o * n_in..(o + 1) * n_in];
                        for (d, &wv) in dx.iter_mut().zip(row) {
                            *d += dz * wv;
                        }
                    }
                }
            }
        }
    }
}

/// Entropy-smoothed state value: `alpha * log sum_a exp(q_a / alpha)`,
/// evaluated in max-shifted form so it never overflows and degrades gracefully
/// to `max(q)` as alpha -> 0.
pub fn soft_value(q: &[f64], alpha: f64) -> f64 {
    let mut mx = q[0];
    for &v in &q[1..] {
        if v > mx {
            mx = v;
        }
    }
    let mut s = 0.0;
    for &v in q {
        s += ((v - mx) / alpha).exp();
    }
    mx + alpha * s.ln()
}

/// Sample an action from the Boltzmann policy `p_a ∝ exp(q_a / alpha)`,
/// consuming exactly one uniform draw.
pub fn soft_policy_sample(q: &[f64], alpha: f64, rng: &mut StdRng) -> usize {
    let mut mx = q[0];
    for &v in &q[1..] {
        if v > mx {
            mx = v;
        }
    }
    let mut total = 0.0;
    let mut weights = [0.0f64; 16];
    for (i, &v) in q.iter().enumerate() {
        let w = ((v - mx) / alpha).exp();
        weights[i] = w;
        total += w;
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    for (i, &w) in weights.iter().take(q.len()).enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    q.len() - 1
}
