/// Adam with bias-corrected moments over a fixed list of parameter buffers.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(shapes: &[usize], lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            first: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Applies one update; `params` and `grads` must follow the order given to [`Adam::new`].
    pub fn update<'a, 'b>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut Vec<f64>>,
        grads: impl IntoIterator<Item = &'b Vec<f64>>,
    ) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let step_size = self.lr / c1;
        let mut seen = 0;
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            debug_assert_eq!(p.len(), g.len());
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                p[i] -= step_size * m[i] / ((v[i] / c2).sqrt() + self.eps);
            }
            seen += 1;
        }
        debug_assert_eq!(seen, self.first.len());
    }
}
