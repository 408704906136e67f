//! Adam over a list of flat parameter tensors.

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(sizes: &[usize]) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update. `lrs[k]` is the learning rate of tensor `k`.
    pub fn update(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]], lrs: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter tensor count changed");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (k, p) in params.iter_mut().enumerate() {
            let g = grads[k];
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lrs[k] * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = Adam::new(&[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        for _ in 0..5 {
            adam.update(&mut [&mut p], &[&[0.0; 3]], &[0.1]);
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_by_hand() {
        // m = 0.1 g, v = 0.001 g², m̂ = g, v̂ = g², step = lr · g / (|g| + eps)
        let mut adam = Adam::new(&[1]);
        let mut p = vec![1.0];
        adam.update(&mut [&mut p], &[&[0.5]], &[0.01]);
        let want = 1.0 - 0.01 * 0.5 / (0.5 + 1e-8);
        assert!((p[0] - want).abs() < 1e-15);
    }

    #[test]
    fn second_step_by_hand() {
        let mut adam = Adam::new(&[1]);
        let mut p = vec![0.0];
        adam.update(&mut [&mut p], &[&[2.0]], &[0.1]);
        let after_one = p[0];
        adam.update(&mut [&mut p], &[&[-1.0]], &[0.1]);
        let m = 0.9 * 0.2 + 0.1 * -1.0;
        let v = 0.999 * (0.001 * 4.0) + 0.001 * 1.0;
        let m_hat = m / (1.0 - 0.81);
        let v_hat = v / (1.0 - 0.999f64.powi(2));
        let want = after_one - 0.1 * m_hat / (v_hat.sqrt() + 1e-8);
        assert!((p[0] - want).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let mut adam = Adam::new(&[1]);
        let mut p = vec![0.0];
        let mut last = 0.0;
        for _ in 0..2000 {
            let before = p[0];
            adam.update(&mut [&mut p], &[&[3.7]], &[0.01]);
            last = before - p[0];
        }
        assert!((last - 0.01).abs() < 1e-9);
    }
}
