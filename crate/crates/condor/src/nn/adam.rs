//! Adam optimizer over the flattened parameter vector.

use crate::error::{CondorError, Result};

/// First/second moment accumulators mirroring the parameter layout, plus the
/// step counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self { m: vec![0.0; param_count], v: vec![0.0; param_count], t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update: `theta -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(
        &mut self,
        params: &mut [f64],
        grads: &[f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(CondorError::Config(format!(
                "adam state sized for {} params, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut state = AdamState::new(3);
        let mut params = vec![1.0, -2.0, 0.5];
        let before = params.clone();
        for _ in 0..5 {
            state
                .step(&mut params, &[0.0, 0.0, 0.0], 0.001, 0.9, 0.999, 1e-8)
                .unwrap();
        }
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_moves_by_about_lr() {
        // After bias correction the first update is lr * g / (|g| + eps).
        let mut state = AdamState::new(1);
        let mut params = vec![0.0];
        state.step(&mut params, &[0.3], 0.001, 0.9, 0.999, 1e-8).unwrap();
        assert!((params[0] + 0.001).abs() < 1e-7, "{}", params[0]);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut state = AdamState::new(1);
        let mut params = vec![3.0];
        for _ in 0..5000 {
            let g = 2.0 * params[0];
            state.step(&mut params, &[g], 0.01, 0.9, 0.999, 1e-8).unwrap();
        }
        assert!(params[0].abs() < 1e-3, "{}", params[0]);
    }
}
