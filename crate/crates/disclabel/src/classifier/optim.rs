//! AdamW with decoupled weight decay, a linear learning-rate schedule, and
//! global-norm gradient clipping.

use ndarray::Array2;

/// AdamW state over a fixed tensor list (same layout as the parameters).
#[derive(Debug)]
pub struct AdamW {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    decay_mask: Vec<bool>,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: u64,
}

impl AdamW {
    /// `decay_mask` selects the tensors weight decay applies to (weight
    /// matrices yes, biases and LayerNorm parameters no).
    pub fn new(
        shapes: &[Array2<f64>],
        decay_mask: Vec<bool>,
        learning_rate: f64,
        epsilon: f64,
        weight_decay: f64,
    ) -> Self {
        assert_eq!(shapes.len(), decay_mask.len());
        AdamW {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon,
            weight_decay,
            decay_mask,
            m: shapes.iter().map(|t| Array2::zeros(t.raw_dim())).collect(),
            v: shapes.iter().map(|t| Array2::zeros(t.raw_dim())).collect(),
            t: 0,
        }
    }

    /// One update step; `lr_scale` multiplies the base learning rate (for
    /// schedules).
    pub fn step(&mut self, params: &mut [Array2<f64>], grads: &[Array2<f64>], lr_scale: f64) {
        self.t += 1;
        let lr = self.learning_rate * lr_scale;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i].zip_mut_with(&grads[i], |m, &g| *m = self.beta1 * *m + (1.0 - self.beta1) * g);
            self.v[i].zip_mut_with(&grads[i], |v, &g| {
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g
            });
            let decay = if self.decay_mask[i] { self.weight_decay } else { 0.0 };
            let (m, v) = (&self.m[i], &self.v[i]);
            let eps = self.epsilon;
            ndarray::Zip::from(&mut params[i])
                .and(m)
                .and(v)
                .for_each(|p, &m, &v| {
                    let m_hat = m / bc1;
                    let v_hat = v / bc2;
                    *p -= lr * (m_hat / (v_hat.sqrt() + eps) + decay * *p);
                });
        }
    }
}

/// Linear warmup then linear decay to zero; returns the multiplier for the
/// base learning rate at `step` (0-based) out of `total_steps`.
pub fn linear_schedule(step: u64, total_steps: u64, warmup_steps: u64) -> f64 {
    if total_steps == 0 {
        return 0.0;
    }
    if step < warmup_steps {
        return (step + 1) as f64 / warmup_steps.max(1) as f64;
    }
    let remaining = total_steps.saturating_sub(step);
    let span = total_steps.saturating_sub(warmup_steps).max(1);
    remaining as f64 / span as f64
}

/// Scales all gradients so their global L2 norm is at most `max_norm`;
/// returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut [Array2<f64>], max_norm: f64) -> f64 {
    let sq: f64 = grads.iter().map(|g| g.mapv(|v| v * v).sum()).sum();
    let norm = sq.sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            g.mapv_inplace(|v| v * scale);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn adamw_descends_a_quadratic() {
        // Minimize f(p) = p², gradient 2p.
        let mut params = vec![array![[5.0]]];
        let mut opt = AdamW::new(&params, vec![false], 0.1, 1e-8, 0.0);
        for _ in 0..500 {
            let grads = vec![&params[0] * 2.0];
            opt.step(&mut params, &grads, 1.0);
        }
        assert!(params[0][[0, 0]].abs() < 1e-2, "ended at {}", params[0][[0, 0]]);
    }

    #[test]
    fn weight_decay_respects_mask() {
        let mut params = vec![array![[1.0]], array![[1.0]]];
        let mut opt = AdamW::new(&params, vec![true, false], 0.01, 1e-8, 0.5);
        let grads = vec![array![[0.0]], array![[0.0]]];
        opt.step(&mut params, &grads, 1.0);
        assert!(params[0][[0, 0]] < 1.0, "decayed tensor shrinks");
        assert_eq!(params[1][[0, 0]], 1.0, "masked tensor untouched");
    }

    #[test]
    fn schedule_decays_linearly_to_zero() {
        assert_eq!(linear_schedule(0, 10, 0), 1.0);
        assert_eq!(linear_schedule(5, 10, 0), 0.5);
        assert_eq!(linear_schedule(9, 10, 0), 0.1);
        // Warmup ramps up first.
        assert!(linear_schedule(0, 10, 4) < linear_schedule(3, 10, 4));
        assert_eq!(linear_schedule(3, 10, 4), 1.0);
    }

    #[test]
    fn clipping_preserves_direction_and_caps_norm() {
        let mut grads = vec![array![[3.0, 0.0]], array![[0.0, 4.0]]];
        let norm = clip_global_norm(&mut grads, 1.0);
        assert_eq!(norm, 5.0);
        let clipped: f64 = grads.iter().map(|g| g.mapv(|v| v * v).sum()).sum();
        assert!((clipped.sqrt() - 1.0).abs() < 1e-12);
        assert!((grads[0][[0, 0]] / grads[1][[0, 1]] - 0.75).abs() < 1e-12);

        let mut small = vec![array![[0.1]]];
        assert!(clip_global_norm(&mut small, 1.0) < 1.0);
        assert_eq!(small[0][[0, 0]], 0.1, "small gradients untouched");
    }
}
