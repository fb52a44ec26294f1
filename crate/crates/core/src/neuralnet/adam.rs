use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::train::TrainConfig;

/// First and second moment estimates, one entry per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }
}

/// One bias-corrected Adam update at step `t` (1-based).
pub fn adam_step<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    state: &mut AdamState<T>,
    t: u64,
    config: &TrainConfig,
) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument("adam step index starts at 1".into()));
    }
    let n = params.len();
    if grads.len() != n || state.m.len() != n || state.v.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "adam: {} params, {} grads, {}/{} moments",
            n,
            grads.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    let (b1, b2) = (config.beta1, config.beta2);
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let c1 = T::of(1.0 / (1.0 - b1.powi(t)));
    let c2 = T::of(1.0 / (1.0 - b2.powi(t)));
    let (lr, eps) = (T::of(config.learning_rate), T::of(config.epsilon));
    let (b1, b2) = (T::of(b1), T::of(b2));
    let (one_b1, one_b2) = (T::one() - b1, T::one() - b2);

    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        *m = b1 * *m + one_b1 * g;
        *v = b2 * *v + one_b2 * g * g;
        let m_hat = *m * c1;
        let v_hat = *v * c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let cfg = TrainConfig::default();
        let mut p = vec![0.5f64, -1.0, 2.0];
        let mut s = AdamState::new(3);
        adam_step(&mut p, &[0.0; 3], &mut s, 1, &cfg).unwrap();
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = TrainConfig::default();
        let grads = [3.0f64, -0.02, 1e3, 2.0 * 3.0];
        let mut p = vec![0.0f64; 4];
        let mut s = AdamState::new(4);
        adam_step(&mut p, &grads, &mut s, 1, &cfg).unwrap();
        // m̂ = g, v̂ = g², so each step is lr·g/(|g|+ε)
        for (x, g) in p.iter().zip(grads) {
            let oracle = -cfg.learning_rate * g / (g.abs() + cfg.epsilon);
            assert!((x - oracle).abs() < 1e-15);
            assert!((x.abs() - cfg.learning_rate).abs() < 1e-8);
        }
        assert!((p[0] - p[3]).abs() < 1e-11);
    }

    #[test]
    fn errors() {
        let cfg = TrainConfig::default();
        let mut s = AdamState::new(2);
        assert!(adam_step(&mut [0.0f64; 2], &[0.0; 3], &mut s, 1, &cfg).is_err());
        assert!(adam_step(&mut [0.0f64; 2], &[0.0; 2], &mut s, 0, &cfg).is_err());
    }

    #[test]
    fn matches_closed_form_over_steps() {
        let cfg = TrainConfig::default();
        let mut p = vec![1.0f64];
        let mut s = AdamState::new(1);
        let (mut m, mut v, mut theta) = (0.0f64, 0.0f64, 1.0f64);
        for t in 1..=5u64 {
            let g = 0.3 * t as f64 - 1.0;
            adam_step(&mut p, &[g], &mut s, t, &cfg).unwrap();
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t as i32));
            let vh = v / (1.0 - 0.999f64.powi(t as i32));
            theta -= 1e-3 * mh / (vh.sqrt() + 1e-8);
            assert!((p[0] - theta).abs() < 1e-15);
        }
    }
}
