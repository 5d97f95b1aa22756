use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Apply decay directly to the weights (AdamW) instead of adding
    /// `λ·w` to the gradient before the moment updates.
    pub decoupled: bool,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            decoupled: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &[Matrix]) -> Self {
        let zeros = || params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
        Self {
            config,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut [Matrix], grads: &[Matrix]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != params.len() {
            return Err(Error::contract(format!(
                "adam: {} params, {} grads, state for {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::contract(format!(
                    "adam: param {:?}, grad {:?}, state {:?}",
                    p.shape(),
                    g.shape(),
                    m.shape()
                )));
            }
        }
        let c = self.config;
        self.step += 1;
        let bc1 = 1.0 - c.beta1.powi(self.step as i32);
        let bc2 = 1.0 - c.beta2.powi(self.step as i32);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            for (((w, &gr), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                let gr = if c.decoupled { gr } else { gr + c.weight_decay * *w };
                *mi = c.beta1 * *mi + (1.0 - c.beta1) * gr;
                *vi = c.beta2 * *vi + (1.0 - c.beta2) * gr * gr;
                let update = (*mi / bc1) / ((*vi / bc2).sqrt() + c.eps);
                if c.decoupled {
                    *w -= c.lr * c.weight_decay * *w;
                }
                *w -= c.lr * update;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_a_no_op() {
        let mut p = vec![Matrix::from_vec(1, 3, vec![1.0, -2.0, 0.5])];
        let before = p.clone();
        let mut adam = Adam::new(AdamConfig::default(), &p);
        for _ in 0..10 {
            adam.step(&mut p, &[Matrix::zeros(1, 3)]).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn scalar_quadratic_converges() {
        // f(w) = (w − 3)², f' = 2(w − 3)
        let mut p = vec![Matrix::filled(1, 1, -4.0)];
        let cfg = AdamConfig {
            lr: 0.05,
            ..AdamConfig::default()
        };
        let mut adam = Adam::new(cfg, &p);
        let mut converged_at = None;
        for step in 0..5000 {
            let w = p[0].data()[0];
            if (w - 3.0).abs() < 1e-6 && converged_at.is_none() {
                converged_at = Some(step);
            }
            adam.step(&mut p, &[Matrix::filled(1, 1, 2.0 * (w - 3.0))]).unwrap();
        }
        assert!(converged_at.is_some());
        assert!((p[0].data()[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn decay_shrinks_weights_under_zero_gradient() {
        for decoupled in [false, true] {
            let mut p = vec![Matrix::from_vec(1, 2, vec![2.0, -3.0])];
            let cfg = AdamConfig {
                weight_decay: 1e-2,
                decoupled,
                ..AdamConfig::default()
            };
            let mut adam = Adam::new(cfg, &p);
            let mut prev: Vec<f64> = p[0].data().iter().map(|v| v.abs()).collect();
            for _ in 0..20 {
                adam.step(&mut p, &[Matrix::zeros(1, 2)]).unwrap();
                let now: Vec<f64> = p[0].data().iter().map(|v| v.abs()).collect();
                assert!(now.iter().zip(&prev).all(|(a, b)| a < b));
                prev = now;
            }
        }
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let mut p = vec![Matrix::zeros(2, 2)];
        let mut adam = Adam::new(AdamConfig::default(), &p);
        assert!(adam.step(&mut p, &[Matrix::zeros(2, 3)]).is_err());
    }
}
