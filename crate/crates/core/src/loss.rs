//! Shared representation of a loss value and its gradient over the
//! optimization variables: one translation per frame plus the scene scale.

use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub value: f64,
    pub grad_translations: Vec<Vec3>,
    pub grad_scale: f64,
}

impl LossEval {
    pub fn zero(frames: usize) -> Self {
        Self {
            value: 0.0,
            grad_translations: vec![Vec3::zeros(); frames],
            grad_scale: 0.0,
        }
    }

    pub fn frames(&self) -> usize {
        self.grad_translations.len()
    }

    /// `self += weight * other`
    pub fn add_scaled(&mut self, other: &LossEval, weight: f64) {
        assert_eq!(self.frames(), other.frames());
        self.value += weight * other.value;
        for (g, o) in self.grad_translations.iter_mut().zip(&other.grad_translations) {
            *g += o * weight;
        }
        self.grad_scale += weight * other.grad_scale;
    }

    /// Gradient packed as `[t0.x, t0.y, t0.z, t1.x, ..., scale]`.
    pub fn packed_gradient(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.frames() + 1);
        for g in &self.grad_translations {
            out.extend_from_slice(g.as_slice());
        }
        out.push(self.grad_scale);
        out
    }

    pub fn gradient_norm(&self) -> f64 {
        self.packed_gradient().iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}
