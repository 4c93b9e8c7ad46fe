use serde::{Deserialize, Serialize};

use super::LossError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub align: f64,
    pub contact: f64,
    pub penetration: f64,
    pub smoothness: f64,
    pub foot_snap: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            align: 1.0,
            contact: 1.0,
            penetration: 10.0,
            smoothness: 0.1,
            foot_snap: 1.0,
        }
    }
}

impl LossWeights {
    pub fn zero() -> Self {
        Self {
            align: 0.0,
            contact: 0.0,
            penetration: 0.0,
            smoothness: 0.0,
            foot_snap: 0.0,
        }
    }

    fn as_array(&self) -> [f64; 5] {
        [self.align, self.contact, self.penetration, self.smoothness, self.foot_snap]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub weights: LossWeights,
    /// Penetration slack τ (m): only distances below `-τ` are penalized.
    pub slack: f64,
    /// Foot-snapping band τ_contact (m).
    pub contact_threshold: f64,
    /// Huber transition δ (m).
    pub huber_delta: f64,
    /// Camera-facing cone half-angle for the Chamfer alignment term.
    pub facing_angle_deg: f64,
    /// Square the acceleration norm in the smoothness term.
    pub square_acceleration: bool,
    /// Base step for translation coordinates (m).
    pub translation_step: f64,
    /// Base step for the scene scale.
    pub scale_step: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the loss by less than this fraction.
    pub tolerance: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub optimize_translations: bool,
    pub optimize_scale: bool,
    /// Step halvings tried before giving up on an iteration.
    pub max_backtracks: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            weights: LossWeights::default(),
            slack: 0.01,
            contact_threshold: 0.05,
            huber_delta: 0.01,
            facing_angle_deg: crate::alignment::DEFAULT_FACING_ANGLE_DEG,
            square_acceleration: false,
            translation_step: 1e-2,
            scale_step: 1e-3,
            max_iterations: 500,
            tolerance: 1e-7,
            scale_min: 0.2,
            scale_max: 5.0,
            optimize_translations: true,
            optimize_scale: true,
            max_backtracks: 30,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), LossError> {
        let bad = |m: String| Err(LossError::InvalidConfig(m));
        if self.weights.as_array().iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return bad("loss weights must be finite and non-negative".into());
        }
        if !(self.slack >= 0.0) {
            return bad(format!("slack must be non-negative, got {}", self.slack));
        }
        if !(self.contact_threshold > 0.0) {
            return bad(format!("contact threshold must be positive, got {}", self.contact_threshold));
        }
        if !(self.huber_delta > 0.0) {
            return bad(format!("Huber delta must be positive, got {}", self.huber_delta));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max) {
            return bad(format!("invalid scale bounds [{}, {}]", self.scale_min, self.scale_max));
        }
        if !(self.translation_step > 0.0 && self.scale_step > 0.0) {
            return bad("step sizes must be positive".into());
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative".into());
        }
        if !(self.facing_angle_deg > 0.0 && self.facing_angle_deg <= 180.0) {
            return bad("facing angle must lie in (0, 180]".into());
        }
        Ok(())
    }

    pub fn any_active_term(&self) -> bool {
        self.weights.as_array().iter().any(|w| *w > 0.0)
    }
}
