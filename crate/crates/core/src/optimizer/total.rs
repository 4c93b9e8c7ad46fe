use serde::{Deserialize, Serialize};

use super::{
    loss_contact, loss_foot_snap, loss_penetration, loss_smoothness, LossError, OptimizerConfig,
};
use crate::alignment::{loss_chamfer, loss_j2d, BodySequence};
use crate::contact::ContactSet;
use crate::loss::LossEval;
use crate::scene::{CameraFrame, TsdfVolume};
use crate::Vec3;

/// Fixed inputs of one optimization session.
#[derive(Debug, Clone, Copy)]
pub struct AlignmentProblem<'a> {
    pub contacts: &'a ContactSet,
    pub volume: &'a TsdfVolume,
    pub frames: &'a [CameraFrame],
    pub human_points: &'a [Vec<Vec3>],
}

/// Unweighted value of every term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TermBreakdown {
    pub j2d: f64,
    pub chamfer: f64,
    pub contact: f64,
    pub penetration: f64,
    pub smoothness: f64,
    pub foot_snap: f64,
}

impl TermBreakdown {
    /// Weighted sum, in the same order [`total_loss`] accumulates it.
    pub fn weighted_total(&self, cfg: &OptimizerConfig) -> f64 {
        let w = &cfg.weights;
        w.align * (self.j2d + self.chamfer)
            + w.contact * self.contact
            + w.penetration * self.penetration
            + w.smoothness * self.smoothness
            + w.foot_snap * self.foot_snap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalLoss {
    pub eval: LossEval,
    pub terms: TermBreakdown,
    pub behind_camera: usize,
    pub unobserved_vertices: usize,
    pub unobserved_feet: usize,
}

/// Weighted sum of all terms and its gradient. Terms with zero weight are
/// not evaluated.
pub fn total_loss(
    seq: &BodySequence,
    problem: &AlignmentProblem<'_>,
    cfg: &OptimizerConfig,
) -> Result<TotalLoss, LossError> {
    let w = &cfg.weights;
    let mut terms = TermBreakdown::default();
    let mut align = LossEval::zero(seq.len());
    let mut out = TotalLoss {
        eval: LossEval::zero(seq.len()),
        terms,
        behind_camera: 0,
        unobserved_vertices: 0,
        unobserved_feet: 0,
    };

    if w.align > 0.0 {
        let j2d = loss_j2d(seq, problem.frames)?;
        let ch = loss_chamfer(seq, problem.human_points, problem.frames, cfg.facing_angle_deg)?;
        terms.j2d = j2d.eval.value;
        terms.chamfer = ch.eval.value;
        out.behind_camera = j2d.behind_camera;
        align.add_scaled(&j2d.eval, 1.0);
        align.add_scaled(&ch.eval, 1.0);
        align.value = terms.j2d + terms.chamfer;
        out.eval.add_scaled(&align, w.align);
    }
    if w.contact > 0.0 {
        let c = loss_contact(seq, problem.contacts)?;
        terms.contact = c.eval.value;
        out.eval.add_scaled(&c.eval, w.contact);
    }
    if w.penetration > 0.0 {
        let p = loss_penetration(seq, problem.volume, cfg.slack, cfg.huber_delta);
        terms.penetration = p.eval.value;
        out.unobserved_vertices = p.unobserved;
        out.eval.add_scaled(&p.eval, w.penetration);
    }
    if w.smoothness > 0.0 {
        let s = loss_smoothness(seq, cfg.square_acceleration)?;
        terms.smoothness = s.eval.value;
        out.eval.add_scaled(&s.eval, w.smoothness);
    }
    if w.foot_snap > 0.0 {
        let f = loss_foot_snap(seq, problem.volume, cfg.contact_threshold);
        terms.foot_snap = f.eval.value;
        out.unobserved_feet = f.unobserved;
        out.eval.add_scaled(&f.eval, w.foot_snap);
    }
    out.eval.value = terms.weighted_total(cfg);
    out.terms = terms;
    Ok(out)
}
