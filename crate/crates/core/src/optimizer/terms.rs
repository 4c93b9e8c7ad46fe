use rayon::prelude::*;

use super::LossError;
use crate::alignment::BodySequence;
use crate::contact::ContactSet;
use crate::loss::LossEval;
use crate::scene::TsdfVolume;
use crate::Vec3;

/// Floor on the acceleration norm when differentiating the unsquared term.
pub const ACCELERATION_NORM_FLOOR: f64 = 1e-12;

/// Huber penalty: quadratic up to `delta`, linear beyond.
pub fn huber(p: f64, delta: f64) -> f64 {
    if p.abs() <= delta {
        0.5 * p * p
    } else {
        delta * (p.abs() - 0.5 * delta)
    }
}

pub fn huber_derivative(p: f64, delta: f64) -> f64 {
    if p.abs() <= delta {
        p
    } else {
        delta * p.signum()
    }
}

/// Metric distance below the slack: penalized by the penetration term.
#[inline]
pub fn penetration_active(distance: f64, slack: f64) -> bool {
    -(distance + slack) > 0.0
}

/// Metric distance inside `(0, τ_contact]`: penalized by foot snapping.
#[inline]
pub fn snap_active(distance: f64, contact_threshold: f64) -> bool {
    distance > 0.0 && distance <= contact_threshold
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactLoss {
    pub eval: LossEval,
    pub contacts: usize,
    /// Set when the contact set is empty; the term is then identically 0.
    pub no_contacts: bool,
}

/// Mean squared distance between scaled scene contacts `α c` and their posed
/// body vertices.
pub fn loss_contact(seq: &BodySequence, contacts: &ContactSet) -> Result<ContactLoss, LossError> {
    let alpha = seq.scale;
    let nv = seq.vertex_count();
    let mut eval = LossEval::zero(seq.len());
    let mut count = 0usize;
    for fc in &contacts.frames {
        if fc.pairs.is_empty() {
            continue;
        }
        if fc.frame >= seq.len() {
            return Err(LossError::InvalidConfig(format!(
                "contacts reference frame {} of a {}-frame sequence",
                fc.frame,
                seq.len()
            )));
        }
        for pair in &fc.pairs {
            if pair.vertex >= nv {
                return Err(LossError::InvalidContact {
                    frame: fc.frame,
                    vertex: pair.vertex,
                    count: nv,
                });
            }
            let r = alpha * pair.point - seq.posed_vertex(fc.frame, pair.vertex);
            eval.value += r.norm_squared();
            eval.grad_scale += 2.0 * pair.point.dot(&r);
            eval.grad_translations[fc.frame] -= 2.0 * r;
            count += 1;
        }
    }
    if count > 0 {
        let n = count as f64;
        eval.value /= n;
        eval.grad_scale /= n;
        for g in &mut eval.grad_translations {
            *g /= n;
        }
    }
    Ok(ContactLoss {
        eval,
        contacts: count,
        no_contacts: count == 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenetrationLoss {
    pub eval: LossEval,
    /// Vertex queries that touched unobserved space.
    pub unobserved: usize,
    /// `(frame, vertex)` pairs with a non-zero penalty.
    pub active: Vec<(usize, usize)>,
}

/// Mean Huber penalty of `max(0, -(d + τ))` over every posed vertex of every
/// frame, `d` being the metric TSDF distance of the scaled scene.
pub fn loss_penetration(seq: &BodySequence, volume: &TsdfVolume, slack: f64, delta: f64) -> PenetrationLoss {
    let alpha = seq.scale;
    let per_frame: Vec<(f64, Vec3, f64, usize, Vec<usize>)> = (0..seq.len())
        .into_par_iter()
        .map(|t| {
            let mut value = 0.0;
            let mut grad = Vec3::zeros();
            let mut grad_scale = 0.0;
            let mut unobserved = 0;
            let mut active = Vec::new();
            for i in 0..seq.vertex_count() {
                let s = volume.query_metric(&seq.posed_vertex(t, i), alpha);
                if !s.observed {
                    unobserved += 1;
                    continue;
                }
                if !penetration_active(s.distance, slack) {
                    continue;
                }
                let p = -(s.distance + slack);
                value += huber(p, delta);
                // dp/dd = -1
                let dh = -huber_derivative(p, delta);
                grad += s.gradient * dh;
                grad_scale += s.d_scale * dh;
                active.push(i);
            }
            (value, grad, grad_scale, unobserved, active)
        })
        .collect();

    let n = (seq.len() * seq.vertex_count()).max(1) as f64;
    let mut out = PenetrationLoss {
        eval: LossEval::zero(seq.len()),
        unobserved: 0,
        active: Vec::new(),
    };
    for (t, (value, grad, grad_scale, unobserved, active)) in per_frame.into_iter().enumerate() {
        out.eval.value += value / n;
        out.eval.grad_translations[t] = grad / n;
        out.eval.grad_scale += grad_scale / n;
        out.unobserved += unobserved;
        out.active.extend(active.into_iter().map(|i| (t, i)));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessLoss {
    pub eval: LossEval,
    pub velocity: f64,
    pub acceleration: f64,
}

/// Velocity plus acceleration penalty on `T^t = t_cam^t + t^t`, finite
/// differences scaled by the frame rate. The velocity norm is squared; the
/// acceleration norm is squared only when `square_acceleration` is set.
pub fn loss_smoothness(seq: &BodySequence, square_acceleration: bool) -> Result<SmoothnessLoss, LossError> {
    let n = seq.len();
    if n < 2 {
        return Err(LossError::TooFewFrames(n));
    }
    let f = seq.fps;
    let traj: Vec<Vec3> = (0..n).map(|t| seq.global_translation(t)).collect();
    let mut eval = LossEval::zero(n);

    let mut velocity = 0.0;
    let nv = (n - 1) as f64;
    for t in 0..n - 1 {
        let v = (traj[t + 1] - traj[t]) * f;
        velocity += v.norm_squared() / nv;
        let g = v * (2.0 * f / nv);
        eval.grad_translations[t + 1] += g;
        eval.grad_translations[t] -= g;
    }

    let mut acceleration = 0.0;
    if n >= 3 {
        let na = (n - 2) as f64;
        for t in 0..n - 2 {
            let a = (traj[t + 2] - 2.0 * traj[t + 1] + traj[t]) * f;
            let g = if square_acceleration {
                acceleration += a.norm_squared() / na;
                a * (2.0 * f / na)
            } else {
                let norm = a.norm();
                acceleration += norm / na;
                a * (f / (na * norm.max(ACCELERATION_NORM_FLOOR)))
            };
            eval.grad_translations[t + 2] += g;
            eval.grad_translations[t + 1] -= 2.0 * g;
            eval.grad_translations[t] += g;
        }
    }
    eval.value = velocity + acceleration;
    Ok(SmoothnessLoss {
        eval,
        velocity,
        acceleration,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootSnapLoss {
    pub eval: LossEval,
    /// `(frame, joint)` pairs inside the snapping band.
    pub active: Vec<(usize, usize)>,
    pub unobserved: usize,
}

/// `(1/N) Σ 1(0 < d ≤ τ_contact) d²` over foot joints of all `N` frames.
pub fn loss_foot_snap(seq: &BodySequence, volume: &TsdfVolume, contact_threshold: f64) -> FootSnapLoss {
    let alpha = seq.scale;
    let n = seq.len().max(1) as f64;
    let mut out = FootSnapLoss {
        eval: LossEval::zero(seq.len()),
        active: Vec::new(),
        unobserved: 0,
    };
    for t in 0..seq.len() {
        for &j in &seq.foot_joints {
            let s = volume.query_metric(&seq.posed_joint(t, j), alpha);
            if !s.observed {
                out.unobserved += 1;
                continue;
            }
            if !snap_active(s.distance, contact_threshold) {
                continue;
            }
            let d = s.distance;
            out.eval.value += d * d / n;
            out.eval.grad_translations[t] += s.gradient * (2.0 * d / n);
            out.eval.grad_scale += 2.0 * d * s.d_scale / n;
            out.active.push((t, j));
        }
    }
    out
}
