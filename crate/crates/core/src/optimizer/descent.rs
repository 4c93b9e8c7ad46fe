use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{total_loss, AlignmentProblem, LossError, OptimizerConfig, TermBreakdown, TotalLoss};
use crate::alignment::BodySequence;
use crate::Vec3;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Relative decrease of an accepted step fell below the tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIterations,
    /// The starting point already has zero loss.
    ZeroLoss,
    /// The masked gradient vanished.
    Stationary,
    /// No step size in the backtracking schedule decreased the loss.
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub total: f64,
    pub terms: TermBreakdown,
    pub gradient_norm: f64,
    pub step_scale: f64,
    pub backtracks: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub config: OptimizerConfig,
    pub iterations: Vec<IterationRecord>,
    pub initial_total: f64,
    pub final_total: f64,
    pub final_translations: Vec<Vec3>,
    pub final_scale: f64,
    pub termination: Termination,
    pub behind_camera: usize,
    pub unobserved_vertices: usize,
    pub unobserved_feet: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("every loss weight is zero")]
    NoActiveTerms,
    #[error("loss became non-finite at iteration {iteration}")]
    Diverged {
        iteration: usize,
        /// Report up to the last finite state.
        report: Box<OptimizationReport>,
    },
}

fn record(iteration: usize, loss: &TotalLoss, grad_norm: f64, step_scale: f64, backtracks: usize, scale: f64) -> IterationRecord {
    IterationRecord {
        iteration,
        total: loss.eval.value,
        terms: loss.terms,
        gradient_norm: grad_norm,
        step_scale,
        backtracks,
        scale,
    }
}

/// First-order descent on the packed variables with per-coordinate adaptive
/// moments. A proposed step is accepted only if it does not increase the
/// total loss; otherwise the step is halved and retried. Indicator sets and
/// nearest-neighbour assignments are re-evaluated at every trial point.
pub fn optimize(
    seq: &BodySequence,
    problem: &AlignmentProblem<'_>,
    cfg: &OptimizerConfig,
) -> Result<(BodySequence, OptimizationReport), OptimizeError> {
    cfg.validate()?;
    seq.validate().map_err(LossError::from)?;
    if !cfg.any_active_term() {
        return Err(OptimizeError::NoActiveTerms);
    }
    let mut state = seq.clone();
    let n = state.pack().len();
    let scale_slot = n - 1;
    let lr: Vec<f64> = (0..n)
        .map(|i| if i == scale_slot { cfg.scale_step } else { cfg.translation_step })
        .collect();
    let frozen: Vec<bool> = (0..n)
        .map(|i| if i == scale_slot { !cfg.optimize_scale } else { !cfg.optimize_translations })
        .collect();

    let mut current = total_loss(&state, problem, cfg)?;
    let mut report = OptimizationReport {
        config: *cfg,
        iterations: vec![record(0, &current, current.eval.gradient_norm(), 1.0, 0, state.scale)],
        initial_total: current.eval.value,
        final_total: current.eval.value,
        final_translations: state.translations.clone(),
        final_scale: state.scale,
        termination: Termination::MaxIterations,
        behind_camera: current.behind_camera,
        unobserved_vertices: current.unobserved_vertices,
        unobserved_feet: current.unobserved_feet,
    };
    if !current.eval.value.is_finite() {
        return Err(OptimizeError::Diverged {
            iteration: 0,
            report: Box::new(report),
        });
    }
    if current.eval.value == 0.0 {
        report.termination = Termination::ZeroLoss;
        return Ok((state, report));
    }

    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut step_scale = 1.0f64;
    let mut x = state.pack();
    for iteration in 1..=cfg.max_iterations {
        let mut grad = current.eval.packed_gradient();
        for (g, f) in grad.iter_mut().zip(&frozen) {
            if *f {
                *g = 0.0;
            }
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm == 0.0 {
            report.termination = Termination::Stationary;
            break;
        }
        let bc1 = 1.0 - BETA1.powi(iteration as i32);
        let bc2 = 1.0 - BETA2.powi(iteration as i32);
        let mut direction = vec![0.0; n];
        for i in 0..n {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            direction[i] = lr[i] * (m[i] / bc1) / ((v[i] / bc2).sqrt() + ADAM_EPS);
        }

        let mut accepted = None;
        let mut backtracks = 0;
        while backtracks <= cfg.max_backtracks {
            let mut trial_x: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi - step_scale * di).collect();
            trial_x[scale_slot] = trial_x[scale_slot].clamp(cfg.scale_min, cfg.scale_max);
            let mut trial = state.clone();
            trial.unpack(&trial_x);
            let loss = total_loss(&trial, problem, cfg)?;
            if !loss.eval.value.is_finite() {
                report.termination = Termination::LineSearchFailed;
                return Err(OptimizeError::Diverged {
                    iteration,
                    report: Box::new(report),
                });
            }
            if loss.eval.value <= current.eval.value {
                accepted = Some((trial_x, trial, loss));
                break;
            }
            step_scale *= 0.5;
            backtracks += 1;
        }
        let Some((new_x, new_state, new_loss)) = accepted else {
            report.termination = Termination::LineSearchFailed;
            break;
        };
        let previous = current.eval.value;
        x = new_x;
        state = new_state;
        current = new_loss;
        report.iterations.push(record(iteration, &current, grad_norm, step_scale, backtracks, state.scale));
        report.final_total = current.eval.value;
        report.final_translations = state.translations.clone();
        report.final_scale = state.scale;
        report.behind_camera = current.behind_camera;
        report.unobserved_vertices = current.unobserved_vertices;
        report.unobserved_feet = current.unobserved_feet;

        if backtracks == 0 {
            step_scale = (step_scale * 1.25).min(1.0);
        }
        let decrease = (previous - current.eval.value) / previous;
        if current.eval.value == 0.0 || decrease < cfg.tolerance {
            report.termination = Termination::Converged;
            break;
        }
    }
    Ok((state, report))
}
