//! Kinematic consistency optimization over per-frame translations and the
//! global scene scale.
//!
//! The objective is
//! `λ_align (L_J2d + L_d) + λ_c L_c + λ_p L_p + λ_sm L_sm + λ_fs L_fs`; see
//! [`total_loss`] and the individual terms in this module.

mod config;
mod descent;
mod terms;
mod total;

pub use config::{LossWeights, OptimizerConfig};
pub use descent::{optimize, IterationRecord, OptimizationReport, OptimizeError, Termination};
pub use terms::{
    huber, huber_derivative, loss_contact, loss_foot_snap, loss_penetration, loss_smoothness,
    penetration_active, snap_active, ContactLoss, FootSnapLoss, PenetrationLoss, SmoothnessLoss,
    ACCELERATION_NORM_FLOOR,
};
pub use total::{total_loss, AlignmentProblem, TermBreakdown, TotalLoss};

use thiserror::Error;

use crate::alignment::BodyError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error("contact in frame {frame} references vertex {vertex}, body has {count}")]
    InvalidContact {
        frame: usize,
        vertex: usize,
        count: usize,
    },
    #[error("smoothness needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
