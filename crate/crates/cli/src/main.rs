//! `meshalign`: metric human and scene reconstruction from monocular video
//! observations, plus retargeting and evaluation utilities.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod run;

use commands::*;

#[derive(Debug, Parser)]
#[command(name = "meshalign", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse an oriented point cloud into a truncated signed distance volume.
    Fuse(fuse::FuseArgs),
    /// Predict scene / body contact pairs from depth edges and masks.
    Contacts(contacts::ContactsArgs),
    /// Jointly optimize per-frame translations and the scene scale.
    Optimize(optimize::OptimizeArgs),
    /// Translate robot geometry out of the scene surface.
    Correct(correct::CorrectArgs),
    /// Interaction-mesh Laplacian energy between human and robot keypoints.
    RetargetEnergy(retarget::RetargetArgs),
    /// Segment-wise MPJPE and field-of-view Chamfer metrics.
    Evaluate(evaluate::EvaluateArgs),
    /// Generate a synthetic scene with ground truth.
    Synth(synth::SynthArgs),
    /// Render a loss curve or metrics report as SVG.
    Plot(plot::PlotArgs),
}

fn configure_threads() {
    if let Some(n) = std::env::var("MESHALIGN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Fuse(a) => fuse::run(a),
        Command::Contacts(a) => contacts::run(a),
        Command::Optimize(a) => optimize::run(a),
        Command::Correct(a) => correct::run(a),
        Command::RetargetEnergy(a) => retarget::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Plot(a) => plot::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("meshalign: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
