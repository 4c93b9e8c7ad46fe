use std::path::PathBuf;

use clap::Args;
use meshalign_core::io::{
    line_plot, read_body, read_cameras, read_contacts, read_human_points, read_json, read_tsdf,
    write_body, write_bytes, write_json, write_loss_curve, write_trajectory, Series,
};
use meshalign_core::metrics::JointTrajectory;
use meshalign_core::optimizer::{optimize, AlignmentProblem, OptimizationReport, OptimizeError, OptimizerConfig};

use crate::error::{CliError, CliResult};
use crate::run::{ensure_dir, manifest, require, seal, to_json, write_sidecars};

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long)]
    cameras: PathBuf,
    #[arg(long)]
    tsdf: PathBuf,
    #[arg(long)]
    contacts: PathBuf,
    /// Observed human points per frame (CSV `frame,x,y,z`).
    #[arg(long)]
    human_points: Option<PathBuf>,
    /// Optimizer configuration (JSON); defaults apply to omitted fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the iteration budget of the configuration.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write `loss_curve.svg`.
    #[arg(long)]
    plot: bool,
}

fn curve_plot(report: &OptimizationReport) -> String {
    let pick = |label: &str, f: &dyn Fn(&meshalign_core::optimizer::IterationRecord) -> f64| Series {
        label: label.into(),
        points: report.iterations.iter().map(|r| (r.iteration as f64, f(r))).collect(),
    };
    line_plot(
        "Kinematic optimization",
        "iteration",
        "loss",
        &[
            pick("total", &|r| r.total),
            pick("contact", &|r| r.terms.contact),
            pick("penetration", &|r| r.terms.penetration),
            pick("smoothness", &|r| r.terms.smoothness),
            pick("foot snap", &|r| r.terms.foot_snap),
            pick("align", &|r| r.terms.j2d + r.terms.chamfer),
        ],
        true,
    )
}

pub fn run(args: OptimizeArgs) -> CliResult {
    for p in [&args.body, &args.cameras, &args.tsdf, &args.contacts] {
        require(p)?;
    }
    let mut cfg: OptimizerConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => OptimizerConfig::default(),
    };
    if let Some(n) = args.max_iterations {
        cfg.max_iterations = n;
    }
    let body = read_body(&args.body)?;
    let frames = read_cameras(&args.cameras)?;
    let volume = read_tsdf(&args.tsdf)?;
    let contacts = read_contacts(&args.contacts)?;
    let human_points = match &args.human_points {
        Some(p) => read_human_points(p, body.len())?,
        None => vec![Vec::new(); body.len()],
    };
    let problem = AlignmentProblem {
        contacts: &contacts,
        volume: &volume,
        frames: &frames,
        human_points: &human_points,
    };

    let (result, report, failure) = match optimize(&body, &problem, &cfg) {
        Ok((seq, report)) => (seq, report, None),
        Err(OptimizeError::Diverged { iteration, report }) => {
            let mut seq = body.clone();
            seq.translations = report.final_translations.clone();
            seq.scale = report.final_scale;
            (seq, *report, Some(CliError::Numerical(format!("loss diverged at iteration {iteration}"))))
        }
        Err(e) => return Err(CliError::input(e)),
    };

    ensure_dir(&args.out)?;
    let out = |n: &str| args.out.join(n);
    let mut outputs = vec![out("body.json"), out("report.json"), out("loss_curve.csv"), out("trajectory.csv")];
    if args.plot {
        outputs.push(out("loss_curve.svg"));
    }
    let mut m = manifest("optimize", None);
    m.add_input("body", &args.body)?;
    m.add_input("cameras", &args.cameras)?;
    m.add_input("tsdf", &args.tsdf)?;
    m.add_input("contacts", &args.contacts)?;
    if let Some(p) = &args.human_points {
        m.add_input("human_points", p)?;
    }
    m.set_config(args.config.as_deref(), &cfg);
    m.convention("scale", "metric = scale * scene-native");
    m.convention("trajectory", "posed joints = base joints + per-frame translation");
    let run = seal(&mut m, &outputs);

    write_body(&outputs[0], &result, Some(&run))?;
    write_json(&outputs[1], &to_json(&report, &run))?;
    write_loss_curve(&outputs[2], &report.iterations, Some(&run))?;
    let traj = JointTrajectory::new((0..result.len()).map(|t| result.posed_joints(t)).collect(), result.fps)
        .map_err(CliError::numerical)?;
    write_trajectory(&outputs[3], &traj, Some(&run))?;
    if args.plot {
        let mut svg = curve_plot(&report);
        svg.insert_str(0, &format!("<!-- run {run} -->\n"));
        write_bytes(&outputs[4], svg.as_bytes())?;
    }
    write_sidecars(&m, &outputs)?;
    println!(
        "optimize: {:?} after {} iterations, loss {:.6e} -> {:.6e}, scale {:.6}",
        report.termination,
        report.iterations.len().saturating_sub(1),
        report.initial_total,
        report.final_total,
        report.final_scale
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
