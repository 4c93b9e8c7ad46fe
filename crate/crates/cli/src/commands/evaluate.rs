use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use meshalign_core::io::{
    line_plot, read_cameras, read_ply, read_trajectory, sidecar_path, write_bytes, write_json, RunManifest, Series,
};
use meshalign_core::metrics::{evaluate, AlignmentKind, MetricsError, MetricsReport, DEFAULT_SEGMENT_LEN};

use crate::error::{CliError, CliResult};
use crate::run::{manifest, require, seal, to_json, write_sidecars};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Alignment {
    Rigid,
    Similarity,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted joint trajectory (CSV).
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth joint trajectory (CSV).
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
    segment_len: usize,
    #[arg(long, value_enum, default_value = "rigid")]
    alignment: Alignment,
    /// Predicted scene cloud (PLY) for the field-of-view Chamfer distance.
    #[arg(long, requires_all = ["gt_cloud", "cameras"])]
    pred_cloud: Option<PathBuf>,
    #[arg(long, requires = "pred_cloud")]
    gt_cloud: Option<PathBuf>,
    /// Cameras defining the field of view.
    #[arg(long, requires = "pred_cloud")]
    cameras: Option<PathBuf>,
    /// Metrics report (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also write the plain-text table.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Also write a per-segment SVG chart.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Compare even when the inputs come from unrelated runs.
    #[arg(long)]
    force: bool,
}

fn lineage(path: &Path) -> CliResult<Option<RunManifest>> {
    let side = sidecar_path(path);
    if side.exists() {
        Ok(Some(RunManifest::read(&side)?))
    } else {
        Ok(None)
    }
}

pub fn segment_plot(report: &MetricsReport) -> String {
    let series = |label: &str, r: &meshalign_core::metrics::MpjpeResult| Series {
        label: label.into(),
        points: r.segments.iter().enumerate().map(|(i, s)| (i as f64, s.mpjpe_mm)).collect(),
    };
    line_plot(
        "Per-segment joint error",
        "segment",
        "error [mm]",
        &[series("W-MPJPE", &report.w_mpjpe), series("WA-MPJPE", &report.wa_mpjpe)],
        false,
    )
}

pub fn run(args: EvaluateArgs) -> CliResult {
    require(&args.pred)?;
    require(&args.gt)?;
    if !args.force {
        if let (Some(p), Some(g)) = (lineage(&args.pred)?, lineage(&args.gt)?) {
            if p.lineage_set().is_disjoint(&g.lineage_set()) {
                return Err(CliError::Input(
                    "prediction and ground truth share no run lineage (use --force to compare anyway)".into(),
                ));
            }
        }
    }
    let pred = read_trajectory(&args.pred, 30.0)?;
    let gt = read_trajectory(&args.gt, 30.0)?;
    let kind = match args.alignment {
        Alignment::Rigid => AlignmentKind::Rigid,
        Alignment::Similarity => AlignmentKind::Similarity,
    };
    let clouds = match (&args.pred_cloud, &args.gt_cloud, &args.cameras) {
        (Some(p), Some(g), Some(c)) => {
            for f in [p, g, c] {
                require(f)?;
            }
            Some((read_ply(p)?.points, read_ply(g)?.points, read_cameras(c)?))
        }
        _ => None,
    };
    let report = evaluate(
        &pred,
        &gt,
        args.segment_len,
        kind,
        clouds.as_ref().map(|(p, g, c)| (p.as_slice(), g.as_slice(), c.as_slice())),
    )
    .map_err(|e| match e {
        MetricsError::DegenerateConfiguration(_) | MetricsError::EmptyAfterFiltering { .. } => {
            CliError::degenerate(e)
        }
        _ => CliError::input(e),
    })?;

    let mut outputs = vec![args.out.clone()];
    outputs.extend(args.table.iter().cloned());
    outputs.extend(args.plot.iter().cloned());
    let mut m = manifest("evaluate", None);
    m.add_input("pred", &args.pred)?;
    m.add_input("gt", &args.gt)?;
    if let (Some(p), Some(g), Some(c)) = (&args.pred_cloud, &args.gt_cloud, &args.cameras) {
        m.add_input("pred_cloud", p)?;
        m.add_input("gt_cloud", g)?;
        m.add_input("cameras", c)?;
    }
    m.set_config(None, &report.conventions);
    m.convention("units", report.conventions.units.clone());
    let run = seal(&mut m, &outputs);
    write_json(&args.out, &to_json(&report, &run))?;
    let table = report.table();
    if let Some(p) = &args.table {
        write_bytes(p, format!("# run {run}\n{table}").as_bytes())?;
    }
    if let Some(p) = &args.plot {
        write_bytes(p, format!("<!-- run {run} -->\n{}", segment_plot(&report)).as_bytes())?;
    }
    write_sidecars(&m, &outputs)?;
    print!("{table}");
    Ok(())
}
