use std::path::PathBuf;

use clap::Args;
use meshalign_core::io::{read_ply, read_tsdf, write_json, write_ply, PlyData, PlyFormat};
use meshalign_core::retarget::{correct_penetration, CorrectionParams, RetargetError};

use crate::error::{CliError, CliResult};
use crate::run::{manifest, require, seal, to_json, write_sidecars};

#[derive(Debug, Args)]
pub struct CorrectArgs {
    #[arg(long)]
    tsdf: PathBuf,
    /// Robot vertices in meters (PLY).
    #[arg(long)]
    vertices: PathBuf,
    /// Metric scale of the volume.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Required minimum signed distance (negative).
    #[arg(long, default_value_t = -0.01, allow_hyphen_values = true)]
    safety: f64,
    /// Distance below which vertices steer the direction; defaults to half
    /// the metric truncation.
    #[arg(long)]
    near_band: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    max_eta: f64,
    /// Correction result (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also write the translated vertices.
    #[arg(long)]
    corrected: Option<PathBuf>,
}

pub fn run(args: CorrectArgs) -> CliResult {
    require(&args.tsdf)?;
    require(&args.vertices)?;
    let volume = read_tsdf(&args.tsdf)?;
    let ply = read_ply(&args.vertices)?;
    let mut params = CorrectionParams::for_volume(&volume, args.scale, args.safety, args.max_eta);
    if let Some(b) = args.near_band {
        params.near_band = b;
    }
    let result = correct_penetration(&volume, &ply.points, &params).map_err(|e| match e {
        RetargetError::NoFeasibleOffset { .. } => CliError::numerical(e),
        RetargetError::ZeroGradient | RetargetError::DegenerateConfiguration(_) => CliError::degenerate(e),
        _ => CliError::input(e),
    })?;

    let mut outputs = vec![args.out.clone()];
    if let Some(p) = &args.corrected {
        outputs.push(p.clone());
    }
    let mut m = manifest("correct", None);
    m.add_input("tsdf", &args.tsdf)?;
    m.add_input("vertices", &args.vertices)?;
    m.set_config(
        None,
        &serde_json::json!({
            "scale": params.scale,
            "safety": params.safety,
            "near_band": params.near_band,
            "max_eta": params.max_eta,
        }),
    );
    m.convention("direction", "normalized mean SDF gradient over near-surface vertices");
    let run = seal(&mut m, &outputs);
    write_json(&args.out, &to_json(&result, &run))?;
    if let Some(p) = &args.corrected {
        write_ply(
            p,
            &PlyData {
                points: ply.points.iter().map(|v| v + result.offset).collect(),
                normals: ply.normals.clone(),
                comments: vec![format!("run {run}")],
            },
            PlyFormat::BinaryLittleEndian,
        )?;
    }
    write_sidecars(&m, &outputs)?;
    println!(
        "correct: eta {:.4} m, min SDF {:.4} -> {:.4}",
        result.magnitude, result.pre_min_sdf, result.post_min_sdf
    );
    Ok(())
}
