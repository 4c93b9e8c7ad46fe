use std::path::PathBuf;

use clap::Args;
use meshalign_core::io::{read_trajectory, write_json, write_ply, PlyData, PlyFormat};
use meshalign_core::retarget::{
    build_interaction_mesh, laplacian_energy, sample_terrain, RetargetError,
};
use meshalign_core::Vec3;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::run::{load_cloud, manifest, require, seal, to_json, write_sidecars};

#[derive(Debug, Args)]
pub struct RetargetArgs {
    /// Terrain cloud (PLY with normals), meters.
    #[arg(long)]
    cloud: PathBuf,
    /// Human keypoints (trajectory CSV).
    #[arg(long)]
    source: PathBuf,
    /// Robot keypoints in correspondence with the source (trajectory CSV).
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 0)]
    frame: usize,
    /// Source joint whose position anchors local terrain sampling.
    #[arg(long, default_value_t = 0)]
    anchor_joint: usize,
    #[arg(long, default_value_t = 1.0)]
    local_radius: f64,
    #[arg(long, default_value_t = 32)]
    n_local: usize,
    #[arg(long, default_value_t = 64)]
    n_global: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Energy report (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also write the interaction mesh (JSON).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Also write the terrain samples (PLY).
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Serialize)]
struct EnergyReport {
    frame: usize,
    energy: f64,
    /// Gradient with respect to each target keypoint.
    gradient: Vec<Vec3>,
    nodes: usize,
    body_nodes: usize,
    terrain_local: usize,
    terrain_global: usize,
    local_region_empty: bool,
    jittered: bool,
}

pub fn run(args: RetargetArgs) -> CliResult {
    for p in [&args.cloud, &args.source, &args.target] {
        require(p)?;
    }
    let cloud = load_cloud(&args.cloud)?;
    let source = read_trajectory(&args.source, 30.0)?;
    let target = read_trajectory(&args.target, 30.0)?;
    let pick = |t: &meshalign_core::metrics::JointTrajectory, what: &str| -> CliResult<Vec<Vec3>> {
        t.joints
            .get(args.frame)
            .cloned()
            .ok_or_else(|| CliError::Input(format!("{what} has no frame {}", args.frame)))
    };
    let src = pick(&source, "source")?;
    let tgt = pick(&target, "target")?;
    if src.len() != tgt.len() {
        return Err(CliError::Input(format!(
            "{} source vs {} target keypoints",
            src.len(),
            tgt.len()
        )));
    }
    let anchor = *src
        .get(args.anchor_joint)
        .ok_or_else(|| CliError::Input(format!("anchor joint {} out of range", args.anchor_joint)))?;

    let sample = sample_terrain(&cloud, anchor, args.local_radius, args.n_local, args.n_global, args.seed);
    if sample.local_region_empty {
        eprintln!("warning: no terrain within {} m of the anchor; using global samples only", args.local_radius);
    }
    let mesh = build_interaction_mesh(&src, &sample.points).map_err(|e| match e {
        RetargetError::DegenerateConfiguration(_) => CliError::degenerate(e),
        _ => CliError::input(e),
    })?;
    let terrain: Vec<Vec3> = sample.points.iter().map(|p| p.position).collect();
    let target_nodes: Vec<Vec3> = tgt.iter().chain(&terrain).copied().collect();
    let (energy, gradient) = laplacian_energy(&mesh, &mesh.nodes, &target_nodes).map_err(CliError::input)?;

    let count = |r| sample.points.iter().filter(|p| p.role == r).count();
    let report = EnergyReport {
        frame: args.frame,
        energy,
        gradient,
        nodes: mesh.len(),
        body_nodes: mesh.body_count(),
        terrain_local: count(meshalign_core::retarget::NodeRole::TerrainLocal),
        terrain_global: count(meshalign_core::retarget::NodeRole::TerrainGlobal),
        local_region_empty: sample.local_region_empty,
        jittered: mesh.jittered,
    };

    let mut outputs = vec![args.out.clone()];
    outputs.extend(args.mesh.iter().cloned());
    outputs.extend(args.samples.iter().cloned());
    let mut m = manifest("retarget-energy", Some(args.seed));
    m.add_input("cloud", &args.cloud)?;
    m.add_input("source", &args.source)?;
    m.add_input("target", &args.target)?;
    m.set_config(
        None,
        &serde_json::json!({
            "frame": args.frame,
            "anchor_joint": args.anchor_joint,
            "local_radius": args.local_radius,
            "n_local": args.n_local,
            "n_global": args.n_global,
        }),
    );
    m.convention("weights", "uniform 1/|N(i)|");
    let run = seal(&mut m, &outputs);
    write_json(&args.out, &to_json(&report, &run))?;
    if let Some(p) = &args.mesh {
        write_json(p, &to_json(&mesh, &run))?;
    }
    if let Some(p) = &args.samples {
        write_ply(
            p,
            &PlyData {
                points: terrain,
                normals: None,
                comments: vec![format!("run {run}")],
            },
            PlyFormat::Ascii,
        )?;
    }
    write_sidecars(&m, &outputs)?;
    println!("retarget-energy: E = {energy:.6e} over {} nodes", mesh.len());
    Ok(())
}
