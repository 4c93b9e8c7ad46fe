use std::path::PathBuf;

use clap::Args;
use meshalign_core::io::{
    read_json, write_body, write_cameras, write_contacts, write_human_points, write_json, write_ply,
    write_trajectory, PlyData, PlyFormat,
};
use meshalign_core::synth::{generate, SynthError, SynthSpec};

use crate::error::{CliError, CliResult};
use crate::run::{ensure_dir, manifest, seal, write_sidecars};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene specification (JSON); defaults apply to omitted fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run(args: SynthArgs) -> CliResult {
    let mut spec: SynthSpec = match &args.spec {
        Some(p) => read_json(p)?,
        None => SynthSpec::default(),
    };
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let scene = generate(&spec).map_err(|e| match e {
        SynthError::InvalidSpec(_) => CliError::input(e),
        _ => CliError::degenerate(e),
    })?;
    ensure_dir(&args.out)?;

    let out = |name: &str| args.out.join(name);
    let outputs = vec![
        out("scene.ply"),
        out("cameras.json"),
        out("body.json"),
        out("contacts_gt.jsonl"),
        out("gt_joints.csv"),
        out("human_points.csv"),
        out("spec.json"),
    ];
    let mut m = manifest("synth", Some(spec.seed));
    if let Some(p) = &args.spec {
        m.add_input("spec", p)?;
    }
    m.set_config(args.spec.as_deref(), &spec);
    m.convention("scene_units", "scene-native = metric / scene_scale");
    m.convention("body_units", "meters");
    let run = seal(&mut m, &outputs);

    write_ply(
        &outputs[0],
        &PlyData {
            points: scene.cloud.points().to_vec(),
            normals: Some(scene.cloud.normals().to_vec()),
            comments: vec![format!("run {run}")],
        },
        PlyFormat::BinaryLittleEndian,
    )?;
    write_cameras(&outputs[1], &scene.frames, Some(&run))?;
    write_body(&outputs[2], &scene.body, Some(&run))?;
    write_contacts(&outputs[3], &scene.contacts)?;
    write_trajectory(&outputs[4], &scene.gt_joints, Some(&run))?;
    write_human_points(&outputs[5], &scene.human_points, Some(&run))?;
    write_json(&outputs[6], &spec)?;
    write_sidecars(&m, &outputs)?;
    println!(
        "synth: {} frames, {} scene points, {} contacts -> {}",
        spec.frames,
        scene.cloud.len(),
        scene.contacts.total(),
        args.out.display()
    );
    Ok(())
}
