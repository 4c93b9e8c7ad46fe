use std::path::PathBuf;

use clap::Args;
use meshalign_core::contact::{extract_scene_contacts, frame_band, ContactParams, ContactSet};
use meshalign_core::io::{read_body, read_cameras, read_json, write_contacts, write_pgm};

use crate::error::{CliError, CliResult};
use crate::run::{ensure_dir, load_cloud, manifest, require, seal, write_sidecars};

#[derive(Debug, Args)]
pub struct ContactsArgs {
    /// Scene cloud (PLY with normals).
    #[arg(long)]
    cloud: PathBuf,
    /// Camera file; every camera needs a depth map and a human mask.
    #[arg(long)]
    cameras: PathBuf,
    /// Body sequence manifest.
    #[arg(long)]
    body: PathBuf,
    /// Output JSONL, one line per frame.
    #[arg(long)]
    out: PathBuf,
    /// Contact parameters (JSON).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Writes each frame's contact band as `band.NNNN.pgm` here.
    #[arg(long)]
    band_dir: Option<PathBuf>,
}

pub fn run(args: ContactsArgs) -> CliResult {
    for p in [&args.cloud, &args.cameras, &args.body] {
        require(p)?;
    }
    let params: ContactParams = match &args.params {
        Some(p) => read_json(p)?,
        None => ContactParams::default(),
    };
    let cloud = load_cloud(&args.cloud)?;
    let frames = read_cameras(&args.cameras)?;
    let body = read_body(&args.body)?;
    if frames.len() != body.len() {
        return Err(CliError::Input(format!(
            "{} cameras for {} body frames",
            frames.len(),
            body.len()
        )));
    }
    if let Some(d) = &args.band_dir {
        ensure_dir(d)?;
    }

    let mut set = ContactSet::default();
    for (t, frame) in frames.iter().enumerate() {
        let (Some(mask), Some(depth)) = (&frame.mask, &frame.depth) else {
            return Err(CliError::Input(format!("camera {t} lacks a depth map or mask")));
        };
        let band = frame_band(mask, depth, &params).map_err(CliError::input)?;
        if let Some(d) = &args.band_dir {
            write_pgm(&d.join(format!("band.{t:04}.pgm")), &band)?;
        }
        let fc = extract_scene_contacts(t, &band, &cloud, frame, &body.posed_vertices(t), &params)
            .map_err(CliError::input)?;
        set.frames.push(fc);
    }

    let mut m = manifest("contacts", None);
    m.add_input("cloud", &args.cloud)?;
    m.add_input("cameras", &args.cameras)?;
    m.add_input("body", &args.body)?;
    if let Some(p) = &args.params {
        m.add_input("params", p)?;
    }
    m.set_config(args.params.as_deref(), &params);
    m.convention("projection", "scene-native points projected with the metric camera");
    let outputs = vec![args.out.clone()];
    seal(&mut m, &outputs);
    write_contacts(&args.out, &set)?;
    write_sidecars(&m, &outputs)?;
    println!("contacts: {} pairs over {} frames", set.total(), set.frames.len());
    Ok(())
}
