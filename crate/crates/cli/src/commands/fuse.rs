use std::path::PathBuf;

use clap::Args;
use meshalign_core::io::write_tsdf;
use meshalign_core::scene::{fuse_tsdf, SceneError};

use crate::error::{CliError, CliResult};
use crate::run::{load_cloud, manifest, require, seal, write_sidecars};

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Oriented scene cloud (PLY with normals).
    #[arg(long)]
    cloud: PathBuf,
    /// Output TSDF container.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    voxel: f64,
    #[arg(long, default_value_t = 0.15)]
    truncation: f64,
    /// Margin added around the cloud's bounding box.
    #[arg(long, default_value_t = 0.3)]
    padding: f64,
}

pub fn run(args: FuseArgs) -> CliResult {
    require(&args.cloud)?;
    let cloud = load_cloud(&args.cloud)?;
    let volume = fuse_tsdf(&cloud, args.voxel, args.truncation, args.padding).map_err(|e| match e {
        SceneError::DegenerateCloud { .. } | SceneError::EmptySet => CliError::degenerate(e),
        _ => CliError::input(e),
    })?;
    let mut m = manifest("fuse", None);
    m.add_input("cloud", &args.cloud)?;
    m.set_config(
        None,
        &serde_json::json!({
            "voxel": args.voxel,
            "truncation": args.truncation,
            "padding": args.padding,
        }),
    );
    m.convention("fusion", "Gaussian-weighted point-to-plane splatting, weight = contributing points");
    let outputs = vec![args.out.clone()];
    seal(&mut m, &outputs);
    write_tsdf(&args.out, &volume)?;
    write_sidecars(&m, &outputs)?;
    let [nx, ny, nz] = volume.dims();
    println!("fuse: {} points -> {nx}x{ny}x{nz} grid at {} m", cloud.len(), args.voxel);
    Ok(())
}
