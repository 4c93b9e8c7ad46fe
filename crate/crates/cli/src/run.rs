use std::path::{Path, PathBuf};

use meshalign_core::io::{read_ply, RunManifest};
use meshalign_core::scene::{SceneError, ScenePointCloud};

use crate::error::{CliError, CliResult};

pub fn manifest(command: &str, seed: Option<u64>) -> RunManifest {
    RunManifest::new("meshalign", env!("CARGO_PKG_VERSION"), command, seed)
}

/// Finalizes `m` over `outputs` and writes one sidecar per output.
pub fn seal(m: &mut RunManifest, outputs: &[PathBuf]) -> String {
    for o in outputs {
        m.add_output(o);
    }
    m.finalize().to_string()
}

pub fn write_sidecars(m: &RunManifest, outputs: &[PathBuf]) -> CliResult {
    for o in outputs {
        m.write_sidecar(o)?;
    }
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

pub fn require(path: &Path) -> CliResult {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{}: no such file", path.display())))
    }
}

/// Loads an oriented cloud. Missing normals are an input error; an empty or
/// otherwise unusable cloud is degenerate geometry.
pub fn load_cloud(path: &Path) -> CliResult<ScenePointCloud> {
    let ply = read_ply(path)?;
    if ply.points.is_empty() {
        return Err(CliError::Degenerate(format!("{}: cloud has no points", path.display())));
    }
    let normals = ply
        .normals
        .ok_or_else(|| CliError::Input(format!("{}: cloud has no normals", path.display())))?;
    ScenePointCloud::with_normalized_normals(ply.points, normals).map_err(|e| match e {
        SceneError::InvalidCloud(_) | SceneError::EmptySet | SceneError::DegenerateCloud { .. } => {
            CliError::degenerate(format!("{}: {e}", path.display()))
        }
        other => CliError::input(format!("{}: {other}", path.display())),
    })
}

pub fn to_json<T: serde::Serialize>(value: &T, run: &str) -> serde_json::Value {
    let mut v = serde_json::to_value(value).expect("serializable");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("run".into(), serde_json::Value::String(run.into()));
    }
    v
}
