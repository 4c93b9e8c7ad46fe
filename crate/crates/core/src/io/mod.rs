//! File formats: PLY clouds, PFM depth, PGM masks, the binary TSDF
//! container, body and camera manifests, contact JSONL, CSV tables, run
//! manifests and SVG plots.

mod body;
mod csv_tables;
mod image;
mod manifest;
mod ply;
mod svg;
mod tsdf;

pub use body::{read_body, read_cameras, write_body, write_cameras, CameraRecord};
pub use csv_tables::{
    read_human_points, read_trajectory, write_human_points, write_loss_curve, write_trajectory,
};
pub use image::{read_pfm, read_pgm, write_pfm, write_pgm};
pub use manifest::{sha256_file, sidecar_path, InputRecord, RunManifest};
pub use ply::{read_ply, write_ply, PlyData, PlyFormat};
pub use svg::{line_plot, Series};
pub use tsdf::{read_tsdf, write_tsdf, TSDF_MAGIC};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::contact::{ContactSet, FrameContacts};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|e| IoError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    std::fs::write(path, bytes).map_err(|e| IoError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| IoError::parse(path, e.to_string()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

/// One JSON object per frame, one frame per line.
pub fn write_contacts(path: &Path, contacts: &ContactSet) -> Result<(), IoError> {
    let mut s = String::new();
    for f in &contacts.frames {
        s.push_str(&serde_json::to_string(f).expect("serializable"));
        s.push('\n');
    }
    write_bytes(path, s.as_bytes())
}

pub fn read_contacts(path: &Path) -> Result<ContactSet, IoError> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| IoError::parse(path, e.to_string()))?;
    let frames = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<FrameContacts>(l)
                .map_err(|e| IoError::parse(path, format!("line {}: {e}", i + 1)))
        })
        .collect::<Result<_, _>>()?;
    Ok(ContactSet { frames })
}
