use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::image::{read_pfm, read_pgm, write_pfm, write_pgm};
use super::{read_bytes, read_json, write_bytes, write_json, IoError};
use crate::alignment::{BodyFrame, BodySequence, Keypoint};
use crate::scene::CameraFrame;
use crate::Vec3;

/// JSON part of a body sequence on disk. Per-vertex data lives in
/// little-endian `f64` blobs next to it, keypoints in a CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyManifest {
    frames: usize,
    vertex_count: usize,
    joint_count: usize,
    fps: f64,
    scale: f64,
    foot_joints: Vec<usize>,
    translations: Vec<[f64; 3]>,
    camera_translations: Vec<[f64; 3]>,
    vertices: String,
    normals: String,
    joints: String,
    keypoints: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<String>,
}

fn sibling(path: &Path, suffix: &str) -> (PathBuf, String) {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("body");
    let name = format!("{stem}.{suffix}");
    (path.with_file_name(&name), name)
}

fn resolve(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

fn blob<'a>(rows: impl Iterator<Item = &'a Vec3>) -> Vec<u8> {
    rows.flat_map(|p| p.iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>())
        .collect()
}

fn unblob(path: &Path, expected: usize) -> Result<Vec<Vec3>, IoError> {
    let bytes = read_bytes(path)?;
    if bytes.len() != expected * 24 {
        return Err(IoError::parse(
            path,
            format!("expected {} bytes, found {}", expected * 24, bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(24)
        .map(|c| {
            let f = |o: usize| f64::from_le_bytes(c[o..o + 8].try_into().unwrap());
            Vec3::new(f(0), f(8), f(16))
        })
        .collect())
}

/// Writes `path` (JSON) plus `<stem>.vertices.bin`, `<stem>.normals.bin`,
/// `<stem>.joints.bin` and, when present, `<stem>.keypoints.csv`.
pub fn write_body(path: &Path, seq: &BodySequence, run: Option<&str>) -> Result<(), IoError> {
    let (vp, vn) = sibling(path, "vertices.bin");
    let (np, nn) = sibling(path, "normals.bin");
    let (jp, jn) = sibling(path, "joints.bin");
    write_bytes(&vp, &blob(seq.frames.iter().flat_map(|f| f.vertices.iter())))?;
    write_bytes(&np, &blob(seq.frames.iter().flat_map(|f| f.normals.iter())))?;
    write_bytes(&jp, &blob(seq.frames.iter().flat_map(|f| f.joints.iter())))?;

    let has_kp = seq.frames.iter().any(|f| !f.keypoints.is_empty());
    let keypoints = if has_kp {
        let (kp, kn) = sibling(path, "keypoints.csv");
        let mut w = csv::Writer::from_path(&kp).map_err(|e| IoError::parse(&kp, e.to_string()))?;
        let mut rows = || -> Result<(), csv::Error> {
            w.write_record(["frame", "joint", "u", "v", "confidence"])?;
            for (t, f) in seq.frames.iter().enumerate() {
                for (j, k) in f.keypoints.iter().enumerate() {
                    w.write_record([
                        t.to_string(),
                        j.to_string(),
                        format!("{:?}", k.u),
                        format!("{:?}", k.v),
                        format!("{:?}", k.confidence),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        };
        rows().map_err(|e| IoError::parse(&kp, e.to_string()))?;
        Some(kn)
    } else {
        None
    };

    let manifest = BodyManifest {
        frames: seq.len(),
        vertex_count: seq.vertex_count(),
        joint_count: seq.joint_count(),
        fps: seq.fps,
        scale: seq.scale,
        foot_joints: seq.foot_joints.clone(),
        translations: seq.translations.iter().map(|t| [t.x, t.y, t.z]).collect(),
        camera_translations: seq
            .frames
            .iter()
            .map(|f| [f.camera_translation.x, f.camera_translation.y, f.camera_translation.z])
            .collect(),
        vertices: vn,
        normals: nn,
        joints: jn,
        keypoints,
        run: run.map(str::to_string),
    };
    write_json(path, &manifest)
}

#[derive(Debug, Deserialize)]
struct KeypointRow {
    frame: usize,
    joint: usize,
    u: f64,
    v: f64,
    confidence: f64,
}

pub fn read_body(path: &Path) -> Result<BodySequence, IoError> {
    let m: BodyManifest = read_json(path)?;
    let (n, nv, nj) = (m.frames, m.vertex_count, m.joint_count);
    let vertices = unblob(&resolve(path, &m.vertices), n * nv)?;
    let normals = unblob(&resolve(path, &m.normals), n * nv)?;
    let joints = unblob(&resolve(path, &m.joints), n * nj)?;
    if m.translations.len() != n || m.camera_translations.len() != n {
        return Err(IoError::parse(path, "translation count differs from frame count"));
    }
    let mut keypoints = vec![Vec::new(); n];
    if let Some(name) = &m.keypoints {
        let kp = resolve(path, name);
        let mut filled = vec![vec![None; nj]; n];
        let mut rdr = csv::Reader::from_path(&kp).map_err(|e| IoError::parse(&kp, e.to_string()))?;
        for row in rdr.deserialize::<KeypointRow>() {
            let r = row.map_err(|e| IoError::parse(&kp, e.to_string()))?;
            if r.frame >= n || r.joint >= nj {
                return Err(IoError::parse(&kp, format!("keypoint ({}, {}) out of range", r.frame, r.joint)));
            }
            filled[r.frame][r.joint] = Some(Keypoint {
                u: r.u,
                v: r.v,
                confidence: r.confidence,
            });
        }
        for (t, row) in filled.into_iter().enumerate() {
            if row.iter().all(Option::is_none) {
                continue;
            }
            keypoints[t] = row
                .into_iter()
                .enumerate()
                .map(|(j, k)| k.ok_or_else(|| IoError::parse(&kp, format!("frame {t} misses joint {j}"))))
                .collect::<Result<_, _>>()?;
        }
    }
    let frames = keypoints
        .into_iter()
        .enumerate()
        .map(|(t, keypoints)| BodyFrame {
            vertices: vertices[t * nv..(t + 1) * nv].to_vec(),
            normals: normals[t * nv..(t + 1) * nv].to_vec(),
            joints: joints[t * nj..(t + 1) * nj].to_vec(),
            keypoints,
            camera_translation: Vec3::from(m.camera_translations[t]),
        })
        .collect();
    BodySequence::new(
        frames,
        m.foot_joints,
        m.translations.into_iter().map(Vec3::from).collect(),
        m.scale,
        m.fps,
    )
    .map_err(|e| IoError::parse(path, e.to_string()))
}

/// One camera on disk; images are referenced relative to the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    /// Row-major 3×3.
    pub intrinsics: [[f64; 3]; 3],
    /// Row-major 3×3 world-to-camera rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub depth: Option<String>,
    #[serde(default)]
    pub mask: Option<String>,
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|r| [m[(r, 0)], m[(r, 1)], m[(r, 2)]])
}

fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    cameras: Vec<CameraRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<String>,
}

/// Writes camera parameters to `path` and any depth / mask images to
/// `<stem>.depth.NNNN.pfm` and `<stem>.mask.NNNN.pgm`.
pub fn write_cameras(path: &Path, frames: &[CameraFrame], run: Option<&str>) -> Result<(), IoError> {
    let mut cameras = Vec::with_capacity(frames.len());
    for (t, f) in frames.iter().enumerate() {
        let depth = match &f.depth {
            Some(d) => {
                let (p, name) = sibling(path, &format!("depth.{t:04}.pfm"));
                write_pfm(&p, d)?;
                Some(name)
            }
            None => None,
        };
        let mask = match &f.mask {
            Some(m) => {
                let (p, name) = sibling(path, &format!("mask.{t:04}.pgm"));
                write_pgm(&p, m)?;
                Some(name)
            }
            None => None,
        };
        cameras.push(CameraRecord {
            intrinsics: rows(&f.intrinsics),
            rotation: rows(&f.rotation),
            translation: [f.translation.x, f.translation.y, f.translation.z],
            width: f.width,
            height: f.height,
            depth,
            mask,
        });
    }
    write_json(
        path,
        &CameraFile {
            cameras,
            run: run.map(str::to_string),
        },
    )
}

pub fn read_cameras(path: &Path) -> Result<Vec<CameraFrame>, IoError> {
    let file: CameraFile = read_json(path)?;
    file.cameras
        .iter()
        .enumerate()
        .map(|(t, c)| {
            let bad = |e: String| IoError::parse(path, format!("camera {t}: {e}"));
            let mut f = CameraFrame::new(
                from_rows(&c.intrinsics),
                from_rows(&c.rotation),
                Vec3::from(c.translation),
                c.width,
                c.height,
            )
            .map_err(|e| bad(e.to_string()))?;
            if let Some(d) = &c.depth {
                f = f.with_depth(read_pfm(&resolve(path, d))?).map_err(|e| bad(e.to_string()))?;
            }
            if let Some(m) = &c.mask {
                f = f.with_mask(read_pgm(&resolve(path, m))?).map_err(|e| bad(e.to_string()))?;
            }
            Ok(f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};

    #[test]
    fn body_and_cameras_round_trip() {
        let spec = SynthSpec {
            frames: 4,
            keypoint_noise_px: 0.7,
            ..SynthSpec::default()
        };
        let mut scene = generate(&spec).unwrap();
        scene.body.translations[2] = Vec3::new(0.1, 1.0 / 3.0, -0.2);
        scene.body.scale = 1.2345;
        let dir = tempfile::tempdir().unwrap();
        let bp = dir.path().join("body.json");
        write_body(&bp, &scene.body, Some("abc")).unwrap();
        assert_eq!(read_body(&bp).unwrap(), scene.body);

        let cp = dir.path().join("cameras.json");
        write_cameras(&cp, &scene.frames, None).unwrap();
        assert_eq!(read_cameras(&cp).unwrap(), scene.frames);
    }
}
