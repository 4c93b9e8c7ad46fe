use std::io::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{read_bytes, IoError};
use crate::metrics::JointTrajectory;
use crate::optimizer::IterationRecord;
use crate::Vec3;

fn csv_err(path: &Path, e: impl std::fmt::Display) -> IoError {
    IoError::parse(path, e.to_string())
}

/// Opens a CSV writer whose first lines are `# key value` comments.
fn writer(path: &Path, comments: &[(&str, String)]) -> Result<csv::Writer<std::fs::File>, IoError> {
    let mut file = std::fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    for (k, v) in comments {
        writeln!(file, "# {k} {v}").map_err(|e| IoError::io(path, e))?;
    }
    Ok(csv::Writer::from_writer(file))
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes)
}

/// Value of a `# key value` comment line, if present.
fn comment_value(bytes: &[u8], key: &str) -> Option<String> {
    let text = std::str::from_utf8(bytes).ok()?;
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l[1..].trim().strip_prefix(key).map(|v| v.trim().to_string()))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Rows `frame,joint,x,y,z`; the frame rate travels as a comment.
pub fn write_trajectory(path: &Path, traj: &JointTrajectory, run: Option<&str>) -> Result<(), IoError> {
    let mut comments = vec![("fps", num(traj.fps))];
    if let Some(r) = run {
        comments.push(("run", r.to_string()));
    }
    let mut w = writer(path, &comments)?;
    let mut body = || -> Result<(), csv::Error> {
        w.write_record(["frame", "joint", "x", "y", "z"])?;
        for (t, frame) in traj.joints.iter().enumerate() {
            for (j, p) in frame.iter().enumerate() {
                w.write_record([t.to_string(), j.to_string(), num(p.x), num(p.y), num(p.z)])?;
            }
        }
        w.flush()?;
        Ok(())
    };
    body().map_err(|e| csv_err(path, e))
}

#[derive(Deserialize)]
struct JointRow {
    frame: usize,
    joint: usize,
    x: f64,
    y: f64,
    z: f64,
}

/// Reads a trajectory CSV. Rows may come in any order but every
/// `(frame, joint)` pair must appear exactly once. `default_fps` is used
/// when the file carries no frame-rate comment.
pub fn read_trajectory(path: &Path, default_fps: f64) -> Result<JointTrajectory, IoError> {
    let bytes = read_bytes(path)?;
    let fps = match comment_value(&bytes, "fps") {
        Some(v) => v.parse().map_err(|_| IoError::parse(path, "bad fps comment"))?,
        None => default_fps,
    };
    let mut rows = Vec::new();
    for r in reader(&bytes).deserialize::<JointRow>() {
        rows.push(r.map_err(|e| csv_err(path, e))?);
    }
    let frames = rows.iter().map(|r| r.frame + 1).max().unwrap_or(0);
    let joints = rows.iter().map(|r| r.joint + 1).max().unwrap_or(0);
    if rows.len() != frames * joints {
        return Err(IoError::parse(
            path,
            format!("{} rows do not form a {frames}×{joints} grid", rows.len()),
        ));
    }
    let mut grid = vec![vec![None; joints]; frames];
    for r in rows {
        let slot = &mut grid[r.frame][r.joint];
        if slot.is_some() {
            return Err(IoError::parse(path, format!("duplicate row ({}, {})", r.frame, r.joint)));
        }
        *slot = Some(Vec3::new(r.x, r.y, r.z));
    }
    let joints = grid
        .into_iter()
        .map(|f| f.into_iter().map(|p| p.expect("grid is full")).collect())
        .collect();
    JointTrajectory::new(joints, fps).map_err(|e| csv_err(path, e))
}

/// Rows `frame,x,y,z`.
pub fn write_human_points(path: &Path, points: &[Vec<Vec3>], run: Option<&str>) -> Result<(), IoError> {
    let comments: Vec<(&str, String)> = run.map(|r| ("run", r.to_string())).into_iter().collect();
    let mut w = writer(path, &comments)?;
    let mut body = || -> Result<(), csv::Error> {
        w.write_record(["frame", "x", "y", "z"])?;
        for (t, frame) in points.iter().enumerate() {
            for p in frame {
                w.write_record([t.to_string(), num(p.x), num(p.y), num(p.z)])?;
            }
        }
        w.flush()?;
        Ok(())
    };
    body().map_err(|e| csv_err(path, e))
}

#[derive(Deserialize)]
struct PointRow {
    frame: usize,
    x: f64,
    y: f64,
    z: f64,
}

/// Reads per-frame points into `frames` buckets; frames without rows stay
/// empty.
pub fn read_human_points(path: &Path, frames: usize) -> Result<Vec<Vec<Vec3>>, IoError> {
    let bytes = read_bytes(path)?;
    let mut out = vec![Vec::new(); frames];
    for r in reader(&bytes).deserialize::<PointRow>() {
        let r = r.map_err(|e| csv_err(path, e))?;
        let bucket = out
            .get_mut(r.frame)
            .ok_or_else(|| IoError::parse(path, format!("frame {} out of range", r.frame)))?;
        bucket.push(Vec3::new(r.x, r.y, r.z));
    }
    Ok(out)
}

/// One row per iteration with the total, every unweighted term and the
/// step bookkeeping.
pub fn write_loss_curve(path: &Path, iterations: &[IterationRecord], run: Option<&str>) -> Result<(), IoError> {
    let comments: Vec<(&str, String)> = run.map(|r| ("run", r.to_string())).into_iter().collect();
    let mut w = writer(path, &comments)?;
    let mut body = || -> Result<(), csv::Error> {
        w.write_record([
            "iteration",
            "total",
            "j2d",
            "chamfer",
            "contact",
            "penetration",
            "smoothness",
            "foot_snap",
            "gradient_norm",
            "step_scale",
            "backtracks",
            "scale",
        ])?;
        for r in iterations {
            let t = &r.terms;
            w.write_record([
                r.iteration.to_string(),
                num(r.total),
                num(t.j2d),
                num(t.chamfer),
                num(t.contact),
                num(t.penetration),
                num(t.smoothness),
                num(t.foot_snap),
                num(r.gradient_norm),
                num(r.step_scale),
                r.backtracks.to_string(),
                num(r.scale),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    body().map_err(|e| csv_err(path, e))
}
