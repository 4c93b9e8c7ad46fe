use std::path::Path;

use super::{read_bytes, write_bytes, IoError};
use crate::scene::TsdfVolume;
use crate::Vec3;

pub const TSDF_MAGIC: &[u8; 4] = b"TSDF";
const HEADER_LEN: usize = 4 + 3 * 8 + 8 + 3 * 4 + 8;

/// Layout (little endian): magic, origin `f64×3`, voxel size `f64`, dims
/// `u32×3`, truncation `f64`, then `f32` values and `f32` weights in
/// x-fastest node order.
pub fn write_tsdf(path: &Path, volume: &TsdfVolume) -> Result<(), IoError> {
    let n = volume.values().len();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
    out.extend_from_slice(TSDF_MAGIC);
    for v in volume.origin().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&volume.voxel_size().to_le_bytes());
    for d in volume.dims() {
        let d = u32::try_from(d).map_err(|_| IoError::parse(path, "grid too large"))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.extend_from_slice(&volume.truncation().to_le_bytes());
    for v in volume.values().iter().chain(volume.weights()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path, &out)
}

pub fn read_tsdf(path: &Path) -> Result<TsdfVolume, IoError> {
    let bytes = read_bytes(path)?;
    let err = |m: String| IoError::parse(path, m);
    if bytes.len() < HEADER_LEN || &bytes[..4] != TSDF_MAGIC {
        return Err(err("not a TSDF container".into()));
    }
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let origin = Vec3::new(f64_at(4), f64_at(12), f64_at(20));
    let voxel = f64_at(28);
    let dims = [u32_at(36) as usize, u32_at(40) as usize, u32_at(44) as usize];
    let trunc = f64_at(48);
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| err("grid size overflows".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * n {
        return Err(err(format!("expected {} data bytes, found {}", 8 * n, body.len())));
    }
    let floats: Vec<f32> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let (values, weights) = floats.split_at(n);
    TsdfVolume::from_parts(origin, voxel, dims, trunc, values.to_vec(), weights.to_vec())
        .map_err(|e| err(e.to_string()))
}
