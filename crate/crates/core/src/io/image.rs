use std::path::Path;

use super::{read_bytes, write_bytes, IoError};
use crate::raster::{BinaryImage, DepthMap};

/// Splits off `count` whitespace-separated header tokens, honouring `#`
/// comments, and returns them with the offset of the first data byte (one
/// whitespace byte after the last token).
fn header_tokens(bytes: &[u8], count: usize) -> Option<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return None;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    (i < bytes.len()).then_some((tokens, i + 1))
}

/// Single-channel little-endian PFM; rows are stored bottom to top.
pub fn write_pfm(path: &Path, depth: &DepthMap) -> Result<(), IoError> {
    let (w, h) = depth.size();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&depth.get(x, y).to_le_bytes());
        }
    }
    write_bytes(path, &out)
}

pub fn read_pfm(path: &Path) -> Result<DepthMap, IoError> {
    let bytes = read_bytes(path)?;
    let err = |m: &str| IoError::parse(path, m);
    let (tok, off) = header_tokens(&bytes, 4).ok_or_else(|| err("truncated PFM header"))?;
    if tok[0] != "Pf" {
        return Err(err("only single-channel PFM (Pf) is supported"));
    }
    let w: usize = tok[1].parse().map_err(|_| err("bad width"))?;
    let h: usize = tok[2].parse().map_err(|_| err("bad height"))?;
    let scale: f64 = tok[3].parse().map_err(|_| err("bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(err("bad scale"));
    }
    let little = scale < 0.0;
    let data = &bytes[off..];
    if data.len() < 4 * w * h {
        return Err(err("truncated PFM data"));
    }
    let mut out = vec![0f32; w * h];
    for (k, chunk) in data.chunks_exact(4).take(w * h).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (x, row) = (k % w, k / w);
        out[(h - 1 - row) * w + x] = v;
    }
    DepthMap::from_data(w, h, out).map_err(|e| IoError::parse(path, e.to_string()))
}

/// 8-bit binary PGM with set pixels written as 255.
pub fn write_pgm(path: &Path, mask: &BinaryImage) -> Result<(), IoError> {
    let (w, h) = mask.size();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    write_bytes(path, &out)
}

/// Reads an 8- or 16-bit binary PGM; every nonzero pixel is set.
pub fn read_pgm(path: &Path) -> Result<BinaryImage, IoError> {
    let bytes = read_bytes(path)?;
    let err = |m: &str| IoError::parse(path, m);
    let (tok, off) = header_tokens(&bytes, 4).ok_or_else(|| err("truncated PGM header"))?;
    if tok[0] != "P5" {
        return Err(err("only binary PGM (P5) is supported"));
    }
    let w: usize = tok[1].parse().map_err(|_| err("bad width"))?;
    let h: usize = tok[2].parse().map_err(|_| err("bad height"))?;
    let maxval: u32 = tok[3].parse().map_err(|_| err("bad maxval"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(err("bad maxval"));
    }
    let bpp = if maxval < 256 { 1 } else { 2 };
    let data = &bytes[off..];
    if data.len() < bpp * w * h {
        return Err(err("truncated PGM data"));
    }
    let bits = data
        .chunks_exact(bpp)
        .take(w * h)
        .map(|c| c.iter().any(|&b| b != 0))
        .collect();
    BinaryImage::from_bits(w, h, bits).map_err(|e| IoError::parse(path, e.to_string()))
}
