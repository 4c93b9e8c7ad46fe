use std::fmt::Write as _;
use std::path::Path;

use super::{read_bytes, write_bytes, IoError};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlyData {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

/// Writes vertices (and normals) as `double` properties so values survive a
/// round trip exactly.
pub fn write_ply(path: &Path, data: &PlyData, format: PlyFormat) -> Result<(), IoError> {
    if let Some(n) = &data.normals {
        if n.len() != data.points.len() {
            return Err(IoError::parse(path, "normal count differs from point count"));
        }
    }
    let mut header = String::from("ply\n");
    header.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    for c in &data.comments {
        let _ = writeln!(header, "comment {}", c.replace('\n', " "));
    }
    let _ = writeln!(header, "element vertex {}", data.points.len());
    let names: &[&str] = if data.normals.is_some() {
        &["x", "y", "z", "nx", "ny", "nz"]
    } else {
        &["x", "y", "z"]
    };
    for n in names {
        let _ = writeln!(header, "property double {n}");
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    for (i, p) in data.points.iter().enumerate() {
        let mut row: Vec<f64> = p.iter().copied().collect();
        if let Some(n) = &data.normals {
            row.extend(n[i].iter());
        }
        match format {
            PlyFormat::Ascii => {
                let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
            PlyFormat::BinaryLittleEndian => {
                for v in row {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    write_bytes(path, &out)
}

/// Reads the vertex element of an ASCII or little-endian binary PLY file.
/// Extra vertex properties are ignored; normals are returned when all of
/// `nx`, `ny`, `nz` are present.
pub fn read_ply(path: &Path) -> Result<PlyData, IoError> {
    let bytes = read_bytes(path)?;
    let err = |m: String| IoError::parse(path, m);
    let marker = b"end_header\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| err("missing end_header".into()))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|e| err(e.to_string()))?;
    let body = &bytes[end + marker.len()..];

    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(err("not a PLY file".into()));
    }
    let mut format = None;
    let mut comments = Vec::new();
    // (name, count, properties)
    let mut elements: Vec<(String, usize, Vec<(String, Scalar)>)> = Vec::new();
    for line in lines {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                format = Some(match tok.next() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLittleEndian,
                    other => return Err(err(format!("unsupported format {other:?}"))),
                })
            }
            Some("comment") => comments.push(line.trim_start()["comment".len()..].trim().to_string()),
            Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| err("element without name".into()))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(format!("bad count for element {name}")))?;
                elements.push((name.to_string(), count, Vec::new()));
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| err("property before element".into()))?;
                let ty = tok.next().unwrap_or("");
                if ty == "list" {
                    if el.0 == "vertex" {
                        return Err(err("list properties on vertices are not supported".into()));
                    }
                    continue;
                }
                let scalar = Scalar::parse(ty).ok_or_else(|| err(format!("unknown type {ty}")))?;
                let name = tok.next().ok_or_else(|| err("property without name".into()))?;
                el.2.push((name.to_string(), scalar));
            }
            Some(other) => return Err(err(format!("unexpected header keyword {other}"))),
        }
    }
    let format = format.ok_or_else(|| err("missing format line".into()))?;
    let Some(vi) = elements.iter().position(|e| e.0 == "vertex") else {
        return Err(err("no vertex element".into()));
    };
    if vi != 0 && format == PlyFormat::BinaryLittleEndian {
        return Err(err("vertex element must come first in binary files".into()));
    }
    let (_, count, props) = &elements[vi];
    let find = |n: &str| props.iter().position(|p| p.0 == n);
    let (xi, yi, zi) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(err("vertex element lacks x/y/z".into())),
    };
    let normal_idx = match (find("nx"), find("ny"), find("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        _ => None,
    };

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(*count);
    match format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(body).map_err(|e| err(e.to_string()))?;
            let mut it = text.lines().filter(|l| !l.trim().is_empty());
            for (ei, (_, n, p)) in elements.iter().enumerate() {
                for r in 0..*n {
                    let line = it.next().ok_or_else(|| err("truncated body".into()))?;
                    if ei != vi {
                        continue;
                    }
                    let row: Vec<f64> = line
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(format!("vertex {r}: {e}")))?;
                    if row.len() < p.len() {
                        return Err(err(format!("vertex {r}: {} values for {} properties", row.len(), p.len())));
                    }
                    rows.push(row);
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let stride: usize = props.iter().map(|p| p.1.size()).sum();
            if body.len() < stride * count {
                return Err(err("truncated body".into()));
            }
            for r in 0..*count {
                let rec = &body[r * stride..(r + 1) * stride];
                let mut off = 0;
                let mut row = Vec::with_capacity(props.len());
                for (_, s) in props {
                    row.push(s.read_le(&rec[off..]));
                    off += s.size();
                }
                rows.push(row);
            }
        }
    }
    let points = rows.iter().map(|r| Vec3::new(r[xi], r[yi], r[zi])).collect();
    let normals = normal_idx.map(|(a, b, c)| rows.iter().map(|r| Vec3::new(r[a], r[b], r[c])).collect());
    Ok(PlyData {
        points,
        normals,
        comments,
    })
}
