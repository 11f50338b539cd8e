//! Binary PGM (P5) for rank-2 images; raw little-endian `f64` plus a JSON
//! sidecar for tensors of any rank.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::Grid;
use crate::error::{Error, Result};

/// Sidecar describing a raw tensor payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub order: String,
    /// Any additional metadata (e.g. basis scales and orders).
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl TensorHeader {
    pub fn for_shape(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            dtype: "f64".into(),
            order: "row-major".into(),
            extra: Map::new(),
        }
    }
}

/// Sidecar path for a tensor payload: the payload path with a `.json` extension.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    payload.with_extension("json")
}

pub fn write_tensor(path: &Path, grid: &Grid) -> Result<()> {
    write_tensor_with(path, grid, Map::new())
}

pub fn write_tensor_with(path: &Path, grid: &Grid, extra: Map<String, Value>) -> Result<()> {
    let mut header = TensorHeader::for_shape(grid.shape());
    header.extra = extra;
    let mut bytes = Vec::with_capacity(grid.len() * 8);
    for v in grid.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let mut json = serde_json::to_string_pretty(&header)?;
    json.push('\n');
    fs::write(&side, json).map_err(|e| Error::io(side, e))
}

pub fn read_tensor(path: &Path) -> Result<(Grid, TensorHeader)> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let header: TensorHeader = serde_json::from_str(&text).map_err(|e| Error::MalformedHeader {
        format: "tensor sidecar",
        path: side.clone(),
        reason: e.to_string(),
    })?;
    if header.dtype != "f64" {
        return Err(Error::MalformedHeader {
            format: "tensor sidecar",
            path: side,
            reason: format!("unsupported dtype `{}`", header.dtype),
        });
    }
    if header.order != "row-major" {
        return Err(Error::MalformedHeader {
            format: "tensor sidecar",
            path: side,
            reason: format!("unsupported order `{}`", header.order),
        });
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = header.shape.iter().product::<usize>() * 8;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let grid = Grid::new(&header.shape, data)?;
    Ok((grid, header))
}

/// Write a rank-2 image with values in `[0, 1]` (clamped) as 8- or 16-bit P5.
pub fn write_pgm(path: &Path, image: &Grid, maxval: u16) -> Result<()> {
    if image.rank() != 2 {
        return Err(Error::ShapeMismatch {
            context: "write_pgm",
            dim: "rank",
            expected: 2,
            actual: image.rank(),
        });
    }
    if maxval == 0 {
        return Err(Error::invalid("maxval", "must be >= 1"));
    }
    fs::write(path, encode_pgm(image, maxval)).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(image: &Grid, maxval: u16) -> Vec<u8> {
    let (h, w) = image.hw();
    let mut out = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    let m = f64::from(maxval);
    for &v in image.data() {
        let q = (v.clamp(0.0, 1.0) * m).round() as u16;
        if maxval < 256 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    out
}

/// Read a P5 image, scaling samples to `[0, 1]`. Returns the image and its maxval.
pub fn read_pgm(path: &Path) -> Result<(Grid, u16)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<(Grid, u16)> {
    let malformed = |reason: String| Error::MalformedHeader {
        format: "PGM",
        path: path.to_path_buf(),
        reason,
    };
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> Option<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = next_token(&mut pos).ok_or_else(|| malformed("empty file".into()))?;
    if magic != "P5" {
        return Err(malformed(format!("expected magic `P5`, found `{magic}`")));
    }
    let mut field = |name: &str| -> Result<usize> {
        let tok = next_token(&mut pos).ok_or_else(|| malformed(format!("missing {name}")))?;
        tok.parse::<usize>()
            .map_err(|_| malformed(format!("{name} `{tok}` is not a positive integer")))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed(format!("zero extent {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(format!("maxval {maxval} outside 1..=65535")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(malformed("missing whitespace after maxval".into()));
    }
    pos += 1;
    let bpp = if maxval < 256 { 1 } else { 2 };
    let expected = width * height * bpp;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            actual: raster.len(),
        });
    }
    let m = maxval as f64;
    let data = if bpp == 1 {
        raster[..expected].iter().map(|&b| f64::from(b) / m).collect()
    } else {
        raster[..expected]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / m)
            .collect()
    };
    Ok((Grid::new(&[height, width], data)?, maxval as u16))
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Read a `.pgm` image or a raw tensor (anything else), by extension.
pub fn io_read(path: &Path) -> Result<Grid> {
    if is_pgm(path) {
        Ok(read_pgm(path)?.0)
    } else {
        Ok(read_tensor(path)?.0)
    }
}

/// Write rank-2 grids to `.pgm` paths as 8-bit PGM, everything else as a raw tensor.
pub fn io_write(path: &Path, grid: &Grid) -> Result<()> {
    if is_pgm(path) {
        write_pgm(path, grid, 255)
    } else {
        write_tensor(path, grid)
    }
}
