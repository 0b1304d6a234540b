//! On-disk format: a JSON sidecar header plus a raw little-endian payload.
//!
//! ```text
//! brain.json   {"dims":[nx,ny,nz],"spacing":[vx,vy,vz],"dtype":"f32","order":"x-fastest","normalize":false}
//! brain.vraw   nx*ny*nz values, x fastest
//! ```
//!
//! Masks use dtype `"u8"`. Flow fields are stored as an f32 volume with
//! dims `[nx, ny, 2]`: the u plane followed by the v plane.
//! Affine transforms are a JSON array of 12 numbers, row-major.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::{AffineTransform, FlowField};
use crate::volume::{LabelMask, Volume};

pub const HEADER_EXT: &str = "json";
pub const PAYLOAD_EXT: &str = "vraw";
const ORDER: &str = "x-fastest";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    U8,
}

impl Dtype {
    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::U8 => 1,
        }
    }
}

/// Sidecar header describing a `.vraw` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub dtype: Dtype,
    pub order: String,
    #[serde(default)]
    pub normalize: bool,
}

impl Header {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], dtype: Dtype) -> Self {
        Self {
            dims,
            spacing,
            dtype,
            order: ORDER.to_string(),
            normalize: false,
        }
    }

    fn payload_len(&self) -> usize {
        self.dims.iter().product::<usize>() * self.dtype.size()
    }
}

/// Header and payload paths for a volume path given with either extension
/// (or none).
pub fn paths_for(path: &Path) -> (PathBuf, PathBuf) {
    (
        path.with_extension(HEADER_EXT),
        path.with_extension(PAYLOAD_EXT),
    )
}

fn read_header(path: &Path) -> Result<Header> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&text).map_err(|e| Error::Header {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if header.order != ORDER {
        return Err(Error::Header {
            path: path.to_path_buf(),
            message: format!("unsupported order {:?}", header.order),
        });
    }
    Ok(header)
}

fn read_raw(path: &Path) -> Result<(Header, Vec<u8>)> {
    let (hp, pp) = paths_for(path);
    let header = read_header(&hp)?;
    let bytes = fs::read(&pp).map_err(|e| Error::io(&pp, e))?;
    if bytes.len() != header.payload_len() {
        return Err(Error::SizeMismatch {
            expected: header.payload_len(),
            actual: bytes.len(),
        });
    }
    Ok((header, bytes))
}

fn write_raw(path: &Path, header: &Header, bytes: &[u8]) -> Result<()> {
    let (hp, pp) = paths_for(path);
    if let Some(dir) = hp.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string(header).expect("header serializes");
    fs::write(&hp, text).map_err(|e| Error::io(&hp, e))?;
    fs::write(&pp, bytes).map_err(|e| Error::io(&pp, e))?;
    Ok(())
}

fn decode_f32(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

fn encode_f32(values: impl IntoIterator<Item = f32>) -> Vec<u8> {
    values.into_iter().flat_map(f32::to_le_bytes).collect()
}

/// Loads an f32 volume. When the header's `normalize` flag is set, values
/// are rescaled to [0, 1] by `(v - min) / (max - min)`.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let (header, bytes) = read_raw(path.as_ref())?;
    if header.dtype != Dtype::F32 {
        return Err(Error::Header {
            path: path.as_ref().to_path_buf(),
            message: "expected dtype f32".into(),
        });
    }
    let v = Volume::new(header.dims, header.spacing, decode_f32(&bytes))?;
    Ok(if header.normalize { v.normalized() } else { v })
}

pub fn save_volume(path: impl AsRef<Path>, v: &Volume) -> Result<()> {
    let header = Header::new(v.dims(), v.spacing(), Dtype::F32);
    write_raw(path.as_ref(), &header, &encode_f32(v.data().iter().copied()))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<LabelMask> {
    let (header, bytes) = read_raw(path.as_ref())?;
    if header.dtype != Dtype::U8 {
        return Err(Error::Header {
            path: path.as_ref().to_path_buf(),
            message: "expected dtype u8".into(),
        });
    }
    LabelMask::new(header.dims, header.spacing, bytes)
}

pub fn save_mask(path: impl AsRef<Path>, m: &LabelMask) -> Result<()> {
    let header = Header::new(m.dims(), m.spacing(), Dtype::U8);
    write_raw(path.as_ref(), &header, m.data())
}

/// Loads a flow field stored as a `[nx, ny, 2]` f32 volume.
pub fn load_flow(path: impl AsRef<Path>) -> Result<FlowField> {
    let v = load_volume(path)?;
    let [nx, ny, nc] = v.dims();
    if nc != 2 {
        return Err(Error::InvalidDims(format!(
            "flow payload needs 2 channels, found {nc}"
        )));
    }
    let n = nx * ny;
    let data = v.data();
    FlowField::new(
        [nx, ny],
        data[..n].iter().map(|&x| x as f64).collect(),
        data[n..].iter().map(|&x| x as f64).collect(),
    )
}

pub fn save_flow(path: impl AsRef<Path>, f: &FlowField) -> Result<()> {
    let [nx, ny] = f.dims();
    let header = Header::new([nx, ny, 2], [1.0; 3], Dtype::F32);
    let values = f.u().iter().chain(f.v()).map(|&x| x as f32);
    write_raw(path.as_ref(), &header, &encode_f32(values))
}

pub fn load_transform(path: impl AsRef<Path>) -> Result<AffineTransform> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: [f64; 12] = serde_json::from_str(&text).map_err(|e| Error::Header {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    AffineTransform::new(m)
}

pub fn save_transform(path: impl AsRef<Path>, t: &AffineTransform) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(t.matrix()).expect("array serializes");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
