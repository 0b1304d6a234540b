//! Affine (3D) and dense-flow (2D) resampling.
//!
//! Coordinates are voxel-centred with the origin at voxel `(0, 0, 0)`.
//! Samples that fall outside the grid read 0.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::{LabelMask, Slice, Volume};

/// Threshold applied to warped masks to bring them back to {0, 1}.
pub const MASK_THRESHOLD: f32 = 0.1;

const SINGULAR_EPS: f64 = 1e-12;

/// 3x4 row-major affine matrix mapping an output voxel coordinate
/// `(x, y, z, 1)` to the input coordinate it samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    m: [f64; 12],
}

impl AffineTransform {
    /// Validates invertibility of the linear block.
    pub fn new(m: [f64; 12]) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite affine entry".into()));
        }
        let t = Self { m };
        let det = t.determinant();
        if det.abs() < SINGULAR_EPS {
            return Err(Error::SingularTransform(det));
        }
        Ok(t)
    }

    /// Builds without checking invertibility; used inside optimizers where
    /// intermediate iterates are not required to be valid transforms.
    pub(crate) fn from_raw(m: [f64; 12]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        Self {
            m: [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        }
    }

    /// Output voxel `p` samples input voxel `p + d`.
    pub fn translation(d: [f64; 3]) -> Self {
        let mut t = Self::identity();
        t.m[3] = d[0];
        t.m[7] = d[1];
        t.m[11] = d[2];
        t
    }

    /// Linear map `lin` (row-major 3x3) applied about `center`:
    /// `p -> lin (p - center) + center`.
    pub fn linear_about(lin: [[f64; 3]; 3], center: [f64; 3]) -> Self {
        let mut m = [0.0; 12];
        for r in 0..3 {
            let mut shift = center[r];
            for c in 0..3 {
                m[r * 4 + c] = lin[r][c];
                shift -= lin[r][c] * center[c];
            }
            m[r * 4 + 3] = shift;
        }
        Self { m }
    }

    /// Transform that rotates image content by `degrees` about the z axis
    /// through `center`, counter-clockwise in (x, y) coordinates.
    pub fn rotate_content_z(degrees: f64, center: [f64; 3]) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        // sampling map is the inverse rotation
        Self::linear_about([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]], center)
    }

    /// Geometric centre of a grid with the given dims.
    pub fn grid_center(dims: [usize; 3]) -> [f64; 3] {
        dims.map(|d| (d as f64 - 1.0) / 2.0)
    }

    pub fn matrix(&self) -> &[f64; 12] {
        &self.m
    }

    #[inline]
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3],
            m[4] * p[0] + m[5] * p[1] + m[6] * p[2] + m[7],
            m[8] * p[0] + m[9] * p[1] + m[10] * p[2] + m[11],
        ]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0] * (m[5] * m[10] - m[6] * m[9]) - m[1] * (m[4] * m[10] - m[6] * m[8])
            + m[2] * (m[4] * m[9] - m[5] * m[8])
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det.abs() < SINGULAR_EPS {
            return Err(Error::SingularTransform(det));
        }
        let m = &self.m;
        let a = [[m[0], m[1], m[2]], [m[4], m[5], m[6]], [m[8], m[9], m[10]]];
        let mut inv = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                inv[r][c] = (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) / det;
            }
        }
        let t = [m[3], m[7], m[11]];
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 4 + c] = inv[r][c];
            }
            out[r * 4 + 3] = -(inv[r][0] * t[0] + inv[r][1] * t[1] + inv[r][2] * t[2]);
        }
        Ok(Self { m: out })
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &AffineTransform) -> Self {
        let a = &self.m;
        let b = &other.m;
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                let mut s = if c == 3 { a[r * 4 + 3] } else { 0.0 };
                for k in 0..3 {
                    s += a[r * 4 + k] * b[k * 4 + c];
                }
                out[r * 4 + c] = s;
            }
        }
        Self { m: out }
    }

    pub fn max_abs_diff(&self, other: &AffineTransform) -> f64 {
        self.m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-pixel 2D displacement in pixels; `u` is horizontal (x), `v` vertical (y).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    dims: [usize; 2],
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn new(dims: [usize; 2], u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = dims[0] * dims[1];
        if n == 0 {
            return Err(Error::InvalidDims(format!("{dims:?} has a zero axis")));
        }
        if u.len() != n || v.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: u.len().max(v.len()),
            });
        }
        if let Some(index) = u.iter().chain(&v).position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dims, u, v })
    }

    pub fn zeros(dims: [usize; 2]) -> Self {
        let n = dims[0] * dims[1];
        Self {
            dims,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn uniform(dims: [usize; 2], u: f64, v: f64) -> Self {
        let n = dims[0] * dims[1];
        Self {
            dims,
            u: vec![u; n],
            v: vec![v; n],
        }
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub(crate) fn from_parts_unchecked(dims: [usize; 2], u: Vec<f64>, v: Vec<f64>) -> Self {
        Self { dims, u, v }
    }

    pub(crate) fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.u, self.v)
    }

    /// Displacement magnitude per pixel.
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.u.iter().zip(&self.v).map(|(a, b)| a.hypot(*b))
    }
}

/// Trilinear sample with zero padding; returns the value and its gradient
/// with respect to the sample position.
#[inline]
pub(crate) fn trilinear_grad(v: &Volume, q: [f64; 3]) -> (f64, [f64; 3]) {
    let x0 = q[0].floor();
    let y0 = q[1].floor();
    let z0 = q[2].floor();
    let fx = q[0] - x0;
    let fy = q[1] - y0;
    let fz = q[2] - z0;
    let (xi, yi, zi) = (x0 as isize, y0 as isize, z0 as isize);
    let c = |dx: isize, dy: isize, dz: isize| v.get_or_zero(xi + dx, yi + dy, zi + dz) as f64;
    let c000 = c(0, 0, 0);
    let c100 = c(1, 0, 0);
    let c010 = c(0, 1, 0);
    let c110 = c(1, 1, 0);
    let c001 = c(0, 0, 1);
    let c101 = c(1, 0, 1);
    let c011 = c(0, 1, 1);
    let c111 = c(1, 1, 1);
    let (gx, gy, gz) = (1.0 - fx, 1.0 - fy, 1.0 - fz);
    let value = gz * (gy * (gx * c000 + fx * c100) + fy * (gx * c010 + fx * c110))
        + fz * (gy * (gx * c001 + fx * c101) + fy * (gx * c011 + fx * c111));
    let dx = gz * (gy * (c100 - c000) + fy * (c110 - c010))
        + fz * (gy * (c101 - c001) + fy * (c111 - c011));
    let dy = gz * (gx * (c010 - c000) + fx * (c110 - c100))
        + fz * (gx * (c011 - c001) + fx * (c111 - c101));
    let dz = gy * (gx * (c001 - c000) + fx * (c101 - c100))
        + fy * (gx * (c011 - c010) + fx * (c111 - c110));
    (value, [dx, dy, dz])
}

#[inline]
pub(crate) fn trilinear(v: &Volume, q: [f64; 3]) -> f64 {
    let x0 = q[0].floor();
    let y0 = q[1].floor();
    let z0 = q[2].floor();
    let (fx, fy, fz) = (q[0] - x0, q[1] - y0, q[2] - z0);
    let [nx, ny, nz] = v.dims();
    let (xi, yi, zi) = (x0 as isize, y0 as isize, z0 as isize);
    if xi < -1 || yi < -1 || zi < -1 || xi >= nx as isize || yi >= ny as isize || zi >= nz as isize
    {
        return 0.0;
    }
    let mut acc = 0.0;
    for (dz, wz) in [(0, 1.0 - fz), (1, fz)] {
        if wz == 0.0 {
            continue;
        }
        for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
            if wy == 0.0 {
                continue;
            }
            for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
                if wx == 0.0 {
                    continue;
                }
                acc += wz * wy * wx * v.get_or_zero(xi + dx, yi + dy, zi + dz) as f64;
            }
        }
    }
    acc
}

/// Warped values in f64, x-fastest.
pub(crate) fn warp_affine_values(m: &Volume, t: &AffineTransform) -> Vec<f64> {
    let [nx, ny, nz] = m.dims();
    let mut out = vec![0.0f64; nx * ny * nz];
    out.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(z, plane)| {
            for y in 0..ny {
                for x in 0..nx {
                    let q = t.apply([x as f64, y as f64, z as f64]);
                    plane[x + nx * y] = trilinear(m, q);
                }
            }
        });
    out
}

/// Output voxel `p` takes the trilinear sample of `m` at `t · p`.
pub fn warp_affine(m: &Volume, t: &AffineTransform) -> Result<Volume> {
    let det = t.determinant();
    if det.abs() < SINGULAR_EPS {
        return Err(Error::SingularTransform(det));
    }
    let data = warp_affine_values(m, t).into_iter().map(|x| x as f32).collect();
    Volume::new(m.dims(), m.spacing(), data)
}

#[inline]
fn pixel_or_zero(data: &[f32], dims: [usize; 2], x: isize, y: isize) -> f64 {
    if x < 0 || y < 0 || x as usize >= dims[0] || y as usize >= dims[1] {
        0.0
    } else {
        data[x as usize + dims[0] * y as usize] as f64
    }
}

/// Bilinear sample with zero padding plus its spatial gradient.
#[inline]
pub(crate) fn bilinear_grad(data: &[f32], dims: [usize; 2], x: f64, y: f64) -> (f64, f64, f64) {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as isize, y0 as isize);
    let c00 = pixel_or_zero(data, dims, xi, yi);
    let c10 = pixel_or_zero(data, dims, xi + 1, yi);
    let c01 = pixel_or_zero(data, dims, xi, yi + 1);
    let c11 = pixel_or_zero(data, dims, xi + 1, yi + 1);
    let (gx, gy) = (1.0 - fx, 1.0 - fy);
    let value = gy * (gx * c00 + fx * c10) + fy * (gx * c01 + fx * c11);
    let dx = gy * (c10 - c00) + fy * (c11 - c01);
    let dy = gx * (c01 - c00) + fx * (c11 - c10);
    (value, dx, dy)
}

/// Flow-warped slice values in f64.
pub(crate) fn warp_flow_values(m: &Slice, f: &FlowField) -> Vec<f64> {
    let [nx, ny] = m.dims();
    let mut out = Vec::with_capacity(nx * ny);
    for y in 0..ny {
        for x in 0..nx {
            let i = x + nx * y;
            out.push(bilinear_grad(m.data(), m.dims(), x as f64 + f.u[i], y as f64 + f.v[i]).0);
        }
    }
    out
}

/// `out(x, y) = m(x + u, y + v)` with bilinear interpolation.
pub fn warp_flow(m: &Slice, f: &FlowField) -> Result<Slice> {
    if m.dims() != f.dims() {
        return Err(Error::DimsMismatch(format!(
            "slice {:?} vs flow {:?}",
            m.dims(),
            f.dims()
        )));
    }
    let data = warp_flow_values(m, f).into_iter().map(|x| x as f32).collect();
    let out = Slice::new(m.dims(), data)?;
    Ok(match m.parent_z() {
        Some(z) => out.with_parent(z),
        None => out,
    })
}

/// Warps every axial slice of `v` by its own flow field.
pub fn warp_volume_slices(v: &Volume, flows: &[FlowField]) -> Result<Volume> {
    let [nx, ny, nz] = v.dims();
    if flows.len() != nz {
        return Err(Error::DimsMismatch(format!(
            "{} flow fields for {nz} slices",
            flows.len()
        )));
    }
    let slices = (0..nz)
        .into_par_iter()
        .map(|z| {
            if flows[z].dims() != [nx, ny] {
                return Err(Error::DimsMismatch(format!(
                    "flow {z} has dims {:?}, slices are {:?}",
                    flows[z].dims(),
                    [nx, ny]
                )));
            }
            warp_flow(&v.slice(z), &flows[z])
        })
        .collect::<Result<Vec<_>>>()?;
    Volume::from_slices(&slices, v.spacing())
}

/// How a mask is moved: one 3D affine, or a stack of per-slice flows.
#[derive(Debug, Clone, Copy)]
pub enum MaskWarp<'a> {
    Affine(&'a AffineTransform),
    Flows(&'a [FlowField]),
}

/// Warps a mask as a float volume and re-binarizes at [`MASK_THRESHOLD`].
pub fn warp_mask(mask: &LabelMask, warp: MaskWarp<'_>) -> Result<LabelMask> {
    let as_float = mask.to_volume();
    let warped = match warp {
        MaskWarp::Affine(t) => warp_affine(&as_float, t)?,
        MaskWarp::Flows(flows) => warp_volume_slices(&as_float, flows)?,
    };
    Ok(LabelMask::from_threshold(&warped, MASK_THRESHOLD))
}
