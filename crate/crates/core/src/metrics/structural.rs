//! Structural-integrity metrics: volumes, proportional volumes and
//! surface-to-surface distance.

use crate::error::{Error, Result};
use crate::volume::LabelMask;

/// Physical volume in mm^3: voxel count times voxel size.
pub fn structure_volume(mask: &LabelMask) -> f64 {
    let [sx, sy, sz] = mask.spacing();
    sx * sy * sz * mask.count() as f64
}

/// `vol(s) / vol(b)`.
pub fn proportional_volume(s: &LabelMask, b: &LabelMask) -> Result<f64> {
    let vb = structure_volume(b);
    if vb <= 0.0 {
        return Err(Error::Empty("brain mask".into()));
    }
    Ok(structure_volume(s) / vb)
}

/// `PV_orig - PV_reg`; negative when the structure grew relative to the brain.
pub fn delta_pv(orig_s: &LabelMask, orig_b: &LabelMask, reg_s: &LabelMask, reg_b: &LabelMask) -> Result<f64> {
    Ok(proportional_volume(orig_s, orig_b)? - proportional_volume(reg_s, reg_b)?)
}

/// `vol_orig / vol_reg`: above 1 means the structure shrank.
pub fn volume_ratio(orig: &LabelMask, reg: &LabelMask) -> Result<f64> {
    let vr = structure_volume(reg);
    if vr <= 0.0 {
        return Err(Error::Empty("registered mask".into()));
    }
    Ok(structure_volume(orig) / vr)
}

/// Surface voxels: foreground voxels with at least one 6-neighbour that is
/// background or outside the grid (the mask minus its 6-connected erosion).
pub fn boundary(mask: &LabelMask) -> LabelMask {
    let [nx, ny, nz] = mask.dims();
    let inside = |x: isize, y: isize, z: isize| {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < nx
            && (y as usize) < ny
            && (z as usize) < nz
            && mask.get(x as usize, y as usize, z as usize)
    };
    LabelMask::from_fn(mask.dims(), mask.spacing(), |x, y, z| {
        if !mask.get(x, y, z) {
            return false;
        }
        let (x, y, z) = (x as isize, y as isize, z as isize);
        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
            .iter()
            .any(|&(dx, dy, dz)| !inside(x + dx, y + dy, z + dz))
    })
    .expect("same geometry as input")
}

/// One pass of the squared distance transform along a line of samples
/// spaced `step` apart (lower envelope of parabolas).
fn edt_line(f: &[f64], step: f64, out: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let pos = |q: usize| q as f64 * step;
    let mut v: Vec<usize> = Vec::with_capacity(sites.len());
    let mut bounds: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    for &q in &sites {
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    bounds.clear();
                    bounds.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = ((f[q] + pos(q) * pos(q)) - (f[p] + pos(p) * pos(p)))
                        / (2.0 * (pos(q) - pos(p)));
                    if s <= *bounds.last().unwrap() {
                        v.pop();
                        bounds.pop();
                        continue;
                    }
                    v.push(q);
                    bounds.push(s);
                    break;
                }
            }
        }
    }
    let mut k = 0;
    for (i, o) in out.iter_mut().enumerate() {
        let x = pos(i);
        while k + 1 < v.len() && bounds[k + 1] < x {
            k += 1;
        }
        let d = x - pos(v[k]);
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance (mm^2) from every voxel to the nearest
/// foreground voxel of `mask`. Separable exact transform.
pub fn squared_distance_transform(mask: &LabelMask) -> Vec<f64> {
    let dims = mask.dims();
    let spacing = mask.spacing();
    let mut d: Vec<f64> = mask
        .data()
        .iter()
        .map(|&v| if v != 0 { 0.0 } else { f64::INFINITY })
        .collect();
    let strides = [1, dims[0], dims[0] * dims[1]];
    for axis in 0..3 {
        let n = dims[axis];
        let (o1, o2) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut line = vec![0.0; n];
        let mut out = vec![0.0; n];
        for a in 0..dims[o1] {
            for b in 0..dims[o2] {
                let base = a * strides[o1] + b * strides[o2];
                for i in 0..n {
                    line[i] = d[base + i * strides[axis]];
                }
                edt_line(&line, spacing[axis], &mut out);
                for i in 0..n {
                    d[base + i * strides[axis]] = out[i];
                }
            }
        }
    }
    d
}

/// Mean over structure-surface voxels of the physical distance (mm) to the
/// nearest brain-surface voxel.
pub fn ssd(structure: &LabelMask, brain: &LabelMask) -> Result<f64> {
    if !structure.same_grid(brain) {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            structure.dims(),
            brain.dims()
        )));
    }
    let sb = boundary(structure);
    let bb = boundary(brain);
    if sb.count() == 0 || bb.count() == 0 {
        return Err(Error::Empty("structure or brain boundary".into()));
    }
    let dist = squared_distance_transform(&bb);
    let (sum, n) = sb
        .data()
        .iter()
        .zip(&dist)
        .filter(|(&m, _)| m != 0)
        .fold((0.0, 0usize), |(s, n), (_, &d)| (s + d.sqrt(), n + 1));
    Ok(sum / n as f64)
}

/// `(SSD_orig - SSD_reg) / SSD_orig`.
pub fn delta_ssd(orig_ssd: f64, reg_ssd: f64) -> Result<f64> {
    if orig_ssd == 0.0 || !orig_ssd.is_finite() {
        return Err(Error::Degenerate(format!("original SSD {orig_ssd}")));
    }
    Ok((orig_ssd - reg_ssd) / orig_ssd)
}
