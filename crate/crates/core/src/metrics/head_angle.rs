//! In-plane head orientation from PCA of the head silhouette, refined by a
//! mirror-symmetry sweep.
//!
//! Angles are in degrees; positive means the head content is rotated
//! counter-clockwise in (x, y) voxel coordinates, the same sense as
//! [`AffineTransform::rotate_content_z`](crate::resample::AffineTransform::rotate_content_z).

use crate::error::{Error, Result};
use crate::resample::bilinear_grad;
use crate::volume::{intensity_bin, Volume, HISTOGRAM_BINS};

/// Step of the refinement sweep.
pub const SWEEP_STEP_DEG: f64 = 0.5;
/// Number of candidate slices kept for refinement.
pub const CANDIDATE_SLICES: usize = 3;

const ISOTROPY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SliceAngle {
    pub z: usize,
    /// Coarse PCA angle.
    pub coarse: f64,
    /// Coarse plus sweep correction.
    pub refined: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadAngle {
    pub degrees: f64,
    /// No slice had a well-defined principal axis; `degrees` is 0.
    pub degenerate: bool,
    pub candidates: Vec<SliceAngle>,
}

/// Otsu threshold over the 256-bin intensity histogram; returns the highest
/// background bin.
pub fn otsu_bin(v: &Volume) -> usize {
    let mut hist = [0u64; HISTOGRAM_BINS];
    for &x in v.data() {
        hist[intensity_bin(x)] += 1;
    }
    let total = v.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_t) = (-1.0, 0);
    for t in 0..HISTOGRAM_BINS - 1 {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_t = t;
        }
    }
    best_t
}

fn erode(mask: &[bool], nx: usize, ny: usize) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for y in 0..ny {
        for x in 0..nx {
            out[x + nx * y] = (-1isize..=1).all(|dy| {
                (-1isize..=1).all(|dx| {
                    let (xx, yy) = (x as isize + dx, y as isize + dy);
                    xx >= 0
                        && yy >= 0
                        && (xx as usize) < nx
                        && (yy as usize) < ny
                        && mask[xx as usize + nx * yy as usize]
                })
            });
        }
    }
    out
}

fn dilate(mask: &[bool], nx: usize, ny: usize) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for y in 0..ny {
        for x in 0..nx {
            out[x + nx * y] = (-1isize..=1).any(|dy| {
                (-1isize..=1).any(|dx| {
                    let (xx, yy) = (x as isize + dx, y as isize + dy);
                    xx >= 0
                        && yy >= 0
                        && (xx as usize) < nx
                        && (yy as usize) < ny
                        && mask[xx as usize + nx * yy as usize]
                })
            });
        }
    }
    out
}

/// Head silhouette of slice `z`: Otsu foreground, then a 3x3 opening and a
/// 3x3 closing.
fn head_mask(v: &Volume, z: usize, threshold_bin: usize) -> Vec<bool> {
    let [nx, ny, _] = v.dims();
    let s = v.slice(z);
    let fg: Vec<bool> = s.data().iter().map(|&x| intensity_bin(x) > threshold_bin).collect();
    let opened = dilate(&erode(&fg, nx, ny), nx, ny);
    erode(&dilate(&opened, nx, ny), nx, ny)
}

/// Principal-axis angle of the foreground pixels, `None` when the covariance
/// is isotropic or the mask has fewer than two pixels.
fn pca_angle(mask: &[bool], nx: usize) -> Option<(f64, [f64; 2])> {
    let pts: Vec<(f64, f64)> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| ((i % nx) as f64, (i / nx) as f64))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        sxx += (x - cx) * (x - cx);
        syy += (y - cy) * (y - cy);
        sxy += (x - cx) * (y - cy);
    }
    let gap = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    if gap <= ISOTROPY_TOL * (sxx + syy) {
        return None;
    }
    // orientation of the major axis measured from +x
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (dx, dy) = (phi.cos(), phi.sin());
    let (dx, dy) = if dy < 0.0 { (-dx, -dy) } else { (dx, dy) };
    // angle of the major axis from +y, positive counter-clockwise
    let mut theta = (-dx).atan2(dy).to_degrees();
    if theta > 90.0 {
        theta -= 180.0;
    } else if theta <= -90.0 {
        theta += 180.0;
    }
    Some((theta, [cx, cy]))
}

/// Zero-mean normalized cross-correlation between a slice and its mirror
/// image rotated so that a head tilted by `theta` would map onto itself.
fn mirror_score(data: &[f32], dims: [usize; 2], center: [f64; 2], theta_deg: f64) -> f64 {
    let (s, c) = (2.0 * theta_deg).to_radians().sin_cos();
    let n = data.len();
    let mut mirrored = Vec::with_capacity(n);
    for y in 0..dims[1] {
        for x in 0..dims[0] {
            // p -> c + R(2θ) Mx (p - c), Mx flips x
            let dx = -(x as f64 - center[0]);
            let dy = y as f64 - center[1];
            let sx = center[0] + c * dx - s * dy;
            let sy = center[1] + s * dx + c * dy;
            mirrored.push(bilinear_grad(data, dims, sx, sy).0);
        }
    }
    let orig: Vec<f64> = data.iter().map(|&x| x as f64).collect();
    let ma = orig.iter().sum::<f64>() / n as f64;
    let mb = mirrored.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in orig.iter().zip(&mirrored) {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return f64::NEG_INFINITY;
    }
    sab / (saa.sqrt() * sbb.sqrt())
}

/// Estimates the in-plane head rotation of `v`.
///
/// Every second axial slice from the middle slice upward gets a PCA angle;
/// the three with the smallest magnitude are refined by sweeping a
/// correction over `(-2|θ1|, 2|θ1|)` in 0.5° steps, maximizing the
/// mirror-symmetry correlation. The result is the median refined angle.
pub fn head_angle(v: &Volume) -> Result<HeadAngle> {
    let [nx, ny, nz] = v.dims();
    let threshold = otsu_bin(v);
    let mut coarse: Vec<(usize, f64, [f64; 2])> = Vec::new();
    let mut any_foreground = false;
    for z in (nz / 2..nz).step_by(2) {
        let mask = head_mask(v, z, threshold);
        if mask.iter().any(|&m| m) {
            any_foreground = true;
        }
        if let Some((theta, c)) = pca_angle(&mask, nx) {
            coarse.push((z, theta, c));
        }
    }
    if !any_foreground {
        return Err(Error::Empty("no head foreground above the middle slice".into()));
    }
    if coarse.is_empty() {
        log::warn!("head angle: isotropic silhouette on every candidate slice, reporting 0");
        return Ok(HeadAngle {
            degrees: 0.0,
            degenerate: true,
            candidates: Vec::new(),
        });
    }
    coarse.sort_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(a.0.cmp(&b.0)));
    coarse.truncate(CANDIDATE_SLICES);

    let mut candidates: Vec<SliceAngle> = coarse
        .into_iter()
        .map(|(z, theta1, center)| {
            let s = v.slice(z);
            let steps = (2.0 * theta1.abs() / SWEEP_STEP_DEG).floor() as i64;
            let (mut best_score, mut best_corr) = (f64::NEG_INFINITY, 0.0f64);
            for k in -steps..=steps {
                let corr = k as f64 * SWEEP_STEP_DEG;
                let score = mirror_score(s.data(), [nx, ny], center, theta1 + corr);
                if score > best_score || (score == best_score && corr.abs() < best_corr.abs()) {
                    best_score = score;
                    best_corr = corr;
                }
            }
            SliceAngle {
                z,
                coarse: theta1,
                refined: theta1 + best_corr,
            }
        })
        .collect();

    let mut refined: Vec<f64> = candidates.iter().map(|c| c.refined).collect();
    refined.sort_by(f64::total_cmp);
    let degrees = if refined.len() % 2 == 1 {
        refined[refined.len() / 2]
    } else {
        0.5 * (refined[refined.len() / 2 - 1] + refined[refined.len() / 2])
    };
    candidates.sort_by_key(|c| c.z);
    Ok(HeadAngle {
        degrees,
        degenerate: false,
        candidates,
    })
}
