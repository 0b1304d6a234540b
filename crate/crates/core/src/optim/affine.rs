//! 12-parameter affine registration by direct minimization of the volume
//! correlation loss.
//!
//! The optimizer works on a normalized copy of the matrix, expressed about
//! the grid centre with each axis scaled by its half extent, so one Adam
//! step moves every entry by a comparable amount. The returned transform is
//! always in voxel coordinates.

use crate::error::{Error, Result};
use crate::losses::corr_loss_3d_affine;
use crate::resample::AffineTransform;
use crate::volume::Volume;

use super::adam::{Adam, OptimizerConfig, StallMonitor};
use super::trace::LossTrace;

#[derive(Debug, Clone)]
pub struct AffineRegistration {
    pub transform: AffineTransform,
    pub loss: f64,
    pub trace: LossTrace,
}

/// Maps between normalized parameters and voxel-space matrices.
struct Normalization {
    center: [f64; 3],
    half: [f64; 3],
}

impl Normalization {
    fn new(dims: [usize; 3]) -> Self {
        Self {
            center: AffineTransform::grid_center(dims),
            half: dims.map(|d| ((d as f64 - 1.0) / 2.0).max(1.0)),
        }
    }

    fn identity_params() -> [f64; 12] {
        *AffineTransform::identity().matrix()
    }

    fn to_voxel(&self, b: &[f64; 12]) -> AffineTransform {
        let (c, h) = (self.center, self.half);
        let mut m = [0.0; 12];
        for r in 0..3 {
            let mut t = c[r] + h[r] * b[r * 4 + 3];
            for k in 0..3 {
                let a = h[r] * b[r * 4 + k] / h[k];
                m[r * 4 + k] = a;
                t -= a * c[k];
            }
            m[r * 4 + 3] = t;
        }
        AffineTransform::from_raw(m)
    }

    /// Chain rule from voxel-matrix gradient to normalized-parameter gradient.
    fn grad_to_params(&self, g: &[f64; 12]) -> [f64; 12] {
        let (c, h) = (self.center, self.half);
        let mut out = [0.0; 12];
        for r in 0..3 {
            let gt = g[r * 4 + 3];
            for k in 0..3 {
                out[r * 4 + k] = h[r] / h[k] * (g[r * 4 + k] - gt * c[k]);
            }
            out[r * 4 + 3] = gt * h[r];
        }
        out
    }
}

/// Aligns `m` to `f`: finds `A` minimizing `corr_loss_3d(f, warp_affine(m, A))`,
/// starting from the identity. Returns the best transform seen.
pub fn register_affine(m: &Volume, f: &Volume, cfg: &OptimizerConfig) -> Result<AffineRegistration> {
    cfg.validate()?;
    if !m.same_grid(f) {
        return Err(Error::DimsMismatch(format!(
            "moving {:?} vs fixed {:?}; resize first",
            m.dims(),
            f.dims()
        )));
    }
    let norm = Normalization::new(f.dims());
    let mut params = Normalization::identity_params();
    let mut adam = Adam::new(cfg, 12);
    let mut monitor = StallMonitor::default();
    let mut trace = LossTrace::default();
    let mut best = (f64::INFINITY, norm.to_voxel(&params));

    for iter in 0..cfg.max_iters {
        let t = norm.to_voxel(&params);
        let (loss, grad) = corr_loss_3d_affine(f, m, &t).map_err(|e| match e {
            Error::Degenerate(msg) if iter > 0 => {
                Error::Diverged(format!("affine iteration {iter}: {msg}"))
            }
            other => other,
        })?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged(format!(
                "affine iteration {iter}: loss {loss}"
            )));
        }
        trace.push(iter, 0, loss);
        if loss < best.0 {
            best = (loss, t);
        }
        if monitor.push(best.0, cfg.tol) {
            break;
        }
        adam.step(&mut params, &norm.grad_to_params(&grad));
    }

    let (loss, transform) = best;
    let transform = AffineTransform::new(*transform.matrix())?;
    Ok(AffineRegistration {
        transform,
        loss,
        trace,
    })
}
