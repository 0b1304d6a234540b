//! Registration objectives and their analytic gradients.
//!
//! * [`corr_loss_3d`] / [`corr_loss_2d`]: `1 - r`, with `r` the Pearson
//!   correlation between fixed and warped moving intensities.
//! * [`photometric_loss`]: mean Charbonnier penalty of the intensity residual.
//! * [`smoothness_loss`]: summed Charbonnier penalty of forward differences
//!   of both flow components, with differences past the last row/column
//!   taken as 0.
//! * [`total_loss`]: `gamma * photo + zeta * corr + lambda * smooth` for a
//!   flow-warped slice, with the gradient with respect to the flow.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::resample::{
    bilinear_grad, trilinear_grad, warp_affine_values, AffineTransform, FlowField,
};
use crate::volume::{Slice, Volume};

/// Weights and Charbonnier shape for the flow objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub gamma: f64,
    pub zeta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            zeta: 1.0,
            lambda: 0.5,
            alpha: 0.2,
            epsilon: 0.001,
        }
    }
}

impl LossWeights {
    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(self.gamma) && ok(self.zeta) && ok(self.lambda)) {
            return Err(Error::InvalidParameter(format!(
                "loss weights must be non-negative: {self:?}"
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter("epsilon must be > 0".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} outside (0, 1]",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Charbonnier penalty `(x^2 + eps^2)^alpha`.
#[inline]
pub fn charbonnier(x: f64, alpha: f64, epsilon: f64) -> f64 {
    (x * x + epsilon * epsilon).powf(alpha)
}

/// Derivative of [`charbonnier`] with respect to `x`.
#[inline]
pub fn charbonnier_grad(x: f64, alpha: f64, epsilon: f64) -> f64 {
    2.0 * alpha * x * (x * x + epsilon * epsilon).powf(alpha - 1.0)
}

/// Centred second moments of a pair of equally long signals.
struct PairStats {
    mean_a: f64,
    mean_b: f64,
    saa: f64,
    sbb: f64,
    sab: f64,
}

fn pair_stats(a: &[f64], b: &[f64]) -> PairStats {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (da, db) = (x - mean_a, y - mean_b);
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    PairStats {
        mean_a,
        mean_b,
        saa,
        sbb,
        sab,
    }
}

fn is_degenerate(sum_sq: f64, n: usize) -> bool {
    !(sum_sq > 1e-24 * n as f64)
}

/// Pearson correlation of two signals, `None` when either has zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let s = pair_stats(a, b);
    if is_degenerate(s.saa, a.len()) || is_degenerate(s.sbb, b.len()) {
        return None;
    }
    Some((s.sab / (s.saa.sqrt() * s.sbb.sqrt())).clamp(-1.0, 1.0))
}

/// `1 - r(fixed, warped)` and its gradient with respect to each warped value.
/// `None` when either input is constant.
pub(crate) fn correlation_loss_grad(fixed: &[f64], warped: &[f64]) -> Option<(f64, Vec<f64>)> {
    let s = pair_stats(fixed, warped);
    if is_degenerate(s.saa, fixed.len()) || is_degenerate(s.sbb, warped.len()) {
        return None;
    }
    let denom = s.saa.sqrt() * s.sbb.sqrt();
    let r = s.sab / denom;
    let grad = fixed
        .iter()
        .zip(warped)
        .map(|(&f, &m)| -((f - s.mean_a) / denom - r * (m - s.mean_b) / s.sbb))
        .collect();
    Some((1.0 - r, grad))
}

fn widen(data: &[f32]) -> Vec<f64> {
    data.iter().map(|&x| x as f64).collect()
}

fn correlation_loss(fixed: &[f64], warped: &[f64]) -> Result<f64> {
    pearson(fixed, warped)
        .map(|r| 1.0 - r)
        .ok_or_else(|| Error::Degenerate("correlation of a constant image".into()))
}

/// Volume correlation loss `1 - r`, in [0, 2].
pub fn corr_loss_3d(f: &Volume, mw: &Volume) -> Result<f64> {
    if !f.same_grid(mw) {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            f.dims(),
            mw.dims()
        )));
    }
    correlation_loss(&widen(f.data()), &widen(mw.data()))
}

/// Slice correlation loss `1 - r`, in [0, 2].
pub fn corr_loss_2d(f: &Slice, mw: &Slice) -> Result<f64> {
    if f.dims() != mw.dims() {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            f.dims(),
            mw.dims()
        )));
    }
    correlation_loss(&widen(f.data()), &widen(mw.data()))
}

/// [`corr_loss_3d`] of `f` against `warp_affine(m, t)` together with the
/// gradient with respect to the 12 matrix entries (row-major).
pub fn corr_loss_3d_affine(f: &Volume, m: &Volume, t: &AffineTransform) -> Result<(f64, [f64; 12])> {
    if !f.same_grid(m) {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            f.dims(),
            m.dims()
        )));
    }
    let warped = warp_affine_values(m, t);
    let fixed = widen(f.data());
    let (loss, dl_dw) = correlation_loss_grad(&fixed, &warped)
        .ok_or_else(|| Error::Degenerate("constant volume under the affine warp".into()))?;
    let [nx, ny, _] = m.dims();
    let grad = dl_dw
        .par_chunks(nx * ny)
        .enumerate()
        .map(|(z, plane)| {
            let mut g = [0.0f64; 12];
            for y in 0..ny {
                for x in 0..nx {
                    let w = plane[x + nx * y];
                    if w == 0.0 {
                        continue;
                    }
                    let p = [x as f64, y as f64, z as f64, 1.0];
                    let (_, dq) = trilinear_grad(m, t.apply([p[0], p[1], p[2]]));
                    for r in 0..3 {
                        let s = w * dq[r];
                        for c in 0..4 {
                            g[r * 4 + c] += s * p[c];
                        }
                    }
                }
            }
            g
        })
        // per-plane partials summed in order keep the result deterministic
        .collect::<Vec<_>>()
        .into_iter()
        .fold([0.0; 12], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        });
    Ok((loss, grad))
}

/// Mean Charbonnier penalty of `f - mw`.
pub fn photometric_loss(f: &Slice, mw: &Slice, alpha: f64, epsilon: f64) -> Result<f64> {
    if f.dims() != mw.dims() {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            f.dims(),
            mw.dims()
        )));
    }
    let n = f.len() as f64;
    Ok(f.data()
        .iter()
        .zip(mw.data())
        .map(|(&a, &b)| charbonnier(a as f64 - b as f64, alpha, epsilon))
        .sum::<f64>()
        / n)
}

/// Iterates the four forward-difference pairs `(p, q)` of a grid, `q = None`
/// where the neighbour lies past the last row/column.
fn for_each_forward_pair(dims: [usize; 2], mut f: impl FnMut(usize, Option<usize>)) {
    let [nx, ny] = dims;
    for y in 0..ny {
        for x in 0..nx {
            let p = x + nx * y;
            f(p, (x + 1 < nx).then_some(p + 1));
            f(p, (y + 1 < ny).then_some(p + nx));
        }
    }
}

/// Summed Charbonnier penalty of the forward differences of `u` and `v`.
pub fn smoothness_loss(flow: &FlowField, alpha: f64, epsilon: f64) -> f64 {
    let mut total = 0.0;
    for comp in [flow.u(), flow.v()] {
        for_each_forward_pair(flow.dims(), |p, q| {
            let d = q.map_or(0.0, |q| comp[p] - comp[q]);
            total += charbonnier(d, alpha, epsilon);
        });
    }
    total
}

fn smoothness_grad_into(flow: &FlowField, alpha: f64, epsilon: f64, scale: f64, gu: &mut [f64], gv: &mut [f64]) {
    for (comp, g) in [(flow.u(), gu), (flow.v(), gv)] {
        for_each_forward_pair(flow.dims(), |p, q| {
            if let Some(q) = q {
                let d = scale * charbonnier_grad(comp[p] - comp[q], alpha, epsilon);
                g[p] += d;
                g[q] -= d;
            }
        });
    }
}

/// Gradient of [`smoothness_loss`] with respect to the flow.
pub fn smoothness_gradient(flow: &FlowField, alpha: f64, epsilon: f64) -> FlowField {
    let n = flow.len();
    let (mut gu, mut gv) = (vec![0.0; n], vec![0.0; n]);
    smoothness_grad_into(flow, alpha, epsilon, 1.0, &mut gu, &mut gv);
    FlowField::from_parts_unchecked(flow.dims(), gu, gv)
}

/// Value, components and flow gradient of the weighted flow objective.
#[derive(Debug, Clone)]
pub struct TotalLoss {
    pub value: f64,
    pub photometric: f64,
    pub correlation: f64,
    pub smoothness: f64,
    pub gradient: FlowField,
    /// Set when the warped (or fixed) slice was constant; the correlation
    /// term and its gradient were then taken as 0.
    pub degenerate_correlation: bool,
}

/// Evaluates `gamma * photo + zeta * corr + lambda * smooth` on
/// `warp_flow(m, flow)` against `f`.
pub fn total_loss(f: &Slice, m: &Slice, flow: &FlowField, w: &LossWeights) -> Result<TotalLoss> {
    if f.dims() != m.dims() || f.dims() != flow.dims() {
        return Err(Error::DimsMismatch(format!(
            "fixed {:?}, moving {:?}, flow {:?}",
            f.dims(),
            m.dims(),
            flow.dims()
        )));
    }
    let dims = f.dims();
    let n = f.len();
    let nf = n as f64;
    let (u, v) = (flow.u(), flow.v());

    let mut warped = Vec::with_capacity(n);
    let mut dx = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for y in 0..dims[1] {
        for x in 0..dims[0] {
            let i = x + dims[0] * y;
            let (val, gx, gy) = bilinear_grad(m.data(), dims, x as f64 + u[i], y as f64 + v[i]);
            warped.push(val);
            dx.push(gx);
            dy.push(gy);
        }
    }
    let fixed = widen(f.data());

    let mut dl_dw = vec![0.0f64; n];
    let mut photometric = 0.0;
    for i in 0..n {
        let r = fixed[i] - warped[i];
        photometric += charbonnier(r, w.alpha, w.epsilon);
        dl_dw[i] = -w.gamma * charbonnier_grad(r, w.alpha, w.epsilon) / nf;
    }
    photometric /= nf;

    let (correlation, degenerate_correlation) = match correlation_loss_grad(&fixed, &warped) {
        Some((c, g)) => {
            for (d, gi) in dl_dw.iter_mut().zip(g) {
                *d += w.zeta * gi;
            }
            (c, false)
        }
        None => {
            log::warn!("correlation term skipped: constant image under the warp");
            (0.0, true)
        }
    };

    let smoothness = smoothness_loss(flow, w.alpha, w.epsilon);

    let mut gu: Vec<f64> = dl_dw.iter().zip(&dx).map(|(a, b)| a * b).collect();
    let mut gv: Vec<f64> = dl_dw.iter().zip(&dy).map(|(a, b)| a * b).collect();
    if w.lambda != 0.0 {
        smoothness_grad_into(flow, w.alpha, w.epsilon, w.lambda, &mut gu, &mut gv);
    }

    Ok(TotalLoss {
        value: w.gamma * photometric + w.zeta * correlation + w.lambda * smoothness,
        photometric,
        correlation,
        smoothness,
        gradient: FlowField::from_parts_unchecked(dims, gu, gv),
        degenerate_correlation,
    })
}
