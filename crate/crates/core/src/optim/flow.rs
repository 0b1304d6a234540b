//! Coarse-to-fine variational flow registration of one slice pair.
//!
//! Each pyramid level runs two Adam phases on the same objective. The first
//! moves one displacement shared by all pixels; the smoothness term is
//! invariant to it, so only the data terms act. The second frees every
//! pixel with a small step. A plain per-pixel start stalls at once: the
//! first uneven step makes neighbouring vectors differ by more than the
//! Charbonnier epsilon, and the summed smoothness term outweighs any gain
//! in the pixel-averaged photometric term.

use crate::error::{Error, Result};
use crate::losses::{total_loss, LossWeights};
use crate::resample::FlowField;
use crate::volume::Slice;

use super::adam::{Adam, OptimizerConfig, StallMonitor};
use super::pyramid::{downsample, upsample_flow, Pyramid};
use super::trace::LossTrace;

#[derive(Debug, Clone)]
pub struct FlowRegistration {
    /// Flow at the finest pyramid level.
    pub flow: FlowField,
    /// Best total loss reached at each level, coarse first.
    pub level_losses: Vec<f64>,
    pub trace: LossTrace,
    /// Iterations where the correlation term was skipped on a constant image.
    pub degenerate_iterations: usize,
}

/// Step of the per-pixel phase relative to `OptimizerConfig::lr` (1e-4 px
/// with the flow preset). Keeps per-iteration changes between neighbours
/// below the Charbonnier epsilon, where the smoothness term is steepest.
pub const RESIDUAL_LR_SCALE: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// One displacement shared by every pixel, added to the start flow.
    Shift,
    /// Every pixel free.
    Residual,
}

struct LevelProblem<'a> {
    f: &'a Slice,
    m: &'a Slice,
    w: &'a LossWeights,
    level: usize,
    size: usize,
}

impl LevelProblem<'_> {
    /// Adam on one parameterization of the level's flow; returns the best
    /// loss and flow seen, the start included.
    fn descend(
        &self,
        phase: Phase,
        start: FlowField,
        cfg: &OptimizerConfig,
        trace: &mut LossTrace,
        iteration: &mut usize,
        degenerate_iterations: &mut usize,
    ) -> Result<(f64, FlowField)> {
        let (level, size) = (self.level, self.size);
        let dims = [size, size];
        let n = size * size;
        let (u0, v0) = start.into_parts();
        let mut params: Vec<f64> = match phase {
            Phase::Shift => vec![0.0; 2],
            Phase::Residual => u0.iter().chain(&v0).copied().collect(),
        };
        let step_cfg = match phase {
            Phase::Shift => *cfg,
            Phase::Residual => OptimizerConfig {
                lr: cfg.lr * RESIDUAL_LR_SCALE,
                ..*cfg
            },
        };
        let mut adam = Adam::new(&step_cfg, params.len());
        let mut monitor = StallMonitor::default();
        let current = |p: &[f64]| match phase {
            Phase::Shift => FlowField::from_parts_unchecked(
                dims,
                u0.iter().map(|u| u + p[0]).collect(),
                v0.iter().map(|v| v + p[1]).collect(),
            ),
            Phase::Residual => FlowField::from_parts_unchecked(dims, p[..n].to_vec(), p[n..].to_vec()),
        };
        let mut best: Option<(f64, FlowField)> = None;
        let mut grad = vec![0.0; params.len()];

        for _ in 0..cfg.max_iters {
            let flow = current(&params);
            let t = total_loss(self.f, self.m, &flow, self.w)?;
            let it = *iteration;
            *iteration += 1;
            if !t.value.is_finite() || t.gradient.u().iter().chain(t.gradient.v()).any(|g| !g.is_finite()) {
                return Err(Error::Diverged(format!(
                    "flow level {level} ({size}x{size}) iteration {it}: loss {}",
                    t.value
                )));
            }
            *degenerate_iterations += t.degenerate_correlation as usize;
            trace.push(it, level, t.value);
            if best.as_ref().is_none_or(|b| t.value < b.0) {
                best = Some((t.value, flow));
            }
            let best_loss = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if monitor.push(best_loss, cfg.tol) {
                break;
            }
            match phase {
                Phase::Shift => {
                    grad[0] = t.gradient.u().iter().sum();
                    grad[1] = t.gradient.v().iter().sum();
                }
                Phase::Residual => {
                    grad[..n].copy_from_slice(t.gradient.u());
                    grad[n..].copy_from_slice(t.gradient.v());
                }
            }
            adam.step(&mut params, &grad);
        }
        Ok(best.expect("max_iters >= 1"))
    }
}

/// Mean per-pixel displacement magnitude `sqrt(u^2 + v^2)`.
pub fn average_flow_magnitude(flow: &FlowField) -> f64 {
    flow.magnitudes().sum::<f64>() / flow.len() as f64
}

/// Minimizes the weighted flow objective level by level. Each level starts
/// from the upsampled, displacement-rescaled best flow of the level below.
pub fn register_flow(
    m: &Slice,
    f: &Slice,
    w: &LossWeights,
    pyr: &Pyramid,
    cfg: &OptimizerConfig,
) -> Result<FlowRegistration> {
    w.validate()?;
    cfg.validate()?;
    let dims = f.dims();
    if m.dims() != dims {
        return Err(Error::DimsMismatch(format!(
            "moving {:?} vs fixed {:?}",
            m.dims(),
            dims
        )));
    }
    if dims[0] != dims[1] || pyr.finest() != dims[0] {
        return Err(Error::InvalidDims(format!(
            "slices {dims:?} must be square and match the finest pyramid level {}",
            pyr.finest()
        )));
    }
    if m.is_constant() || f.is_constant() {
        return Err(Error::Degenerate("constant slice at the finest level".into()));
    }

    let mut trace = LossTrace::default();
    let mut level_losses = Vec::with_capacity(pyr.levels().len());
    let mut degenerate_iterations = 0;
    let mut flow: Option<FlowField> = None;

    for (level, &size) in pyr.levels().iter().enumerate() {
        let ldims = [size, size];
        let fl = downsample(f, ldims)?;
        let ml = downsample(m, ldims)?;
        let init = match flow.take() {
            Some(prev) => upsample_flow(&prev, ldims),
            None => FlowField::zeros(ldims),
        };
        let problem = LevelProblem { f: &fl, m: &ml, w, level, size };
        let mut iteration = 0;
        let (_, shifted) = problem.descend(Phase::Shift, init, cfg, &mut trace, &mut iteration, &mut degenerate_iterations)?;
        let best = problem.descend(Phase::Residual, shifted, cfg, &mut trace, &mut iteration, &mut degenerate_iterations)?;
        level_losses.push(best.0);
        flow = Some(best.1);
    }

    Ok(FlowRegistration {
        flow: flow.expect("at least one level"),
        level_losses,
        trace,
        degenerate_iterations,
    })
}
