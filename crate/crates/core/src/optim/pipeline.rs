//! Affine-then-flow volume registration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::losses::LossWeights;
use crate::resample::{warp_affine, warp_volume_slices, AffineTransform, FlowField};
use crate::volume::Volume;

use super::adam::OptimizerConfig;
use super::affine::register_affine;
use super::flow::register_flow;
use super::pyramid::Pyramid;
use super::trace::LossTrace;

/// Which stages of the pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Affine,
    Flow,
    Both,
}

impl Stage {
    pub fn runs_affine(self) -> bool {
        matches!(self, Stage::Affine | Stage::Both)
    }

    pub fn runs_flow(self) -> bool {
        matches!(self, Stage::Flow | Stage::Both)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub stage: Stage,
    pub weights: LossWeights,
    /// `None` derives the pyramid from the slice size.
    pub pyramid: Option<Pyramid>,
    pub affine: OptimizerConfig,
    pub flow: OptimizerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage: Stage::Both,
            weights: LossWeights::default(),
            pyramid: None,
            affine: OptimizerConfig::affine(),
            flow: OptimizerConfig::flow(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub transform: AffineTransform,
    pub affine_trace: LossTrace,
    /// Moving volume after the affine stage only.
    pub affine_warped: Volume,
    /// One flow per axial slice (all zero when the flow stage is skipped).
    pub flows: Vec<FlowField>,
    pub flow_traces: Vec<LossTrace>,
    /// Final registered volume.
    pub warped: Volume,
    pub warnings: Vec<String>,
}

/// Registers `m` to `f`: a 3D affine first, then an independent flow for
/// every axial slice of the affinely warped volume.
pub fn register_volume_pipeline(m: &Volume, f: &Volume, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if !m.same_grid(f) {
        return Err(Error::DimsMismatch(format!(
            "moving {:?} vs fixed {:?}; resize first",
            m.dims(),
            f.dims()
        )));
    }
    let [nx, ny, nz] = f.dims();

    let (transform, affine_trace, affine_warped) = if cfg.stage.runs_affine() {
        let reg = register_affine(m, f, &cfg.affine)?;
        let warped = warp_affine(m, &reg.transform)?;
        (reg.transform, reg.trace, warped)
    } else {
        (AffineTransform::identity(), LossTrace::default(), m.clone())
    };

    if !cfg.stage.runs_flow() {
        return Ok(PipelineResult {
            transform,
            affine_trace,
            flows: vec![FlowField::zeros([nx, ny]); nz],
            flow_traces: vec![LossTrace::default(); nz],
            warped: affine_warped.clone(),
            affine_warped,
            warnings: Vec::new(),
        });
    }

    let pyramid = match &cfg.pyramid {
        Some(p) => p.clone(),
        None => Pyramid::for_size(nx),
    };
    let per_slice = (0..nz)
        .into_par_iter()
        .map(|z| {
            let ms = affine_warped.slice(z);
            let fs = f.slice(z);
            if ms.is_constant() || fs.is_constant() {
                let msg = format!("slice {z}: constant after affine stage, zero flow used");
                log::warn!("{msg}");
                return Ok((FlowField::zeros([nx, ny]), LossTrace::default(), Some(msg)));
            }
            let reg = register_flow(&ms, &fs, &cfg.weights, &pyramid, &cfg.flow)?;
            Ok((reg.flow, reg.trace, None))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut flows = Vec::with_capacity(nz);
    let mut flow_traces = Vec::with_capacity(nz);
    let mut warnings = Vec::new();
    for (flow, trace, warn) in per_slice {
        flows.push(flow);
        flow_traces.push(trace);
        warnings.extend(warn);
    }
    let warped = warp_volume_slices(&affine_warped, &flows)?;
    Ok(PipelineResult {
        transform,
        affine_trace,
        affine_warped,
        flows,
        flow_traces,
        warped,
        warnings,
    })
}
