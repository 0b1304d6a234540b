//! Flow registration repeated over a range of Charbonnier exponents.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::losses::{total_loss, LossWeights};
use crate::volume::Slice;

use super::adam::OptimizerConfig;
use super::flow::{average_flow_magnitude, register_flow};
use super::pyramid::Pyramid;

/// 0.10 to 0.45 in steps of 0.05.
pub const DEFAULT_ALPHAS: [f64; 8] = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweepRow {
    pub alpha: f64,
    pub average_flow_magnitude: f64,
    pub total: f64,
    pub photometric: f64,
    pub correlation: f64,
    pub smoothness: f64,
}

/// Registers `m` to `f` once per alpha, everything else fixed. Rows come
/// back in the order of `alphas`.
pub fn alpha_sweep(
    m: &Slice,
    f: &Slice,
    base: &LossWeights,
    pyr: &Pyramid,
    cfg: &OptimizerConfig,
    alphas: &[f64],
) -> Result<Vec<AlphaSweepRow>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let w = base.with_alpha(alpha);
            let reg = register_flow(m, f, &w, pyr, cfg)?;
            let l = total_loss(f, m, &reg.flow, &w)?;
            Ok(AlphaSweepRow {
                alpha,
                average_flow_magnitude: average_flow_magnitude(&reg.flow),
                total: l.value,
                photometric: l.photometric,
                correlation: l.correlation,
                smoothness: l.smoothness,
            })
        })
        .collect()
}
